#ifndef RIGIDITY_TESTS_SUPPORT_HPP
#define RIGIDITY_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rigidity/rigidity.hpp"

namespace testing_support {

using rigidity::Configuration;
using rigidity::Framework;
using rigidity::Matrix;
using rigidity::Vector;

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

/// Random connected framework: the first d vertices are pinned, every later
/// vertex is barred to a random earlier one, plus a few extra bars.
inline Framework random_framework(std::mt19937_64& rng, int d, int vertex_count, int extra_edges = 3) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  rigidity::FrameworkDescription desc;
  desc.dimension = d;
  for (int i = 0; i < vertex_count; ++i) {
    std::vector<double> c(static_cast<std::size_t>(d));
    for (auto& x : c) x = coord(rng);
    desc.vertices.push_back({"v" + std::to_string(i), c, i < d});
  }
  std::vector<std::pair<int, int>> seen;
  auto add = [&](int u, int v) {
    const std::pair<int, int> key(std::min(u, v), std::max(u, v));
    for (const auto& s : seen)
      if (s == key) return;
    seen.push_back(key);
    desc.edges.push_back({"v" + std::to_string(u), "v" + std::to_string(v), {}});
  };
  for (int i = 1; i < vertex_count; ++i) add(i, std::uniform_int_distribution<int>(0, i - 1)(rng));
  for (int k = 0; k < extra_edges && vertex_count > 2; ++k) {
    std::uniform_int_distribution<int> pick(0, vertex_count - 1);
    const int u = pick(rng);
    const int v = pick(rng);
    if (u != v) add(u, v);
  }
  return rigidity::build_framework(desc);
}

/// Finite-difference Jacobian of the squared elongation map.
inline Matrix fd_jacobian(const Framework& f, const Configuration& x, double eps) {
  const Vector d0 = rigidity::squared_elongation(f, x).squared;
  Matrix j(d0.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    Vector xp = x.values();
    xp(c) += eps;
    j.col(c) = (rigidity::squared_elongation(f, Configuration(xp)).squared - d0) / eps;
  }
  return j;
}

/// Taylor coefficients [t^k] D_e(t), k = 0..order, of the squared
/// elongation along X0 + sum_k X^(k) t^k / k!, expanded by multiplying the
/// per-edge difference polynomials directly.
inline Matrix brute_force_coefficients(const Framework& f, const Configuration& x0, const rigidity::FlexSequence& flex,
                                       int order) {
  std::vector<Matrix> full;  // full-coordinate polynomial coefficients
  full.push_back(rigidity::embed(f, x0));
  double factorial = 1.0;
  for (int k = 1; k <= flex.order(); ++k) {
    factorial *= k;
    full.push_back(rigidity::embed_derivative(f, flex.derivative(k)) / factorial);
  }
  Matrix out = Matrix::Zero(f.edge_count(), order + 1);
  for (Eigen::Index e = 0; e < f.edge_count(); ++e) {
    const auto& edge = f.edges()[static_cast<std::size_t>(e)];
    std::vector<Eigen::VectorXd> diff;
    for (const auto& m : full) diff.push_back((m.row(edge.u) - m.row(edge.v)).transpose());
    for (int k = 0; k <= order; ++k) {
      double c = 0.0;
      for (int a = 0; a <= k; ++a) {
        if (a >= static_cast<int>(diff.size()) || k - a >= static_cast<int>(diff.size())) continue;
        c += diff[static_cast<std::size_t>(a)].dot(diff[static_cast<std::size_t>(k - a)]);
      }
      if (k == 0) c -= edge.length * edge.length;
      out(e, k) = c;
    }
  }
  return out;
}

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

/// Unit square with both diagonals and the base pinned; carries one self-stress.
inline Framework make_braced_square() {
  rigidity::FrameworkDescription d;
  d.dimension = 2;
  d.vertices = {{"A", {0, 0}, true}, {"B", {1, 0}, true}, {"C", {1, 1}, false}, {"D", {0, 1}, false}};
  d.edges = {{"B", "C", {}}, {"C", "D", {}}, {"D", "A", {}}, {"A", "C", {}}, {"B", "D", {}}};
  return rigidity::build_framework(d);
}

}  // namespace testing_support

#endif  // RIGIDITY_TESTS_SUPPORT_HPP
