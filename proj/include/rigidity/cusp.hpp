#ifndef RIGIDITY_CUSP_HPP
#define RIGIDITY_CUSP_HPP

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/fixtures.hpp"
#include "rigidity/flex.hpp"
#include "rigidity/framework.hpp"

namespace rigidity {

/// Raised when the cusp relations admit no real solution.
class InfeasibleFlex : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Degenerate (X^(1) = 0) flexes of orders 1..6 of a point on a circle of
/// radius r whose radius direction is orientation * (1, 0), given the
/// tangential components (a, b, c, d, e) of orders 2..6. The radial
/// components follow from the order-4..6 constraint coefficients.
inline std::array<Eigen::Vector2d, 6> circle_flex_components(double r, const std::array<double, 5>& y, int orientation) {
  if (!(r > 0.0)) throw std::invalid_argument("circle_flex_components: radius must be positive");
  if (orientation != 1 && orientation != -1) throw std::invalid_argument("circle_flex_components: orientation must be +-1");
  const auto [a, b, c, d, e] = y;
  const double o = orientation;
  return {Eigen::Vector2d(0.0, 0.0),
          Eigen::Vector2d(0.0, a),
          Eigen::Vector2d(0.0, b),
          Eigen::Vector2d(-o * 3.0 * a * a / r, c),
          Eigen::Vector2d(-o * 10.0 * a * b / r, d),
          Eigen::Vector2d(-o * (15.0 * a * c + 10.0 * b * b) / r, e)};
}

/// Vertical flex components of p1, p2 at orders 2..6 of one Watt linkage.
struct WattScalars {
  double a1 = 0, a2 = 0, b1 = 0, b2 = 0, c1 = 0, c2 = 0, d1 = 0, d2 = 0, e1 = 0, e2 = 0;
};

struct DegenerateFlexSolution {
  double bar_length = 0.0;   // L, length of q-qb
  int branch = 1;            // sign of b_bar - b
  WattScalars left;
  WattScalars right;         // the mirrored linkage (a_bar, b_bar, ...)
  Eigen::Vector2d q6 = Eigen::Vector2d::Zero();   // q^(6)
  Eigen::Vector2d qb6 = Eigen::Vector2d::Zero();  // qb^(6)
  FlexSequence flex;         // degeneracy 1, order 6, all free vertices
};

struct CuspFlexChoices {
  double b = 0.0;  // left linkage's order-3 vertical component; only b_bar - b matters
  double c = 0.0;  // p1 and p1b vertical components at orders 4, 5, 6
  double d = 0.0;
  double e = 0.0;
};

namespace detail {

struct WattColumns {
  int p1y, p2y, p1by, p2by, qx, qy, qbx, qby;
  int q, qb;  // vertex indices
};

inline WattColumns watt_columns(const Framework& f) {
  auto col = [&](const char* id, int axis) {
    const auto idx = f.index_of(id);
    if (!idx || f.free_column(*idx, axis) < 0)
      throw std::invalid_argument(std::string("double-Watt framework lacks free vertex '") + id + "'");
    return f.free_column(*idx, axis);
  };
  WattColumns c{col("p1", 1), col("p2", 1), col("p1b", 1), col("p2b", 1), col("q", 0), col("q", 1), col("qb", 0), col("qb", 1), 0, 0};
  c.q = *f.index_of("q");
  c.qb = *f.index_of("qb");
  return c;
}

inline double scalar_at(const FlexSequence& flex, int k, int column) { return flex.derivative(k)(column); }

}  // namespace detail

/// Adds a nullspace combination to `particular` so the listed free
/// coordinates take the listed values (least squares if overdetermined).
inline Vector prescribe_components(const Vector& particular, const Matrix& nullspace,
                                   const std::vector<std::pair<int, double>>& targets) {
  Matrix a(static_cast<Eigen::Index>(targets.size()), nullspace.cols());
  Vector rhs(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = nullspace.row(targets[i].first);
    rhs(static_cast<Eigen::Index>(i)) = targets[i].second - particular(targets[i].first);
  }
  return particular + nullspace * spectral_split(a).solve(rhs);
}

/// Builds the order-6 degenerate flex of the double-Watt mechanism with
/// p1, p2 vertical acceleration a on both linkages and the tilt
/// b_bar - b = branch * sqrt(-9 L a^3).
inline DegenerateFlexSolution solve_cusp_flexes(const Framework& f, double a, int branch, const CuspFlexChoices& choices = {}) {
  if (branch != 1 && branch != -1) throw std::invalid_argument("solve_cusp_flexes: branch must be +-1");
  if (!(a < 0.0))
    throw InfeasibleFlex("solve_cusp_flexes requires a < 0: the sixth-order condition 9 L a^3 + (b_bar - b)^2 = 0 has no real "
                         "solution otherwise, so the horizontal bar cannot rise");
  const auto cols = detail::watt_columns(f);
  const auto& verts = f.vertices();
  const double length = (verts[static_cast<std::size_t>(cols.q)].rest - verts[static_cast<std::size_t>(cols.qb)].rest).norm();

  const FlexContext ctx(f, f.rest());
  const Matrix& n = ctx.split().nullspace;
  if (n.cols() != 2) throw std::invalid_argument("solve_cusp_flexes: expected a 2-dimensional first-order flex space");

  const double b = choices.b;
  const double b_bar = b + branch * std::sqrt(-9.0 * length * a * a * a);
  const Vector zero = Vector::Zero(f.free_coordinate_count());

  FlexSequence flex(std::vector<Vector>{zero});
  flex.push(prescribe_components(zero, n, {{cols.p1y, a}, {cols.p1by, a}}));
  flex.push(prescribe_components(zero, n, {{cols.p1y, b}, {cols.p1by, b_bar}}));
  const double free_values[] = {choices.c, choices.d, choices.e};
  for (int k = 4; k <= 6; ++k) {
    const auto ext = extend_flex(ctx, flex, k);
    if (!ext.feasible)
      throw InfeasibleFlex("solve_cusp_flexes: level " + std::to_string(k) + " is obstructed (" + std::to_string(ext.obstruction) + ")");
    const double v = free_values[k - 4];
    flex.push(prescribe_components(ext.particular, n, {{cols.p1y, v}, {cols.p1by, v}}));
  }

  DegenerateFlexSolution sol;
  sol.bar_length = length;
  sol.branch = branch;
  auto fill = [&](WattScalars& w, int c1, int c2) {
    w.a1 = detail::scalar_at(flex, 2, c1);
    w.a2 = detail::scalar_at(flex, 2, c2);
    w.b1 = detail::scalar_at(flex, 3, c1);
    w.b2 = detail::scalar_at(flex, 3, c2);
    w.c1 = detail::scalar_at(flex, 4, c1);
    w.c2 = detail::scalar_at(flex, 4, c2);
    w.d1 = detail::scalar_at(flex, 5, c1);
    w.d2 = detail::scalar_at(flex, 5, c2);
    w.e1 = detail::scalar_at(flex, 6, c1);
    w.e2 = detail::scalar_at(flex, 6, c2);
  };
  fill(sol.left, cols.p1y, cols.p2y);
  fill(sol.right, cols.p1by, cols.p2by);
  sol.q6 = Eigen::Vector2d(flex.derivative(6)(cols.qx), flex.derivative(6)(cols.qy));
  sol.qb6 = Eigen::Vector2d(flex.derivative(6)(cols.qbx), flex.derivative(6)(cols.qby));
  sol.flex = std::move(flex);

  const auto check = verify_flex(ctx, sol.flex, 6);
  double worst = 0.0;
  for (double r : check.residuals) worst = std::max(worst, r);
  if (worst > 1e-8) throw InfeasibleFlex("solve_cusp_flexes: assembled flex has residual " + std::to_string(worst));
  return sol;
}

struct RelationResidual {
  std::string name;
  double residual = 0.0;
};

struct WattRelationReport {
  std::vector<RelationResidual> relations;
  std::vector<double> level_residuals;  // max_e |D_e^(k)(0)| / 2 for k = 1..6
  double horizontal_d6 = 0.0;           // D^(6)(0) / 2 on the q-qb bar
  double max_relation = 0.0;
  double max_level = 0.0;
  bool ok = false;                      // everything <= 1e-8
  std::string error;                    // set if the flex could not be evaluated
};

/// Residuals of the relations the degenerate flex must satisfy, plus an
/// independent re-evaluation of every edge's coefficients through
/// constraint_coefficient.
inline WattRelationReport verify_watt_relations(const Framework& f, const DegenerateFlexSolution& sol) {
  WattRelationReport rep;
  const auto& l = sol.left;
  const auto& r = sol.right;
  const double a = l.a1;
  const double b = l.b1;
  const double a_bar = r.a1;
  const double b_bar = r.b1;
  auto add = [&](std::string name, double value) { rep.relations.push_back({std::move(name), std::abs(value)}); };
  add("a1 = a2", l.a1 - l.a2);
  add("b1 = b2", l.b1 - l.b2);
  add("c1 - c2 = 6a^2", l.c1 - l.c2 - 6.0 * a * a);
  add("d1 - d2 = 20ab", l.d1 - l.d2 - 20.0 * a * b);
  add("e1 - e2 = 15a(c1 + c2) + 20b^2", l.e1 - l.e2 - 15.0 * a * (l.c1 + l.c2) - 20.0 * b * b);
  add("mirror a1 = a2", r.a1 - r.a2);
  add("mirror b1 = b2", r.b1 - r.b2);
  add("mirror c1 - c2 = 6a^2", r.c1 - r.c2 - 6.0 * a_bar * a_bar);
  add("mirror d1 - d2 = 20ab", r.d1 - r.d2 - 20.0 * a_bar * b_bar);
  add("mirror e1 - e2 = 15a(c1 + c2) + 20b^2", r.e1 - r.e2 - 15.0 * a_bar * (r.c1 + r.c2) - 20.0 * b_bar * b_bar);
  add("a = a_bar", a - a_bar);
  add("9La^3 + (b_bar - b)^2 = 0", 9.0 * sol.bar_length * a * a * a + (b_bar - b) * (b_bar - b));
  add("q^(6)_x = -45a^3", sol.q6.x() + 45.0 * a * a * a);
  add("qb^(6)_x = 45a_bar^3", sol.qb6.x() - 45.0 * a_bar * a_bar * a_bar);
  for (const auto& rel : rep.relations) rep.max_relation = std::max(rep.max_relation, rel.residual);

  try {
    const FlexContext ctx(f, f.rest());
    for (int k = 1; k <= 6; ++k) {
      const Vector c = constraint_coefficient(ctx, sol.flex, k);
      rep.level_residuals.push_back(0.5 * c.cwiseAbs().maxCoeff());
      rep.max_level = std::max(rep.max_level, rep.level_residuals.back());
    }
    const auto q = f.index_of("q");
    const auto qb = f.index_of("qb");
    for (Eigen::Index e = 0; e < f.edge_count(); ++e) {
      const auto& edge = f.edges()[static_cast<std::size_t>(e)];
      if (q && qb && std::minmax(edge.u, edge.v) == std::minmax(*q, *qb))
        rep.horizontal_d6 = 0.5 * constraint_coefficient(ctx, sol.flex, 6)(e);
    }
  } catch (const std::exception& ex) {
    rep.error = ex.what();
    rep.max_level = std::numeric_limits<double>::infinity();
  }
  rep.ok = rep.error.empty() && rep.max_relation <= 1e-8 && rep.max_level <= 1e-8;
  return rep;
}

}  // namespace rigidity

#endif  // RIGIDITY_CUSP_HPP
