#ifndef RIGIDITY_PATH_HPP
#define RIGIDITY_PATH_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/flex.hpp"
#include "rigidity/framework.hpp"
#include "rigidity/linalg.hpp"

namespace rigidity {

struct PathSample {
  double t = 0.0;
  Configuration x;
  double s = 0.0;  // arclength from the first sample
  ElongationVector elongation;
};

/// Ordered samples of a motion, s nondecreasing from 0.
struct PathSamples {
  std::vector<PathSample> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  const PathSample& back() const { return records.back(); }

  double max_abs_squared() const {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.elongation.max_abs_squared());
    return m;
  }
};

/// X0 + sum_k X^(k) t^k / k!
inline Configuration polynomial_path(const Configuration& x0, const FlexSequence& flex, double t) {
  Vector x = x0.values();
  if (t == 0.0) return Configuration(std::move(x));
  double term = 1.0;
  for (int k = 1; k <= flex.order(); ++k) {
    term *= t / static_cast<double>(k);
    x += term * flex.derivative(k);
  }
  return Configuration(std::move(x));
}

/// Cumulative chord lengths of consecutive samples.
inline std::vector<double> arclength(const std::vector<Configuration>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("arclength: need at least 2 samples");
  std::vector<double> s(samples.size(), 0.0);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].size() != samples[i - 1].size()) throw DimensionMismatch("dimension mismatch: samples differ in length");
    s[i] = s[i - 1] + (samples[i].values() - samples[i - 1].values()).norm();
  }
  return s;
}

/// Samples any parameterized curve at the given parameters (ascending).
inline PathSamples sample_curve(const Framework& f, const std::vector<double>& ts,
                                const std::function<Configuration(double)>& curve) {
  std::vector<Configuration> xs;
  xs.reserve(ts.size());
  for (double t : ts) xs.push_back(curve(t));
  const auto s = ts.size() >= 2 ? arclength(xs) : std::vector<double>(ts.size(), 0.0);
  PathSamples out;
  for (std::size_t i = 0; i < ts.size(); ++i) out.records.push_back({ts[i], xs[i], s[i], squared_elongation(f, xs[i])});
  return out;
}

/// 0 followed by log-spaced parameters in [t_min, t_max].
inline std::vector<double> log_parameter_grid(double t_min, double t_max, int per_decade) {
  std::vector<double> ts{0.0};
  const double decades = std::log10(t_max / t_min);
  const int count = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  for (int i = 0; i < count; ++i) ts.push_back(t_min * std::pow(10.0, decades * i / (count - 1)));
  return ts;
}

inline PathSamples sample_polynomial_path(const Framework& f, const Configuration& x0, const FlexSequence& flex,
                                          double t_min = 1e-7, double t_max = 0.3, int per_decade = 40) {
  return sample_curve(f, log_parameter_grid(t_min, t_max, per_decade),
                      [&](double t) { return polynomial_path(x0, flex, t); });
}

// ---------------------------------------------------------------------------
// Projection onto the constraint manifold.

struct ProjectionOptions {
  int max_iterations = 50;
  double tolerance = 0.0;  // 0: use 1e-12 (1 + |X0|^2)
  double max_move = std::numeric_limits<double>::infinity();
};

struct ProjectionResult {
  Configuration x;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // max |D_e| at x
};

namespace detail {

struct Hyperplane {
  Vector normal;
  Vector point;
};

// Minimum-norm Gauss-Newton on D(X) = 0, optionally with n.(X - p) = 0.
// After reaching the tolerance a few extra steps polish the residual down
// to rounding level while it keeps decreasing.
inline ProjectionResult gauss_newton(const Framework& f, const Configuration& start, double tol, int max_iter,
                                     double max_move, const std::optional<Hyperplane>& plane) {
  ProjectionResult out;
  Vector x = start.values();
  const Vector origin = x;
  auto residual_of = [&](const Vector& y, Vector* fvec) {
    const Vector d = squared_elongation(f, Configuration(y)).squared;
    double res = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    if (fvec) {
      *fvec = Vector(d.size() + (plane ? 1 : 0));
      fvec->head(d.size()) = d;
    }
    if (plane) {
      const double h = plane->normal.dot(y - plane->point);
      res = std::max(res, std::abs(h));
      if (fvec) (*fvec)(d.size()) = h;
    }
    return res;
  };
  Vector fvec;
  double res = residual_of(x, &fvec);
  int polish = 0;
  for (int it = 0; it <= max_iter; ++it) {
    out.iterations = it;
    if (res <= tol) {
      if (polish >= 3) break;
      ++polish;
    }
    if (it == max_iter) break;
    Matrix jac = rigidity_matrix(f, Configuration(x));
    if (plane) {
      jac.conservativeResize(jac.rows() + 1, Eigen::NoChange);
      jac.row(jac.rows() - 1) = plane->normal.transpose();
    }
    const Vector step = spectral_split(jac).solve(-fvec);
    const Vector trial = x + step;
    if (!trial.allFinite() || (trial - origin).norm() > max_move) break;
    Vector trial_f;
    const double trial_res = residual_of(trial, &trial_f);
    if (polish > 0 && trial_res >= res) break;
    x = trial;
    fvec = std::move(trial_f);
    res = trial_res;
  }
  out.x = Configuration(std::move(x));
  out.residual = squared_elongation(f, out.x).max_abs_squared();
  out.converged = res <= tol;
  return out;
}

}  // namespace detail

/// Gauss-Newton projection of a near-solution onto D(X) = 0.
inline ProjectionResult project_to_manifold(const Framework& f, const Configuration& guess, const ProjectionOptions& opts = {}) {
  f.require_layout(guess.values(), "configuration");
  double min_len2 = std::numeric_limits<double>::infinity();
  for (const auto& e : f.edges()) min_len2 = std::min(min_len2, e.length * e.length);
  const double defect = squared_elongation(f, guess).max_abs_squared();
  if (defect > 1e-2 * min_len2) throw PreconditionError("project_to_manifold: guess is outside the projection basin");
  const double tol = opts.tolerance > 0.0 ? opts.tolerance : 1e-12 * f.scale();
  if (defect <= tol) return {guess, true, 0, defect};
  return detail::gauss_newton(f, guess, tol, opts.max_iterations, opts.max_move, std::nullopt);
}

// ---------------------------------------------------------------------------
// Predictor-corrector tracing.

struct TraceOptions {
  int max_halvings = 6;
  // Offset added to the first predictor, as a multiple of the step; selects
  // one side at a cusp where the plain predictor is symmetric.
  std::optional<Vector> side_seed;
};

struct TraceResult {
  PathSamples path;
  bool truncated = false;
  std::string reason;
};

inline Vector flex_tangent(const Framework& f, const Configuration& x, const Vector& previous, const Vector& chord) {
  const Matrix n = spectral_split(rigidity_matrix(f, x)).nullspace;
  if (n.cols() > 0) {
    Vector t = n * (n.transpose() * previous);
    if (t.norm() > 1e-6) return t.normalized();
  }
  return chord.normalized();
}

/// Traces a finite motion from x0 starting along `direction`, taking `count`
/// predictor-corrector steps of pseudo-arclength `step`.
inline TraceResult trace_mechanism(const Framework& f, const Configuration& x0, const Vector& direction, double step,
                                   int count, const TraceOptions& opts = {}) {
  f.require_layout(x0.values(), "configuration");
  f.require_layout(direction, "direction");
  if (!(step > 0.0)) throw std::invalid_argument("trace_mechanism: step must be positive");
  const double scale = 1.0 + x0.values().squaredNorm();
  const double dnorm = direction.norm();
  if (dnorm == 0.0 || (rigidity_matrix(f, x0) * (direction / dnorm)).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw PreconditionError("no flex direction: direction is not a first-order flex at the start configuration");

  TraceResult out;
  const double tol = 1e-12 * scale;
  Vector tangent = direction / dnorm;
  Configuration x = x0;
  double t = 0.0;
  double s = 0.0;
  out.path.records.push_back({0.0, x0, 0.0, squared_elongation(f, x0)});

  for (int i = 1; i <= count; ++i) {
    double h = step;
    std::optional<ProjectionResult> accepted;
    for (int attempt = 0; attempt <= opts.max_halvings; ++attempt, h *= 0.5) {
      const Vector on_plane = x.values() + h * tangent;
      Vector predicted = on_plane;
      if (i == 1 && opts.side_seed) predicted += h * *opts.side_seed;
      auto res = detail::gauss_newton(f, Configuration(predicted), tol, 50, 3.0 * h,
                                      detail::Hyperplane{tangent, on_plane});
      if (!res.converged) continue;
      const Vector chord = res.x.values() - x.values();
      if (chord.norm() > 3.0 * h || chord.dot(tangent) <= 0.0) continue;
      accepted = std::move(res);
      break;
    }
    if (!accepted) {
      out.truncated = true;
      out.reason = "corrector failed at step " + std::to_string(i);
      break;
    }
    const Vector chord = accepted->x.values() - x.values();
    tangent = flex_tangent(f, accepted->x, tangent, chord);
    t += h;
    s += chord.norm();
    x = accepted->x;
    out.path.records.push_back({t, x, s, squared_elongation(f, x)});
  }
  return out;
}

/// One traced branch from a start configuration.
struct Branch {
  std::string label;
  Vector direction;  // initial unit tangent actually used
  int side = 0;      // sign of the side seed, 0 when none
  TraceResult result;
};

/// Picks initial directions automatically and traces every branch leaving x0.
///
/// One-dimensional flex spaces give a single branch. Wider spaces use the
/// directions that survive the second-order test; when there is exactly a
/// line of them, the remaining flex directions seed the two sides of a cusp.
/// Orientation is whichever sign admits the first few steps, at the full step
/// or, failing that, at step / 16.
inline std::vector<Branch> trace_branches(const Framework& f, const Configuration& x0, double step, int count,
                                          std::optional<int> basis_index = std::nullopt,
                                          const OrderTestOptions& order_opts = {}) {
  const FlexContext ctx(f, x0);
  const Matrix& n = ctx.split().nullspace;
  if (n.cols() == 0) throw PreconditionError("no flex direction: framework is first-order rigid here");

  Vector d = n.col(0);
  std::vector<std::pair<int, std::optional<Vector>>> sides{{0, std::nullopt}};
  if (basis_index) {
    if (*basis_index < 0 || *basis_index >= n.cols()) throw std::out_of_range("flex basis index out of range");
    d = n.col(*basis_index);
  } else if (n.cols() > 1) {
    const auto second = analyze_second_order(ctx, order_opts);
    if (!second.directions.empty()) {
      d = second.directions.front();
      Vector side = Vector::Zero(d.size());
      for (Eigen::Index l = 0; l < n.cols(); ++l) {
        Vector c = n.col(l) - d * d.dot(n.col(l));
        if (c.norm() > side.norm()) side = c;
      }
      side.normalize();
      sides = {{1, 0.5 * side}, {-1, -0.5 * side}};
    }
  }

  std::vector<Branch> out;
  for (auto& [sign_of_side, seed] : sides) {
    TraceOptions opts;
    opts.side_seed = seed;
    // Near a cusp the wrong orientation can survive one step with a defect
    // of order h^3, so each orientation is probed over several steps.
    std::optional<std::pair<double, double>> choice;  // (orientation, step)
    const int probe = std::max(1, std::min(count, 6));
    for (double h : {step, step / 16.0}) {
      for (double orient : {1.0, -1.0}) {
        if (!trace_mechanism(f, x0, orient * d, h, probe, opts).truncated) {
          choice = {orient, h};
          break;
        }
      }
      if (choice) break;
    }
    Branch b;
    b.side = sign_of_side;
    b.label = sign_of_side > 0 ? "branch+" : sign_of_side < 0 ? "branch-" : "branch";
    if (!choice) {
      b.direction = d;
      b.result.path.records.push_back({0.0, x0, 0.0, squared_elongation(f, x0)});
      b.result.truncated = true;
      b.result.reason = "no first step in either orientation";
    } else {
      b.direction = choice->first * d;
      b.result = trace_mechanism(f, x0, b.direction, choice->second, count, opts);
    }
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output: t,s,max_abs_D,<vertex_id>.<axis>... with 17 significant digits.

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const Framework& f, const PathSamples& path) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  os << "t,s,max_abs_D";
  for (const auto& v : f.vertices()) {
    if (v.pinned) continue;
    for (int a = 0; a < f.dimension(); ++a) os << ',' << v.id << '.' << kAxes[a];
  }
  os << '\n';
  for (const auto& r : path.records) {
    os << format_double(r.t) << ',' << format_double(r.s) << ',' << format_double(r.elongation.max_abs_squared());
    for (Eigen::Index i = 0; i < r.x.size(); ++i) os << ',' << format_double(r.x[i]);
    os << '\n';
  }
}

}  // namespace rigidity

#endif  // RIGIDITY_PATH_HPP
