#ifndef RIGIDITY_FLEX_HPP
#define RIGIDITY_FLEX_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rigidity/framework.hpp"
#include "rigidity/linalg.hpp"

namespace rigidity {

inline constexpr int kMaxFlexLevel = 20;

/// Exact binomial coefficient for 0 <= a <= k <= 20.
inline constexpr std::uint64_t binomial(int k, int a) {
  if (a < 0 || a > k) return 0;
  std::uint64_t out = 1;
  for (int i = 1; i <= a; ++i) out = out * static_cast<std::uint64_t>(k - a + i) / static_cast<std::uint64_t>(i);
  return out;
}

static_assert(binomial(6, 3) == 20 && binomial(20, 10) == 184756);

/// Formal derivatives X^(1) .. X^(N) of a motion at t = 0, in the free
/// layout. The base configuration X^(0) is passed alongside, not stored.
class FlexSequence {
 public:
  FlexSequence() = default;
  explicit FlexSequence(std::vector<Vector> derivatives) : derivatives_(std::move(derivatives)) {
    for (const auto& d : derivatives_) {
      if (d.size() != derivatives_.front().size())
        throw DimensionMismatch("dimension mismatch: flex derivatives differ in length");
    }
  }

  int order() const noexcept { return static_cast<int>(derivatives_.size()); }

  /// Number of leading derivatives that are exactly zero.
  int degeneracy() const noexcept {
    int m = 0;
    while (m < order() && derivatives_[static_cast<std::size_t>(m)].isZero(0.0)) ++m;
    return m;
  }

  /// 1-based access: derivative(1) is X^(1).
  const Vector& derivative(int k) const {
    if (k < 1 || k > order()) throw std::out_of_range("flex level out of range");
    return derivatives_[static_cast<std::size_t>(k - 1)];
  }
  Vector& derivative(int k) {
    if (k < 1 || k > order()) throw std::out_of_range("flex level out of range");
    return derivatives_[static_cast<std::size_t>(k - 1)];
  }

  const std::vector<Vector>& derivatives() const noexcept { return derivatives_; }

  void push(Vector next) { derivatives_.push_back(std::move(next)); }

  FlexSequence truncated(int n) const {
    return FlexSequence(std::vector<Vector>(derivatives_.begin(), derivatives_.begin() + std::min(n, order())));
  }

 private:
  std::vector<Vector> derivatives_;
};

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Per-call cache of the base-configuration quantities every flex
/// computation needs: edge vectors, rigidity matrix and its SVD split.
class FlexContext {
 public:
  FlexContext(const Framework& f, const Configuration& x0)
      : f_(&f), x0_(x0), base_diffs_(edge_differences(f, embed(f, x0))), r_(rigidity_matrix(f, x0)),
        split_(spectral_split(r_)), scale_(1.0 + x0.values().squaredNorm()) {}

  const Framework& framework() const noexcept { return *f_; }
  const Configuration& base() const noexcept { return x0_; }
  const Matrix& rigidity() const noexcept { return r_; }
  const SpectralSplit& split() const noexcept { return split_; }
  double scale() const noexcept { return scale_; }
  const Matrix& base_diffs() const noexcept { return base_diffs_; }

  Matrix diffs(const Vector& dx) const { return edge_differences(*f_, embed_derivative(*f_, dx)); }

  std::vector<Matrix> level_diffs(const FlexSequence& flex, int upto) const {
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(upto) + 1);
    out.push_back(base_diffs_);
    for (int a = 1; a <= upto; ++a) out.push_back(diffs(flex.derivative(a)));
    return out;
  }

 private:
  const Framework* f_;
  Configuration x0_;
  Matrix base_diffs_;
  Matrix r_;
  SpectralSplit split_;
  double scale_;
};

namespace detail {

inline Vector rowwise_dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).rowwise().sum(); }

// sum_{a=lo}^{hi} C(k,a) delta^(a) . delta^(k-a), per edge.
inline Vector binomial_sum(const std::vector<Matrix>& diffs, int k, int lo, int hi) {
  Vector out = Vector::Zero(diffs.front().rows());
  for (int a = lo; a <= hi; ++a) out += static_cast<double>(binomial(k, a)) * rowwise_dot(diffs[static_cast<std::size_t>(a)], diffs[static_cast<std::size_t>(k - a)]);
  return out;
}

inline void check_level(int k, int available) {
  if (k < 1 || k > kMaxFlexLevel || k > available) {
    std::ostringstream os;
    os << "flex level " << k << " out of range (order " << available << ", max " << kMaxFlexLevel << ")";
    throw std::out_of_range(os.str());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Taylor coefficients of the squared elongation along a formal motion.

/// k! [t^k] D_e(t) along X0 + sum X^(a) t^a / a!, i.e.
/// sum_{a=0}^{k} C(k,a) (x_u^(a) - x_v^(a)) . (x_u^(k-a) - x_v^(k-a)).
inline Vector constraint_coefficient(const FlexContext& ctx, const FlexSequence& flex, int k) {
  detail::check_level(k, flex.order());
  return detail::binomial_sum(ctx.level_diffs(flex, k), k, 0, k);
}

inline Vector constraint_coefficient(const Framework& f, const Configuration& x0, const FlexSequence& flex, int k) {
  return constraint_coefficient(FlexContext(f, x0), flex, k);
}

/// The part of the level-k coefficient that does not involve X^(k):
/// b_k = sum_{a=1}^{k-1} C(k,a) delta^(a) . delta^(k-a). The level-k
/// equation reads R X^(k) + b_k = 0.
inline Vector level_rhs(const FlexContext& ctx, const FlexSequence& flex, int k) {
  if (k < 1 || k > kMaxFlexLevel || flex.order() < k - 1) throw std::out_of_range("flex level out of range");
  if (k == 1) return Vector::Zero(ctx.framework().edge_count());
  return detail::binomial_sum(ctx.level_diffs(flex, k - 1), k, 1, k - 1);
}

// ---------------------------------------------------------------------------
// First-order flexes and self-stresses.

/// Orthonormal basis of the rigidity-matrix nullspace; empty iff first-order rigid.
inline std::vector<Vector> first_order_flex_basis(const Framework& f, const Configuration& x0) {
  f.require_layout(x0.values(), "configuration");
  return columns_of(spectral_split(rigidity_matrix(f, x0)).nullspace);
}

/// Orthonormal basis of self-stresses w with w^T R = 0.
inline std::vector<Vector> stress_basis(const Framework& f, const Configuration& x0) {
  f.require_layout(x0.values(), "configuration");
  return columns_of(spectral_split(rigidity_matrix(f, x0)).left_nullspace);
}

/// Affine solution set of one level of the flex equations.
struct FlexExtension {
  Vector particular;
  std::vector<Vector> homogeneous_basis;
  bool feasible = false;
  Vector rhs;                 // b_k
  double obstruction = 0.0;   // max_j |w_j . b_k| over the stress basis
};

/// Largest absolute level-k coefficient over edges, for levels 1..n.
inline std::vector<double> level_residuals(const FlexContext& ctx, const FlexSequence& flex, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  const auto diffs = ctx.level_diffs(flex, n);
  for (int k = 1; k <= n; ++k) {
    const Vector c = detail::binomial_sum(diffs, k, 0, k);
    out.push_back(c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
  }
  return out;
}

inline FlexExtension extend_flex(const FlexContext& ctx, const FlexSequence& flex, int k) {
  if (k < 1 || k > kMaxFlexLevel) throw std::out_of_range("flex level out of range");
  if (flex.order() < k - 1) throw PreconditionError("extend_flex: flex has fewer than k-1 levels");
  for (double res : level_residuals(ctx, flex, k - 1)) {
    if (res > 1e-10 * ctx.scale()) {
      std::ostringstream os;
      os << "extend_flex: lower level residual " << res << " exceeds tolerance";
      throw PreconditionError(os.str());
    }
  }
  FlexExtension out;
  out.rhs = level_rhs(ctx, flex, k);
  const auto& split = ctx.split();
  out.obstruction = split.left_nullspace.cols() ? (split.left_nullspace.transpose() * out.rhs).cwiseAbs().maxCoeff() : 0.0;
  const double bnorm = out.rhs.norm();
  out.feasible = bnorm == 0.0 || out.obstruction <= 1e-9 * bnorm;
  out.particular = split.solve(-out.rhs);
  out.homogeneous_basis = columns_of(split.nullspace);
  return out;
}

inline FlexExtension extend_flex(const Framework& f, const Configuration& x0, const FlexSequence& flex, int k) {
  return extend_flex(FlexContext(f, x0), flex, k);
}

struct FlexVerification {
  bool ok = false;
  std::vector<double> residuals;  // per level, max over edges
  double tolerance = 0.0;
};

/// True iff every level-k coefficient, k <= n, vanishes to 1e-9 (1 + |X0|^2).
inline FlexVerification verify_flex(const FlexContext& ctx, const FlexSequence& flex, int n) {
  if (flex.order() < n) throw PreconditionError("verify_flex: flex order below n");
  FlexVerification out;
  out.tolerance = 1e-9 * ctx.scale();
  out.residuals = level_residuals(ctx, flex, n);
  out.ok = true;
  for (double r : out.residuals) out.ok = out.ok && r <= out.tolerance;
  return out;
}

inline FlexVerification verify_flex(const Framework& f, const Configuration& x0, const FlexSequence& flex, int n) {
  return verify_flex(FlexContext(f, x0), flex, n);
}

// ---------------------------------------------------------------------------
// Classic n-th order tests.

enum class Verdict { flexible, rigid, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::flexible: return "flexible";
    case Verdict::rigid: return "rigid";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct OrderTestVerdict {
  Verdict kind = Verdict::inconclusive;
  std::optional<FlexSequence> witness;  // set iff flexible
  std::string detail;                   // certificate for rigid, reason for inconclusive
  double obstruction = std::numeric_limits<double>::quiet_NaN();
  bool exact = false;                   // decided by an exact branch
};

struct OrderTestOptions {
  std::uint64_t seed = 1;
  int samples = 64;
};

/// What the level-2 equations allow for unit X^(1) in the flex space.
struct SecondOrderAnalysis {
  enum class Kind {
    first_order_rigid,
    rigid,         // no nonzero X^(1) extends (exact)
    finite,        // exactly the listed directions extend (exact, up to sign)
    unrestricted,  // every X^(1) extends
    unknown,       // sampled search; listed directions extend, others may too
  };
  Kind kind = Kind::unknown;
  std::vector<Vector> directions;
  std::string certificate;
  double obstruction = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline FlexSequence single_level(const Vector& v) { return FlexSequence(std::vector<Vector>{v}); }

// Quadratic forms c -> w_j . b_2(N c), one per stress basis vector.
inline std::vector<Matrix> stress_forms(const FlexContext& ctx) {
  const Matrix& n = ctx.split().nullspace;
  const Matrix& w = ctx.split().left_nullspace;
  std::vector<Matrix> g;
  for (Eigen::Index l = 0; l < n.cols(); ++l) g.push_back(ctx.diffs(n.col(l)));
  std::vector<Matrix> forms;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    Matrix m(n.cols(), n.cols());
    for (Eigen::Index a = 0; a < n.cols(); ++a)
      for (Eigen::Index b = a; b < n.cols(); ++b) {
        m(a, b) = 2.0 * w.col(j).dot(rowwise_dot(g[static_cast<std::size_t>(a)], g[static_cast<std::size_t>(b)]));
        m(b, a) = m(a, b);
      }
    forms.push_back(m);
  }
  return forms;
}

inline double forms_reference(const FlexContext& ctx) {
  // Bound on |b_2(N c)| for unit c: 2 sum_e |Delta_e N|^2.
  const Matrix& n = ctx.split().nullspace;
  double ref = 0.0;
  for (Eigen::Index l = 0; l < n.cols(); ++l) ref += 2.0 * ctx.diffs(n.col(l)).squaredNorm();
  return std::max(ref, std::numeric_limits<double>::min());
}

inline bool extends_to_level_two(const FlexContext& ctx, const Vector& v, double* obstruction = nullptr) {
  const auto ext = extend_flex(ctx, single_level(v), 2);
  if (obstruction) *obstruction = ext.obstruction;
  return ext.feasible;
}

inline void add_direction(std::vector<Vector>& dirs, Vector v) {
  v.normalize();
  for (const auto& d : dirs)
    if (std::abs(std::abs(d.dot(v)) - 1.0) < 1e-9) return;
  dirs.push_back(std::move(v));
}

inline std::optional<std::string> definite_combination(const std::vector<Matrix>& forms, std::mt19937_64& rng, int samples) {
  const auto s = static_cast<Eigen::Index>(forms.size());
  std::normal_distribution<double> normal;
  auto try_weights = [&](const Vector& lambda) -> bool {
    Matrix m = Matrix::Zero(forms.front().rows(), forms.front().cols());
    for (Eigen::Index j = 0; j < s; ++j) m += lambda(j) * forms[static_cast<std::size_t>(j)];
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const Vector& ev = eig.eigenvalues();
    const double peak = ev.cwiseAbs().maxCoeff();
    return peak > 0.0 && ev.minCoeff() > 1e-9 * peak;
  };
  for (Eigen::Index j = 0; j < s; ++j) {
    for (double sign : {1.0, -1.0}) {
      Vector lambda = Vector::Zero(s);
      lambda(j) = sign;
      if (try_weights(lambda)) return "stress basis vector " + std::to_string(j) + " has a definite form on first-order flexes";
    }
  }
  for (int i = 0; i < samples; ++i) {
    Vector lambda(s);
    for (Eigen::Index j = 0; j < s; ++j) lambda(j) = normal(rng);
    if (try_weights(lambda)) return "a stress combination has a definite form on first-order flexes";
  }
  return std::nullopt;
}

// Local Gauss-Newton on the unit sphere for a common isotropic vector.
inline Vector refine_common_root(const std::vector<Matrix>& forms, Vector c) {
  const auto r = c.size();
  for (int it = 0; it < 40; ++it) {
    Vector rho(static_cast<Eigen::Index>(forms.size()));
    Matrix jac(static_cast<Eigen::Index>(forms.size()), r);
    const Matrix tangent = Matrix::Identity(r, r) - c * c.transpose();
    for (std::size_t j = 0; j < forms.size(); ++j) {
      rho(static_cast<Eigen::Index>(j)) = c.dot(forms[j] * c);
      jac.row(static_cast<Eigen::Index>(j)) = 2.0 * (forms[j] * c).transpose() * tangent;
    }
    const Vector step = spectral_split(jac, 1e-12).solve(-rho);
    c = (c + step).normalized();
    if (step.norm() < 1e-15) break;
  }
  return c;
}

}  // namespace detail

inline SecondOrderAnalysis analyze_second_order(const FlexContext& ctx, const OrderTestOptions& opts = {}) {
  SecondOrderAnalysis out;
  const Matrix& n = ctx.split().nullspace;
  const auto r = n.cols();
  if (r == 0) {
    out.kind = SecondOrderAnalysis::Kind::first_order_rigid;
    out.certificate = "rigidity matrix has trivial nullspace";
    return out;
  }
  if (ctx.split().left_nullspace.cols() == 0) {
    out.kind = SecondOrderAnalysis::Kind::unrestricted;
    out.directions = columns_of(n);
    return out;
  }
  const auto forms = detail::stress_forms(ctx);
  const double ref = detail::forms_reference(ctx);
  const double tol = 1e-9 * ref;

  if (r == 1) {
    double obstruction = 0.0;
    if (detail::extends_to_level_two(ctx, n.col(0), &obstruction)) {
      out.kind = SecondOrderAnalysis::Kind::finite;
      out.directions.push_back(n.col(0));
    } else {
      out.kind = SecondOrderAnalysis::Kind::rigid;
      out.obstruction = obstruction;
      std::ostringstream os;
      os << "stress obstruction " << obstruction << " on the unique first-order flex";
      out.certificate = os.str();
    }
    return out;
  }

  if (r == 2) {
    std::size_t peak = 0;
    for (std::size_t j = 1; j < forms.size(); ++j)
      if (forms[j].norm() > forms[peak].norm()) peak = j;
    if (forms[peak].norm() <= tol) {
      out.kind = SecondOrderAnalysis::Kind::unrestricted;
      out.directions = columns_of(n);
      return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(forms[peak]);
    const double l1 = eig.eigenvalues()(0);
    const double l2 = eig.eigenvalues()(1);
    const Vector u1 = eig.eigenvectors().col(0);
    const Vector u2 = eig.eigenvectors().col(1);
    std::vector<Vector> roots;
    if (std::abs(l1) <= tol) roots.push_back(u1);
    if (std::abs(l2) <= tol) roots.push_back(u2);
    if (l1 < -tol && l2 > tol) {
      roots.push_back((std::sqrt(l2) * u1 + std::sqrt(-l1) * u2).normalized());
      roots.push_back((std::sqrt(l2) * u1 - std::sqrt(-l1) * u2).normalized());
    }
    if (roots.empty()) {
      out.kind = SecondOrderAnalysis::Kind::rigid;
      out.obstruction = std::min(std::abs(l1), std::abs(l2));
      std::ostringstream os;
      os << "stress form is definite on the 2-dimensional flex space (min |eigenvalue| " << out.obstruction << ")";
      out.certificate = os.str();
      return out;
    }
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : roots) {
      double obstruction = 0.0;
      if (detail::extends_to_level_two(ctx, n * c, &obstruction))
        detail::add_direction(out.directions, n * c);
      else
        worst = std::min(worst, obstruction);
    }
    for (auto& d : out.directions) {
      Matrix one = d;
      canonicalize_signs(one);
      d = one.col(0);
    }
    if (out.directions.empty()) {
      out.kind = SecondOrderAnalysis::Kind::rigid;
      out.obstruction = worst;
      std::ostringstream os;
      os << "stress forms share no isotropic direction (obstruction " << worst << ")";
      out.certificate = os.str();
    } else {
      out.kind = SecondOrderAnalysis::Kind::finite;
    }
    return out;
  }

  // Wide flex spaces: look for a definite stress combination (a proof of
  // rigidity), otherwise sample for common isotropic directions.
  std::mt19937_64 rng(opts.seed);
  if (auto why = detail::definite_combination(forms, rng, opts.samples)) {
    out.kind = SecondOrderAnalysis::Kind::rigid;
    out.certificate = *why;
    return out;
  }
  std::normal_distribution<double> normal;
  out.kind = SecondOrderAnalysis::Kind::unknown;
  for (int i = 0; i < opts.samples; ++i) {
    Vector c(r);
    for (Eigen::Index l = 0; l < r; ++l) c(l) = normal(rng);
    c = detail::refine_common_root(forms, c.normalized());
    if (detail::extends_to_level_two(ctx, n * c)) detail::add_direction(out.directions, n * c);
  }
  return out;
}

namespace detail {

// Chooses the homogeneous part of X^(k-1) so that level k becomes
// feasible, when k >= 3. The level-k right-hand side depends on X^(k-1)
// only through 2k delta^(1) . delta^(k-1), which is linear. Returns the
// remaining obstruction after the least-squares choice.
inline double adjust_previous_level(const FlexContext& ctx, FlexSequence& flex, int k) {
  const Matrix& n = ctx.split().nullspace;
  const Matrix& w = ctx.split().left_nullspace;
  if (w.cols() == 0) return 0.0;
  const Matrix d1 = ctx.diffs(flex.derivative(1));
  const Vector g = w.transpose() * level_rhs(ctx, flex, k);
  if (n.cols() == 0 || k < 3) return g.cwiseAbs().maxCoeff();
  Matrix a(w.cols(), n.cols());
  double ref = 0.0;
  for (Eigen::Index l = 0; l < n.cols(); ++l) {
    const Matrix dn = ctx.diffs(n.col(l));
    a.col(l) = w.transpose() * (2.0 * k * rowwise_dot(d1, dn));
    ref += dn.squaredNorm();
  }
  // Singular values below 1e-9 of the natural size 2k |delta1| |delta N|
  // are rounding noise; inverting them would send X^(k-1) off to infinity.
  ref = 2.0 * k * d1.norm() * std::sqrt(ref);
  const double peak = a.size() ? Eigen::JacobiSVD<Matrix>(a).singularValues()(0) : 0.0;
  if (!(peak > 1e-9 * ref)) return g.cwiseAbs().maxCoeff();
  const Vector h = spectral_split(a, std::max(1e-9, 1e-9 * ref / peak)).solve(-g);
  flex.derivative(k - 1) += n * h;
  return (w.transpose() * level_rhs(ctx, flex, k)).cwiseAbs().maxCoeff();
}

// Extends X^(1) = v level by level up to n. Returns the flex on success
// and the failing level's obstruction otherwise.
inline std::pair<std::optional<FlexSequence>, double> sequential_extension(const FlexContext& ctx, const Vector& v, int n) {
  FlexSequence flex = single_level(v);
  for (int k = 2; k <= n; ++k) {
    adjust_previous_level(ctx, flex, k);
    const auto ext = extend_flex(ctx, flex, k);
    if (!ext.feasible) return {std::nullopt, ext.obstruction};
    flex.push(ext.particular);
  }
  return {std::move(flex), 0.0};
}

inline OrderTestVerdict flexible(FlexSequence witness, bool exact, std::string detail = {}) {
  OrderTestVerdict v;
  v.kind = Verdict::flexible;
  v.witness = std::move(witness);
  v.exact = exact;
  v.detail = std::move(detail);
  return v;
}

inline OrderTestVerdict rigid(std::string certificate, double obstruction) {
  OrderTestVerdict v;
  v.kind = Verdict::rigid;
  v.detail = std::move(certificate);
  v.obstruction = obstruction;
  v.exact = true;
  return v;
}

inline OrderTestVerdict inconclusive(std::string reason) {
  OrderTestVerdict v;
  v.kind = Verdict::inconclusive;
  v.detail = std::move(reason);
  return v;
}

inline OrderTestVerdict heuristic_test(const FlexContext& ctx, const SecondOrderAnalysis& second, int n,
                                       const OrderTestOptions& opts) {
  const Matrix& basis = ctx.split().nullspace;
  std::vector<Vector> candidates = second.directions;
  if (second.kind != SecondOrderAnalysis::Kind::finite) {
    for (const auto& c : columns_of(basis)) add_direction(candidates, c);
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal;
    const int extra = std::min(opts.samples, 16);
    for (int i = 0; i < extra && basis.cols() > 1; ++i) {
      Vector c(basis.cols());
      for (Eigen::Index l = 0; l < c.size(); ++l) c(l) = normal(rng);
      add_direction(candidates, basis * c);
    }
  }
  int tried = 0;
  for (const auto& v : candidates) {
    for (double sign : {1.0, -1.0}) {
      ++tried;
      auto [flex, obstruction] = sequential_extension(ctx, sign * v, n);
      if (flex && verify_flex(ctx, *flex, n).ok) return flexible(std::move(*flex), false, "sequential least-squares extension");
    }
  }
  return inconclusive("no order-" + std::to_string(n) + " flex found from " + std::to_string(tried) + " first-order candidates");
}

}  // namespace detail

/// Classic n-th order flex existence test.
///
/// Exact for n = 1 and for n = 2 when the flex space has dimension <= 2 (or a
/// definite stress combination exists). For n = 3 it is exact whenever the
/// level-2 analysis leaves finitely many X^(1) directions: for X^(1) = +-v the
/// levels 2 and 3 form a linear problem in the free part of X^(2). Rigidity
/// found at a lower order is inherited. Everything else uses a sequential
/// least-squares extension, which can only produce a witness.
inline OrderTestVerdict classic_order_test(const FlexContext& ctx, int n, const OrderTestOptions& opts = {}) {
  if (n < 1) throw std::invalid_argument("classic_order_test: order must be >= 1");
  if (n > kMaxFlexLevel) throw std::invalid_argument("classic_order_test: order exceeds 20");
  const Matrix& basis = ctx.split().nullspace;
  if (basis.cols() == 0) return detail::rigid("first-order rigid: rigidity matrix has trivial nullspace", 0.0);
  if (n == 1) return detail::flexible(detail::single_level(basis.col(0)), true);

  const auto second = analyze_second_order(ctx, opts);
  using Kind = SecondOrderAnalysis::Kind;
  if (second.kind == Kind::rigid) return detail::rigid("second-order rigid: " + second.certificate, second.obstruction);

  if (n == 2) {
    if (second.directions.empty()) return detail::inconclusive("sampled search found no second-order flex");
    FlexSequence flex = detail::single_level(second.directions.front());
    flex.push(extend_flex(ctx, flex, 2).particular);
    return detail::flexible(std::move(flex), second.kind != Kind::unknown);
  }

  if (n == 3 && second.kind == Kind::finite) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : second.directions) {
      for (double sign : {1.0, -1.0}) {
        auto [flex, obstruction] = detail::sequential_extension(ctx, sign * v, 3);
        if (flex && verify_flex(ctx, *flex, 3).ok) return detail::flexible(std::move(*flex), true);
        best = std::min(best, obstruction);
      }
    }
    std::ostringstream os;
    os << "third-order rigid: level-3 stress obstruction " << best << " for every admissible first-order flex";
    return detail::rigid(os.str(), best);
  }

  if (n >= 4) {
    auto lower = classic_order_test(ctx, n - 1, opts);
    if (lower.kind == Verdict::rigid) {
      lower.detail = "inherited from order " + std::to_string(n - 1) + ": " + lower.detail;
      return lower;
    }
  }
  return detail::heuristic_test(ctx, second, n, opts);
}

inline OrderTestVerdict classic_order_test(const Framework& f, const Configuration& x0, int n, const OrderTestOptions& opts = {}) {
  return classic_order_test(FlexContext(f, x0), n, opts);
}

}  // namespace rigidity

#endif  // RIGIDITY_FLEX_HPP
