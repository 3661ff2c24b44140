#ifndef RIGIDITY_ORDER_HPP
#define RIGIDITY_ORDER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rigidity/framework.hpp"
#include "rigidity/path.hpp"

namespace rigidity {

/// Worst-edge elongation against arclength, with the per-edge series kept
/// for per-edge fits.
struct ElongationProfile {
  std::vector<double> s;
  std::vector<double> worst_squared;  // max_e |D_e|
  std::vector<double> worst_linear;   // max_e |d_e|
  Matrix per_edge_squared;            // |D_e|, one row per sample
  Matrix per_edge_linear;             // |d_e|
};

inline ElongationProfile elongation_profile(const PathSamples& samples) {
  if (samples.empty()) throw std::invalid_argument("elongation_profile: empty path");
  std::vector<const PathSample*> kept;
  double last = 0.0;
  for (const auto& r : samples.records) {
    if (r.s > last) {
      kept.push_back(&r);
      last = r.s;
    }
  }
  if (kept.empty()) throw std::invalid_argument("elongation_profile: constant path (no positive arclength)");
  const auto edges = kept.front()->elongation.squared.size();
  ElongationProfile out;
  out.per_edge_squared.resize(static_cast<Eigen::Index>(kept.size()), edges);
  out.per_edge_linear.resize(static_cast<Eigen::Index>(kept.size()), edges);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& r = *kept[i];
    out.s.push_back(r.s);
    out.worst_squared.push_back(r.elongation.max_abs_squared());
    out.worst_linear.push_back(r.elongation.max_abs_linear());
    out.per_edge_squared.row(static_cast<Eigen::Index>(i)) = r.elongation.squared.cwiseAbs().transpose();
    out.per_edge_linear.row(static_cast<Eigen::Index>(i)) = r.elongation.linear.cwiseAbs().transpose();
  }
  return out;
}

/// Exact power law |D| = coefficient * s^alpha at the given arclengths.
inline ElongationProfile synthetic_profile(const std::vector<double>& s, double alpha, double coefficient = 1.0) {
  ElongationProfile out;
  out.per_edge_squared.resize(static_cast<Eigen::Index>(s.size()), 1);
  out.per_edge_linear.resize(static_cast<Eigen::Index>(s.size()), 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = coefficient * std::pow(s[i], alpha);
    out.s.push_back(s[i]);
    out.worst_squared.push_back(v);
    out.worst_linear.push_back(v);
    out.per_edge_squared(static_cast<Eigen::Index>(i), 0) = v;
    out.per_edge_linear(static_cast<Eigen::Index>(i), 0) = v;
  }
  return out;
}

enum class Measure { squared, linear };

struct FitOptions {
  double noise_floor = 1e-13;  // absolute; see noise_floor_for
  Measure measure = Measure::squared;
  int min_points = 8;
};

/// Squared elongations below this are double-precision artifacts.
inline double noise_floor_for(const Configuration& x0) { return 1e-13 * (1.0 + x0.values().squaredNorm()); }

struct OrderEstimate {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double s_min = std::numeric_limits<double>::quiet_NaN();
  double s_max = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  bool floor_hit = false;
  int points = 0;
  std::vector<double> per_edge;  // NaN where an edge stays at the floor
};

namespace detail {

struct SeriesFit {
  bool floor_hit = true;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  double s_min = std::numeric_limits<double>::quiet_NaN();
  double s_max = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
};

// Smallest decade of usable s, widened to two decades and then to the
// min_points smallest samples when it holds too few points.
inline SeriesFit fit_series(const std::vector<double>& s, const std::vector<double>& y, double floor, int min_points) {
  std::vector<std::pair<double, double>> usable;
  int positive = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) continue;
    ++positive;
    if (y[i] > floor && std::isfinite(y[i])) usable.emplace_back(s[i], y[i]);
  }
  if (positive < min_points)
    throw std::invalid_argument("fit_order: need at least " + std::to_string(min_points) + " samples with s > 0, got " +
                                std::to_string(positive));
  SeriesFit out;
  if (static_cast<int>(usable.size()) < min_points) return out;
  std::sort(usable.begin(), usable.end());
  const double s0 = usable.front().first;
  std::vector<std::pair<double, double>> window;
  for (double span : {10.0, 100.0}) {
    window.clear();
    for (const auto& p : usable)
      if (p.first <= span * s0) window.push_back(p);
    if (static_cast<int>(window.size()) >= min_points) break;
  }
  if (static_cast<int>(window.size()) < min_points)
    window.assign(usable.begin(), usable.begin() + min_points);

  const double n = static_cast<double>(window.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [si, yi] : window) {
    mx += std::log(si);
    my += std::log(yi);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [si, yi] : window) {
    const double dx = std::log(si) - mx;
    const double dy = std::log(yi) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw std::domain_error("fit_order: degenerate fit (zero variance in log s)");
  out.floor_hit = false;
  out.slope = sxy / sxx;
  const double ss_res = std::max(0.0, syy - out.slope * sxy);
  out.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  out.s_min = window.front().first;
  out.s_max = window.back().first;
  out.points = static_cast<int>(window.size());
  return out;
}

}  // namespace detail

/// Least-squares slope of log|D| against log s near s = 0.
inline OrderEstimate fit_order(const ElongationProfile& profile, const FitOptions& opts = {}) {
  const bool linear = opts.measure == Measure::linear;
  const auto& worst = linear ? profile.worst_linear : profile.worst_squared;
  const auto fit = detail::fit_series(profile.s, worst, opts.noise_floor, opts.min_points);
  OrderEstimate est;
  est.floor_hit = fit.floor_hit;
  est.slope = fit.slope;
  est.r_squared = fit.r_squared;
  est.s_min = fit.s_min;
  est.s_max = fit.s_max;
  est.points = fit.points;
  const Matrix& per_edge = linear ? profile.per_edge_linear : profile.per_edge_squared;
  for (Eigen::Index e = 0; e < per_edge.cols(); ++e) {
    std::vector<double> y(per_edge.rows());
    for (Eigen::Index i = 0; i < per_edge.rows(); ++i) y[static_cast<std::size_t>(i)] = per_edge(i, e);
    est.per_edge.push_back(detail::fit_series(profile.s, y, opts.noise_floor, opts.min_points).slope);
  }
  return est;
}

enum class Classification { witnesses_flexibility, does_not_witness };

inline constexpr double kClassifyMargin = 0.1;

/// Whether the path shows D = o(s^n): either D sits at the noise floor
/// throughout, or the fitted slope clears n by the margin. A path can only
/// witness flexibility, never certify rigidity.
inline Classification classify(const OrderEstimate& est, int n) {
  if (n < 1) throw std::invalid_argument("classify: order must be >= 1");
  if (est.floor_hit) return Classification::witnesses_flexibility;
  if (!std::isfinite(est.slope)) throw std::invalid_argument("classify: estimate has no slope");
  return est.slope > n + kClassifyMargin ? Classification::witnesses_flexibility : Classification::does_not_witness;
}

}  // namespace rigidity

#endif  // RIGIDITY_ORDER_HPP
