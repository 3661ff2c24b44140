#ifndef RIGIDITY_REPORT_HPP
#define RIGIDITY_REPORT_HPP

#include <string>
#include <vector>

#include "rigidity/cusp.hpp"
#include "rigidity/flex.hpp"
#include "rigidity/framework.hpp"
#include "rigidity/io.hpp"
#include "rigidity/order.hpp"
#include "rigidity/path.hpp"

namespace rigidity {

inline constexpr const char* kToolVersion = "0.1.0";

inline Json framework_summary(const Framework& f) {
  Json j;
  j["dimension"] = f.dimension();
  j["vertices"] = f.vertex_count();
  j["edges"] = f.edge_count();
  j["pinned"] = f.pinned_count();
  j["free_coordinates"] = f.free_coordinate_count();
  j["warnings"] = f.warnings();
  return j;
}

inline Json spectrum_summary(const FlexContext& ctx) {
  Json j;
  j["rank"] = ctx.split().rank;
  j["flex_dimension"] = ctx.split().nullspace.cols();
  j["stress_dimension"] = ctx.split().left_nullspace.cols();
  return j;
}

inline Json verdict_to_json(int n, const OrderTestVerdict& v) {
  Json j;
  j["order"] = n;
  j["verdict"] = to_string(v.kind);
  j["exact"] = v.exact;
  j["detail"] = v.detail;
  j["obstruction"] = v.obstruction;
  return j;
}

inline Json estimate_to_json(const OrderEstimate& est) {
  Json j;
  j["slope"] = est.slope;
  j["window"] = {est.s_min, est.s_max};
  j["r2"] = est.r_squared;
  j["floor_hit"] = est.floor_hit;
  j["points"] = est.points;
  j["per_edge"] = est.per_edge;
  return j;
}

/// classify() for n = 1..max_order, keyed by order.
inline Json classification_to_json(const OrderEstimate& est, int max_order) {
  Json j = Json::object();
  for (int n = 1; n <= max_order; ++n)
    j[std::to_string(n)] =
        classify(est, n) == Classification::witnesses_flexibility ? "witnesses_flexibility" : "does_not_witness";
  return j;
}

inline Json watt_report_to_json(const DegenerateFlexSolution& sol, const WattRelationReport& rep) {
  Json j;
  j["branch"] = sol.branch;
  j["bar_length"] = sol.bar_length;
  j["a"] = sol.left.a1;
  j["b"] = sol.left.b1;
  j["a_bar"] = sol.right.a1;
  j["b_bar"] = sol.right.b1;
  j["relations"] = Json::array();
  for (const auto& r : rep.relations) j["relations"].push_back({{"relation", r.name}, {"residual", r.residual}});
  j["level_residuals"] = rep.level_residuals;
  j["horizontal_d6"] = rep.horizontal_d6;
  j["max_relation"] = rep.max_relation;
  j["max_level"] = rep.max_level;
  j["ok"] = rep.ok;
  if (!rep.error.empty()) j["error"] = rep.error;
  return j;
}

inline Json trace_summary(const TraceResult& r) {
  Json j;
  const auto& rec = r.path.records;
  j["steps"] = rec.empty() ? 0 : static_cast<int>(rec.size()) - 1;
  j["s_final"] = rec.empty() ? 0.0 : rec.back().s;
  j["max_abs_D"] = r.path.max_abs_squared();
  j["truncated"] = r.truncated;
  j["reason"] = r.reason;
  return j;
}

}  // namespace rigidity

#endif  // RIGIDITY_REPORT_HPP
