#ifndef RIGIDITY_FIXTURES_HPP
#define RIGIDITY_FIXTURES_HPP

#include <cmath>
#include <string>

#include "rigidity/framework.hpp"

namespace rigidity {

/// Unit equilateral triangle with its base pinned. First-order rigid.
inline Framework make_triangle() {
  FrameworkDescription d;
  d.dimension = 2;
  d.vertices = {{"A", {0.0, 0.0}, true}, {"B", {1.0, 0.0}, true}, {"C", {0.5, std::sqrt(3.0) / 2.0}, false}};
  d.edges = {{"A", "B", {}}, {"B", "C", {}}, {"C", "A", {}}};
  return build_framework(d);
}

/// A(0,0) - B(1,0) - C(2,0) with both ends pinned. First-order flexible
/// (B moves vertically), second-order rigid.
inline Framework make_collinear_chain() {
  FrameworkDescription d;
  d.dimension = 2;
  d.vertices = {{"A", {0.0, 0.0}, true}, {"B", {1.0, 0.0}, false}, {"C", {2.0, 0.0}, true}};
  d.edges = {{"A", "B", {}}, {"B", "C", {}}};
  return build_framework(d);
}

/// Square four-bar linkage, ground link A-D pinned. One-degree-of-freedom mechanism.
inline Framework make_fourbar() {
  FrameworkDescription d;
  d.dimension = 2;
  d.vertices = {{"A", {0.0, 0.0}, true}, {"B", {0.0, 1.0}, false}, {"C", {1.0, 1.0}, false}, {"D", {1.0, 0.0}, true}};
  d.edges = {{"A", "B", {}}, {"B", "C", {}}, {"C", "D", {}}};
  return build_framework(d);
}

/// Two Watt linkages whose coupler midpoints are joined by a horizontal bar.
///
/// Left linkage: pinned centers o1 = (-1,0), o2 = (2,1); unit radius bars to
/// p1 = (0,0) and p2 = (1,1); coupler p1-p2 with midpoint q tied by two
/// collinear half bars. The coupler is braced into a rigid body by an apex
/// w = (0,1) barred to p1, p2 and q. The right linkage is the mirror image
/// through x = 0.5 + L/2 (vertex ids suffixed with "b"), and q-qb has
/// length L. The default L = 4 keeps all vertices apart; L = 1 lets some
/// coincide geometrically.
inline Framework make_double_watt(double bar_length = 4.0) {
  const double mirror = 0.5 + bar_length / 2.0;
  struct Pt {
    const char* id;
    double x, y;
    bool pinned;
  };
  const Pt left[] = {{"o1", -1.0, 0.0, true}, {"p1", 0.0, 0.0, false}, {"q", 0.5, 0.5, false},
                     {"p2", 1.0, 1.0, false}, {"o2", 2.0, 1.0, true},  {"w", 0.0, 1.0, false}};
  FrameworkDescription d;
  d.dimension = 2;
  for (const auto& p : left) d.vertices.push_back({p.id, {p.x, p.y}, p.pinned});
  for (const auto& p : left) d.vertices.push_back({std::string(p.id) + "b", {2.0 * mirror - p.x, p.y}, p.pinned});
  for (const char* suffix : {"", "b"}) {
    const std::string s = suffix;
    d.edges.push_back({"o1" + s, "p1" + s, {}});
    d.edges.push_back({"p1" + s, "p2" + s, {}});
    d.edges.push_back({"o2" + s, "p2" + s, {}});
    d.edges.push_back({"p1" + s, "q" + s, {}});
    d.edges.push_back({"q" + s, "p2" + s, {}});
    d.edges.push_back({"w" + s, "p1" + s, {}});
    d.edges.push_back({"w" + s, "p2" + s, {}});
    d.edges.push_back({"w" + s, "q" + s, {}});
  }
  d.edges.push_back({"q", "qb", {}});
  return build_framework(d);
}

}  // namespace rigidity

#endif  // RIGIDITY_FIXTURES_HPP
