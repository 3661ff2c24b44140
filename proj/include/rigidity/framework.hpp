#ifndef RIGIDITY_FRAMEWORK_HPP
#define RIGIDITY_FRAMEWORK_HPP

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/linalg.hpp"

namespace rigidity {

/// Kinds of framework validation failure. Each is reported separately.
enum class ViolationKind {
  schema,
  duplicate_vertex,
  duplicate_edge,
  dangling_vertex,
  self_loop,
  nonpositive_length,
  insufficient_pins,
};

inline const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::schema: return "schema";
    case ViolationKind::duplicate_vertex: return "duplicate vertex";
    case ViolationKind::duplicate_edge: return "duplicate edge";
    case ViolationKind::dangling_vertex: return "dangling vertex id";
    case ViolationKind::self_loop: return "self loop";
    case ViolationKind::nonpositive_length: return "nonpositive length";
    case ViolationKind::insufficient_pins: return "insufficient pins";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::string message;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

  bool has(ViolationKind kind) const {
    for (const auto& v : violations_)
      if (v.kind == kind) return true;
    return false;
  }

 private:
  static std::string summarize(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
      if (i) os << '\n';
      os << to_string(violations[i].kind) << ": " << violations[i].message;
    }
    return os.str();
  }

  std::vector<Violation> violations_;
};

/// Thrown when a vector does not match the framework's free-coordinate layout.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unvalidated input, as read from JSON or assembled by a fixture.
struct VertexSpec {
  std::string id;
  std::vector<double> coords;
  bool pinned = false;
};

struct EdgeSpec {
  std::string u;
  std::string v;
  std::optional<double> length;
};

struct FrameworkDescription {
  int dimension = 2;
  std::vector<VertexSpec> vertices;
  std::vector<EdgeSpec> edges;
};

/// Stacked coordinates of the free (unpinned) vertices, in vertex
/// declaration order and x, y(, z) within a vertex.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(Vector values) : values_(std::move(values)) {}

  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

struct Vertex {
  std::string id;
  Vector rest;
  bool pinned = false;
  int free_offset = -1;  // first column in the free-coordinate layout, -1 if pinned
};

struct Edge {
  int u = 0;
  int v = 0;
  double length = 0.0;
};

class Framework {
 public:
  int dimension() const noexcept { return dimension_; }
  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  Eigen::Index vertex_count() const noexcept { return static_cast<Eigen::Index>(vertices_.size()); }
  Eigen::Index edge_count() const noexcept { return static_cast<Eigen::Index>(edges_.size()); }
  Eigen::Index free_coordinate_count() const noexcept { return free_coords_; }
  Eigen::Index free_vertex_count() const noexcept { return free_coords_ / dimension_; }
  Eigen::Index pinned_count() const noexcept { return vertex_count() - free_vertex_count(); }

  /// Non-fatal diagnostics, e.g. explicit lengths that prestress the rest pose.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  const Configuration& rest() const noexcept { return rest_; }

  /// 1 + |X0|^2, the unit for every feasibility tolerance.
  double scale() const noexcept { return 1.0 + rest_.values().squaredNorm(); }

  std::optional<int> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Column of coordinate `axis` of vertex `vertex` in the free layout, or -1.
  int free_column(int vertex, int axis) const {
    const int off = vertices_[static_cast<std::size_t>(vertex)].free_offset;
    return off < 0 ? -1 : off + axis;
  }

  void require_layout(const Vector& v, const char* what) const {
    if (v.size() != free_coords_) {
      std::ostringstream os;
      os << "dimension mismatch: " << what << " has " << v.size() << " entries, framework has "
         << free_coords_ << " free coordinates";
      throw DimensionMismatch(os.str());
    }
  }

  friend Framework build_framework(const FrameworkDescription& desc);

 private:
  int dimension_ = 2;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::map<std::string, int> index_;
  Eigen::Index free_coords_ = 0;
  Configuration rest_;
  std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// Embedding between the free layout and full per-vertex coordinates.

/// Full V x d coordinates; pinned vertices held at rest.
inline Matrix embed(const Framework& f, const Configuration& x) {
  f.require_layout(x.values(), "configuration");
  const int d = f.dimension();
  Matrix full(f.vertex_count(), d);
  for (Eigen::Index i = 0; i < f.vertex_count(); ++i) {
    const auto& v = f.vertices()[static_cast<std::size_t>(i)];
    if (v.pinned)
      full.row(i) = v.rest.transpose();
    else
      full.row(i) = x.values().segment(v.free_offset, d).transpose();
  }
  return full;
}

/// Full V x d velocities/derivatives; pinned vertices have zero derivative.
inline Matrix embed_derivative(const Framework& f, const Vector& dx) {
  f.require_layout(dx, "derivative");
  const int d = f.dimension();
  Matrix full = Matrix::Zero(f.vertex_count(), d);
  for (Eigen::Index i = 0; i < f.vertex_count(); ++i) {
    const auto& v = f.vertices()[static_cast<std::size_t>(i)];
    if (!v.pinned) full.row(i) = dx.segment(v.free_offset, d).transpose();
  }
  return full;
}

inline Configuration restrict_to_free(const Framework& f, const Matrix& full) {
  if (full.rows() != f.vertex_count() || full.cols() != f.dimension())
    throw DimensionMismatch("dimension mismatch: full coordinate block has wrong shape");
  const int d = f.dimension();
  Vector x(f.free_coordinate_count());
  for (Eigen::Index i = 0; i < f.vertex_count(); ++i) {
    const auto& v = f.vertices()[static_cast<std::size_t>(i)];
    if (!v.pinned) x.segment(v.free_offset, d) = full.row(i).transpose();
  }
  return Configuration(std::move(x));
}

/// Row e holds x_u - x_v for edge e.
inline Matrix edge_differences(const Framework& f, const Matrix& full) {
  Matrix diff(f.edge_count(), f.dimension());
  for (Eigen::Index e = 0; e < f.edge_count(); ++e) {
    const auto& edge = f.edges()[static_cast<std::size_t>(e)];
    diff.row(e) = full.row(edge.u) - full.row(edge.v);
  }
  return diff;
}

// ---------------------------------------------------------------------------
// Constraint map.

/// Per-edge elongation in squared form D_e = |x_u - x_v|^2 - l^2 and
/// linear form d_e = |x_u - x_v| - l. D_e = (|x_u - x_v| + l) d_e.
struct ElongationVector {
  Vector squared;
  Vector linear;

  double max_abs_squared() const { return squared.size() ? squared.cwiseAbs().maxCoeff() : 0.0; }
  double max_abs_linear() const { return linear.size() ? linear.cwiseAbs().maxCoeff() : 0.0; }
};

inline ElongationVector squared_elongation(const Framework& f, const Configuration& x) {
  const Matrix diff = edge_differences(f, embed(f, x));
  ElongationVector out{Vector(f.edge_count()), Vector(f.edge_count())};
  for (Eigen::Index e = 0; e < f.edge_count(); ++e) {
    const double len = f.edges()[static_cast<std::size_t>(e)].length;
    const double sq = diff.row(e).squaredNorm();
    out.squared(e) = sq - len * len;
    // Divided form avoids the cancellation in |x_u - x_v| - l.
    out.linear(e) = out.squared(e) / (std::sqrt(sq) + len);
  }
  return out;
}

/// Jacobian of D: row e has 2(x_u - x_v)^T in u's free columns and the
/// negation in v's.
inline Matrix rigidity_matrix(const Framework& f, const Configuration& x) {
  const Matrix diff = edge_differences(f, embed(f, x));
  const int d = f.dimension();
  Matrix r = Matrix::Zero(f.edge_count(), f.free_coordinate_count());
  for (Eigen::Index e = 0; e < f.edge_count(); ++e) {
    const auto& edge = f.edges()[static_cast<std::size_t>(e)];
    const auto& vu = f.vertices()[static_cast<std::size_t>(edge.u)];
    const auto& vv = f.vertices()[static_cast<std::size_t>(edge.v)];
    if (!vu.pinned) r.block(e, vu.free_offset, 1, d) = 2.0 * diff.row(e);
    if (!vv.pinned) r.block(e, vv.free_offset, 1, d) = -2.0 * diff.row(e);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Construction and validation.

namespace detail {

// Infinitesimal rigid motions of the listed vertices (translations, then
// rotations about their centroid), one column per motion, rows in
// (vertex, axis) order.
inline Matrix rigid_motion_basis(const std::vector<Vector>& points, int d) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Vector centroid = Vector::Zero(d);
  for (const auto& p : points) centroid += p;
  if (n > 0) centroid /= static_cast<double>(n);
  const int rotations = d * (d - 1) / 2;
  Matrix basis = Matrix::Zero(n * d, d + rotations);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector r = points[static_cast<std::size_t>(i)] - centroid;
    for (int a = 0; a < d; ++a) basis(i * d + a, a) = 1.0;
    if (d == 2) {
      basis(i * d + 0, 2) = -r(1);
      basis(i * d + 1, 2) = r(0);
    } else {
      // e_k x r for k = x, y, z
      basis(i * d + 1, 3) = -r(2);
      basis(i * d + 2, 3) = r(1);
      basis(i * d + 0, 4) = r(2);
      basis(i * d + 2, 4) = -r(0);
      basis(i * d + 0, 5) = -r(1);
      basis(i * d + 1, 5) = r(0);
    }
  }
  return basis;
}

inline std::vector<std::vector<int>> connected_components(int vertex_count, const std::vector<Edge>& edges) {
  std::vector<int> parent(static_cast<std::size_t>(vertex_count));
  for (int i = 0; i < vertex_count; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& e : edges) parent[static_cast<std::size_t>(find(e.u))] = find(e.v);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < vertex_count; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

// A component is insufficiently pinned when some rigid motion of it fixes
// every pinned vertex yet moves a free one; such a motion lies in the
// rigidity-matrix nullspace.
inline std::optional<std::string> find_unpinned_motion(const Framework& f, const Matrix& r) {
  const int d = f.dimension();
  for (const auto& comp : connected_components(static_cast<int>(f.vertex_count()), f.edges())) {
    std::vector<Vector> points;
    std::vector<int> pinned_rows;
    bool any_free = false;
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const auto& v = f.vertices()[static_cast<std::size_t>(comp[k])];
      points.push_back(v.rest);
      if (v.pinned) pinned_rows.push_back(static_cast<int>(k));
      else any_free = true;
    }
    if (!any_free) continue;
    const Matrix basis = rigid_motion_basis(points, d);
    Matrix at_pins(static_cast<Eigen::Index>(pinned_rows.size()) * d, basis.cols());
    for (std::size_t k = 0; k < pinned_rows.size(); ++k)
      at_pins.middleRows(static_cast<Eigen::Index>(k) * d, d) = basis.middleRows(pinned_rows[k] * d, d);
    const Matrix fixing = pinned_rows.empty() ? Matrix::Identity(basis.cols(), basis.cols())
                                              : spectral_split(at_pins, 1e-9).nullspace;
    if (fixing.cols() == 0) continue;

    // Restrict the pin-fixing motions to free coordinates of the whole framework.
    Matrix motions = Matrix::Zero(f.free_coordinate_count(), fixing.cols());
    const Matrix full_motion = basis * fixing;
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const auto& v = f.vertices()[static_cast<std::size_t>(comp[k])];
      if (!v.pinned) motions.middleRows(v.free_offset, d) = full_motion.middleRows(static_cast<Eigen::Index>(k) * d, d);
    }
    // Any unit combination q of these motions with |R q| < 1e-9 is a rigid motion
    // the bars cannot see.
    const Eigen::JacobiSVD<Matrix> range(motions, Eigen::ComputeThinU);
    const Vector& sv = range.singularValues();
    Eigen::Index kept = 0;
    while (kept < sv.size() && sv(kept) > 1e-9 * std::max(1.0, sv(0))) ++kept;
    if (kept == 0) continue;
    const Matrix q = range.matrixU().leftCols(kept);
    const Vector seen = Eigen::JacobiSVD<Matrix>(r * q).singularValues();
    const double weakest = seen.size() < kept ? 0.0 : seen(kept - 1);
    if (weakest < 1e-9) {
      std::string first_free;
      for (int idx : comp) {
        if (!f.vertices()[static_cast<std::size_t>(idx)].pinned) {
          first_free = f.vertices()[static_cast<std::size_t>(idx)].id;
          break;
        }
      }
      return "component containing vertex '" + first_free + "' admits a rigid-body motion";
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Validates a description and returns the immutable framework. All
/// violations found are reported together in one ValidationError.
inline Framework build_framework(const FrameworkDescription& desc) {
  std::vector<Violation> bad;
  if (desc.dimension != 2 && desc.dimension != 3) {
    bad.push_back({ViolationKind::schema, "dimension must be 2 or 3, got " + std::to_string(desc.dimension)});
    throw ValidationError(std::move(bad));
  }
  const int d = desc.dimension;

  Framework f;
  f.dimension_ = d;
  for (std::size_t i = 0; i < desc.vertices.size(); ++i) {
    const auto& vs = desc.vertices[i];
    if (vs.coords.size() != static_cast<std::size_t>(d)) {
      bad.push_back({ViolationKind::schema, "vertex '" + vs.id + "' has " + std::to_string(vs.coords.size()) +
                                                " coordinates, expected " + std::to_string(d)});
      continue;
    }
    bool finite = true;
    for (double c : vs.coords) finite = finite && std::isfinite(c);
    if (!finite) {
      bad.push_back({ViolationKind::schema, "vertex '" + vs.id + "' has non-finite coordinates"});
      continue;
    }
    if (f.index_.count(vs.id)) {
      bad.push_back({ViolationKind::duplicate_vertex, "vertex id '" + vs.id + "' declared twice"});
      continue;
    }
    Vertex v;
    v.id = vs.id;
    v.rest = Eigen::Map<const Vector>(vs.coords.data(), d);
    v.pinned = vs.pinned;
    f.index_[vs.id] = static_cast<int>(f.vertices_.size());
    f.vertices_.push_back(std::move(v));
  }

  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < desc.edges.size(); ++k) {
    const auto& es = desc.edges[k];
    const std::string name = "edge " + std::to_string(k) + " (" + es.u + "-" + es.v + ")";
    auto iu = f.index_of(es.u);
    auto iv = f.index_of(es.v);
    if (!iu || !iv) {
      const std::string& missing = !iu ? es.u : es.v;
      bad.push_back({ViolationKind::dangling_vertex, name + " references unknown vertex '" + missing + "'"});
      continue;
    }
    if (*iu == *iv) {
      bad.push_back({ViolationKind::self_loop, name + " joins a vertex to itself"});
      continue;
    }
    const auto key = std::minmax(*iu, *iv);
    if (!seen.insert(key).second) {
      bad.push_back({ViolationKind::duplicate_edge, name + " repeats an earlier edge"});
      continue;
    }
    const double rest_dist = (f.vertices_[static_cast<std::size_t>(*iu)].rest -
                              f.vertices_[static_cast<std::size_t>(*iv)].rest).norm();
    const double len = es.length.value_or(rest_dist);
    if (!(len > 0.0) || !std::isfinite(len)) {
      bad.push_back({ViolationKind::nonpositive_length, name + " has length " + std::to_string(len)});
      continue;
    }
    f.edges_.push_back({*iu, *iv, len});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  Eigen::Index offset = 0;
  bool any_pinned = false;
  for (auto& v : f.vertices_) {
    if (v.pinned) {
      any_pinned = true;
    } else {
      v.free_offset = static_cast<int>(offset);
      offset += d;
    }
  }
  f.free_coords_ = offset;
  Matrix full(f.vertex_count(), d);
  for (Eigen::Index i = 0; i < f.vertex_count(); ++i) full.row(i) = f.vertices_[static_cast<std::size_t>(i)].rest.transpose();
  f.rest_ = restrict_to_free(f, full);

  if (!any_pinned) {
    throw ValidationError({{ViolationKind::insufficient_pins, "no vertex is pinned"}});
  }
  if (auto why = detail::find_unpinned_motion(f, rigidity_matrix(f, f.rest_))) {
    throw ValidationError({{ViolationKind::insufficient_pins, *why}});
  }

  const double defect = squared_elongation(f, f.rest_).max_abs_squared();
  if (defect > 1e-9) {
    std::ostringstream os;
    os << "rest configuration is prestressed: max |D_e| = " << defect;
    f.warnings_.push_back(os.str());
  }
  return f;
}

/// Round-trips a validated framework back to its description.
inline FrameworkDescription describe(const Framework& f) {
  FrameworkDescription desc;
  desc.dimension = f.dimension();
  for (const auto& v : f.vertices()) {
    desc.vertices.push_back({v.id, std::vector<double>(v.rest.data(), v.rest.data() + v.rest.size()), v.pinned});
  }
  for (const auto& e : f.edges()) {
    desc.edges.push_back({f.vertices()[static_cast<std::size_t>(e.u)].id, f.vertices()[static_cast<std::size_t>(e.v)].id, e.length});
  }
  return desc;
}

}  // namespace rigidity

#endif  // RIGIDITY_FRAMEWORK_HPP
