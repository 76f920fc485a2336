// Shape-regular polygonal/polyhedral partitions of the unit square/cube.
//
// Provides:
//  - Mesh/Element/Face with full face connectivity, outward unit normals,
//    diameters and a simplicial sub-decomposition per element used for
//    quadrature and visualization;
//  - structured triangular/tetrahedral generators;
//  - validation of the geometric invariants (measure sums, normal lengths,
//    sub-decomposition coverage).
//
// Elements are polygons with counter-clockwise vertices in 2D and
// tetrahedra in 3D. A simplex entry stores vertex ids, where -1 denotes the
// element barycenter (used by the fan decomposition of polygons).

#ifndef STOKESLS_MESH_HPP
#define STOKESLS_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "stokesls/common.hpp"

namespace stokesls {

template <int Dim>
struct Element {
  std::vector<int> vertex_ids;
  std::vector<int> face_ids;
  VecD<Dim> barycenter = VecD<Dim>::Zero();  // collocation point x_K
  double diameter = 0.0;                     // h_K
  double measure = 0.0;
  std::vector<std::array<int, Dim + 1>> simplices;  // -1 = barycenter
};

template <int Dim>
struct Face {
  std::vector<int> vertex_ids;
  std::array<int, 2> element_ids{-1, -1};  // [1] = -1 on the boundary
  VecD<Dim> normal = VecD<Dim>::Zero();    // unit, outward from element_ids[0]
  double measure = 0.0;
  double size = 0.0;  // h_e

  bool interior() const { return element_ids[1] >= 0; }
};

template <int Dim>
struct Mesh {
  static_assert(Dim == 2 || Dim == 3);
  static constexpr int dim = Dim;

  std::vector<VecD<Dim>> vertices;
  std::vector<Element<Dim>> elements;
  std::vector<Face<Dim>> faces;
  std::vector<int> interior_face_ids;
  std::vector<int> boundary_face_ids;
  double mesh_size = 0.0;  // max element diameter

  int element_count() const { return static_cast<int>(elements.size()); }

  VecD<Dim> simplex_vertex(int elem, int local) const {
    const auto& el = elements[elem];
    return local < 0 ? el.barycenter : vertices[local];
  }

  /// Physical vertices of simplex s of element elem.
  std::array<VecD<Dim>, Dim + 1> simplex(int elem, int s) const {
    std::array<VecD<Dim>, Dim + 1> v;
    for (int i = 0; i <= Dim; ++i) v[i] = simplex_vertex(elem, elements[elem].simplices[s][i]);
    return v;
  }

  /// Face-neighbouring elements of elem.
  std::vector<int> neighbors(int elem) const {
    std::vector<int> out;
    for (int f : elements[elem].face_ids) {
      const auto& fc = faces[f];
      if (!fc.interior()) continue;
      out.push_back(fc.element_ids[0] == elem ? fc.element_ids[1] : fc.element_ids[0]);
    }
    return out;
  }
};

inline double simplex_measure(const std::array<VecD<2>, 3>& v) {
  return 0.5 * ((v[1] - v[0]).x() * (v[2] - v[0]).y() - (v[1] - v[0]).y() * (v[2] - v[0]).x());
}

inline double simplex_measure(const std::array<VecD<3>, 4>& v) {
  Eigen::Matrix3d m;
  m.col(0) = v[1] - v[0];
  m.col(1) = v[2] - v[0];
  m.col(2) = v[3] - v[0];
  return m.determinant() / 6.0;
}

namespace detail {

inline double polygon_area(const std::vector<VecD<2>>& p) {
  double a = 0.0;
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % n];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

inline VecD<2> polygon_centroid(const std::vector<VecD<2>>& p, double area) {
  VecD<2> c = VecD<2>::Zero();
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % n];
    const double w = u.x() * v.y() - v.x() * u.y();
    c += w * (u + v);
  }
  return c / (6.0 * area);
}

template <int Dim>
double max_pairwise_distance(const std::vector<int>& ids, const std::vector<VecD<Dim>>& pts) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      d2 = std::max(d2, (pts[ids[i]] - pts[ids[j]]).squaredNorm());
  return std::sqrt(d2);
}

// Fills barycenter/measure/diameter/simplices of one element.
inline void element_geometry(Mesh<2>& mesh, Element<2>& el) {
  std::vector<VecD<2>> poly;
  poly.reserve(el.vertex_ids.size());
  for (int v : el.vertex_ids) poly.push_back(mesh.vertices[v]);
  const double area = polygon_area(poly);
  check(area > 0.0, errc::degenerate,
        "element has non-positive area (vertices must be counter-clockwise)");
  el.measure = area;
  el.barycenter = polygon_centroid(poly, area);
  el.diameter = max_pairwise_distance<2>(el.vertex_ids, mesh.vertices);
  el.simplices.clear();
  const int n = static_cast<int>(el.vertex_ids.size());
  if (n == 3) {
    el.simplices.push_back({el.vertex_ids[0], el.vertex_ids[1], el.vertex_ids[2]});
  } else {
    for (int i = 0; i < n; ++i)
      el.simplices.push_back({-1, el.vertex_ids[i], el.vertex_ids[(i + 1) % n]});
  }
}

inline void element_geometry(Mesh<3>& mesh, Element<3>& el) {
  check(el.vertex_ids.size() == 4, errc::unsupported, "general polyhedra not supported in 3D");
  std::array<VecD<3>, 4> v;
  for (int i = 0; i < 4; ++i) v[i] = mesh.vertices[el.vertex_ids[i]];
  double vol = simplex_measure(v);
  if (vol < 0.0) {  // normalize orientation
    std::swap(el.vertex_ids[2], el.vertex_ids[3]);
    std::swap(v[2], v[3]);
    vol = -vol;
  }
  check(vol > 0.0, errc::degenerate, "degenerate tetrahedron (zero volume)");
  el.measure = vol;
  el.barycenter = 0.25 * (v[0] + v[1] + v[2] + v[3]);
  el.diameter = max_pairwise_distance<3>(el.vertex_ids, mesh.vertices);
  el.simplices = {{el.vertex_ids[0], el.vertex_ids[1], el.vertex_ids[2], el.vertex_ids[3]}};
}

// Boundary facets of one element, each with vertices ordered so that the
// induced normal points outward.
inline std::vector<std::vector<int>> element_facets(const Element<2>& el) {
  std::vector<std::vector<int>> facets;
  const int n = static_cast<int>(el.vertex_ids.size());
  for (int i = 0; i < n; ++i)
    facets.push_back({el.vertex_ids[i], el.vertex_ids[(i + 1) % n]});
  return facets;
}

inline std::vector<std::vector<int>> element_facets(const Element<3>& el) {
  const auto& v = el.vertex_ids;
  // Faces of a positively oriented tetrahedron, outward orientation.
  return {{v[0], v[2], v[1]}, {v[0], v[1], v[3]}, {v[1], v[2], v[3]}, {v[0], v[3], v[2]}};
}

inline void face_geometry(const Mesh<2>& mesh, Face<2>& f) {
  const VecD<2> a = mesh.vertices[f.vertex_ids[0]];
  const VecD<2> b = mesh.vertices[f.vertex_ids[1]];
  const VecD<2> t = b - a;
  f.measure = t.norm();
  f.size = f.measure;
  check(f.measure > 0.0, errc::degenerate, "zero-length face");
  // For counter-clockwise element orientation the outward normal of edge
  // (a,b) is the clockwise rotation of the tangent.
  f.normal = VecD<2>(t.y(), -t.x()) / f.measure;
}

inline void face_geometry(const Mesh<3>& mesh, Face<3>& f) {
  const VecD<3> a = mesh.vertices[f.vertex_ids[0]];
  const VecD<3> b = mesh.vertices[f.vertex_ids[1]];
  const VecD<3> c = mesh.vertices[f.vertex_ids[2]];
  const VecD<3> n = (b - a).cross(c - a);
  const double n2 = n.norm();
  check(n2 > 0.0, errc::degenerate, "degenerate triangular face");
  f.measure = 0.5 * n2;
  f.normal = n / n2;
  f.size = max_pairwise_distance<3>(f.vertex_ids, mesh.vertices);
}

}  // namespace detail

/// Derives faces, connectivity and all geometric data from vertex lists.
/// Assumes elements[*].vertex_ids are filled; everything else is computed.
template <int Dim>
void finalize_mesh(Mesh<Dim>& mesh) {
  const int ne = mesh.element_count();
  check(ne > 0, errc::parse, "mesh has no elements");
  for (auto& el : mesh.elements) {
    for (int v : el.vertex_ids)
      check(v >= 0 && v < static_cast<int>(mesh.vertices.size()), errc::parse,
            "element references a missing vertex id");
    detail::element_geometry(mesh, el);
  }

  // Face identification by sorted vertex key. The first element to touch a
  // face fixes its orientation.
  std::map<std::vector<int>, int> face_of;
  mesh.faces.clear();
  for (int e = 0; e < ne; ++e) {
    auto& el = mesh.elements[e];
    el.face_ids.clear();
    for (auto& facet : detail::element_facets(el)) {
      std::vector<int> key = facet;
      std::sort(key.begin(), key.end());
      auto it = face_of.find(key);
      if (it == face_of.end()) {
        Face<Dim> f;
        f.vertex_ids = facet;
        f.element_ids = {e, -1};
        detail::face_geometry(mesh, f);
        face_of.emplace(std::move(key), static_cast<int>(mesh.faces.size()));
        el.face_ids.push_back(static_cast<int>(mesh.faces.size()));
        mesh.faces.push_back(std::move(f));
      } else {
        Face<Dim>& f = mesh.faces[it->second];
        check(f.element_ids[1] < 0, errc::topology, "face shared by more than two elements");
        f.element_ids[1] = e;
        el.face_ids.push_back(it->second);
      }
    }
  }

  // Deterministic orientation: the "+" side of an interior face is the
  // lower element index.
  mesh.interior_face_ids.clear();
  mesh.boundary_face_ids.clear();
  for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f) {
    Face<Dim>& fc = mesh.faces[f];
    if (fc.interior()) {
      if (fc.element_ids[0] > fc.element_ids[1]) {
        std::swap(fc.element_ids[0], fc.element_ids[1]);
        fc.normal = -fc.normal;
      }
      mesh.interior_face_ids.push_back(f);
    } else {
      mesh.boundary_face_ids.push_back(f);
    }
  }

  mesh.mesh_size = 0.0;
  for (const auto& el : mesh.elements) mesh.mesh_size = std::max(mesh.mesh_size, el.diameter);
}

/// Adjacent elements and unit normal of an interior face, oriented outward
/// from the first ("+") element, which is the lower element index.
template <int Dim>
std::tuple<int, int, VecD<Dim>> face_trace_pair(const Mesh<Dim>& mesh, int face_id) {
  check(face_id >= 0 && face_id < static_cast<int>(mesh.faces.size()), errc::config,
        "face id out of range");
  const Face<Dim>& f = mesh.faces[face_id];
  check(f.interior(), errc::config, "face_trace_pair called on a boundary face");
  return {f.element_ids[0], f.element_ids[1], f.normal};
}

/// Uniform n x n grid of squares split into two triangles each (2n^2
/// elements on the unit square).
inline Mesh<2> generate_structured_2d(int n) {
  check(n >= 1, errc::config, "subdivision count must be >= 1");
  Mesh<2> mesh;
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) mesh.vertices.push_back(VecD<2>(i * h, j * h));
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      Element<2> a, b;
      a.vertex_ids = {v00, v10, v11};
      b.vertex_ids = {v00, v11, v01};
      mesh.elements.push_back(std::move(a));
      mesh.elements.push_back(std::move(b));
    }
  finalize_mesh(mesh);
  return mesh;
}

/// Uniform n x n x n grid of cubes, each split into six tetrahedra around
/// the main diagonal (6n^3 elements on the unit cube).
inline Mesh<3> generate_structured_3d(int n) {
  check(n >= 1, errc::config, "subdivision count must be >= 1");
  Mesh<3> mesh;
  const double h = 1.0 / n;
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) mesh.vertices.push_back(VecD<3>(i * h, j * h, k * h));
  auto vid = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
  // Kuhn split: walk the cube from corner 000 to 111 along each of the six
  // axis permutations; all tetrahedra share the main diagonal.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          Element<3> el;
          el.vertex_ids.push_back(vid(c[0], c[1], c[2]));
          for (int s = 0; s < 3; ++s) {
            c[p[s]] += 1;
            el.vertex_ids.push_back(vid(c[0], c[1], c[2]));
          }
          mesh.elements.push_back(std::move(el));
        }
  finalize_mesh(mesh);
  return mesh;
}

template <int Dim>
Mesh<Dim> generate_structured(int n);
template <>
inline Mesh<2> generate_structured<2>(int n) { return generate_structured_2d(n); }
template <>
inline Mesh<3> generate_structured<3>(int n) { return generate_structured_3d(n); }

/// Checks the geometric invariants; throws on hard violations and returns
/// warnings (e.g. the M1 regularity bound) for ingested meshes.
template <int Dim>
std::vector<std::string> validate_mesh(const Mesh<Dim>& mesh, double sigma_v = 0.0) {
  std::vector<std::string> warnings;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    double cover = 0.0;
    for (int s = 0; s < static_cast<int>(el.simplices.size()); ++s) {
      const double ms = simplex_measure(mesh.simplex(e, s));
      check(ms > 0.0, errc::degenerate,
            "negative simplex in sub-decomposition of element " + std::to_string(e));
      cover += ms;
    }
    check(std::abs(cover - el.measure) <= 1e-12 * el.measure, errc::degenerate,
          "sub-decomposition does not cover element " + std::to_string(e));
  }
  for (const auto& f : mesh.faces) {
    check(std::abs(f.normal.norm() - 1.0) <= 1e-14, errc::internal, "face normal not unit length");
    if (sigma_v > 0.0) {
      for (int side = 0; side < 2; ++side) {
        const int e = f.element_ids[side];
        if (e < 0) continue;
        if (sigma_v * mesh.elements[e].diameter > f.size) {
          warnings.push_back("regularity M1 violated: face size " + std::to_string(f.size) +
                             " < sigma_v * h_K for element " + std::to_string(e));
        }
      }
    }
  }
  return warnings;
}

/// Total measure of the partition.
template <int Dim>
double total_measure(const Mesh<Dim>& mesh) {
  double s = 0.0;
  for (const auto& el : mesh.elements) s += el.measure;
  return s;
}

}  // namespace stokesls

#endif
