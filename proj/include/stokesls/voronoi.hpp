// Lloyd-relaxed clipped Voronoi meshes on the unit square.
//
// Used to produce the polygonal test meshes (the published experiments use
// externally generated centroidal Voronoi meshes; this internal generator
// creates small instances of the same flavour). Each cell is computed by
// half-plane clipping of the unit square against the bisectors of all other
// sites, which is plenty fast for the mesh sizes used in tests.

#ifndef STOKESLS_VORONOI_HPP
#define STOKESLS_VORONOI_HPP

#include <cstdint>
#include <random>
#include <unordered_map>

#include "stokesls/mesh.hpp"

namespace stokesls {

namespace detail {

// Sutherland-Hodgman clip of a convex polygon against n.(x - p0) <= 0.
inline std::vector<VecD<2>> clip_halfplane(const std::vector<VecD<2>>& poly, const VecD<2>& p0,
                                           const VecD<2>& n) {
  std::vector<VecD<2>> out;
  const int k = static_cast<int>(poly.size());
  for (int i = 0; i < k; ++i) {
    const VecD<2>& a = poly[i];
    const VecD<2>& b = poly[(i + 1) % k];
    const double da = n.dot(a - p0);
    const double db = n.dot(b - p0);
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0))
      out.push_back(a + (da / (da - db)) * (b - a));
  }
  return out;
}

inline std::vector<VecD<2>> voronoi_cell(const std::vector<VecD<2>>& sites, int i) {
  std::vector<VecD<2>> cell = {VecD<2>(0, 0), VecD<2>(1, 0), VecD<2>(1, 1), VecD<2>(0, 1)};
  for (int j = 0; j < static_cast<int>(sites.size()) && !cell.empty(); ++j) {
    if (j == i) continue;
    const VecD<2> mid = 0.5 * (sites[i] + sites[j]);
    const VecD<2> n = sites[j] - sites[i];
    cell = clip_halfplane(cell, mid, n);
  }
  return cell;
}

}  // namespace detail

/// Centroidal Voronoi tessellation of the unit square with the requested
/// number of cells. Deterministic for a fixed seed.
inline Mesh<2> generate_polygonal_cvt(int cells, unsigned seed = 1, int lloyd_iterations = 80) {
  check(cells >= 2, errc::config, "polygonal mesh needs at least 2 cells");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  std::vector<VecD<2>> sites(cells);
  for (auto& s : sites) s = VecD<2>(unif(rng), unif(rng));

  std::vector<std::vector<VecD<2>>> polys(cells);
  for (int it = 0; it <= lloyd_iterations; ++it) {
    for (int i = 0; i < cells; ++i) {
      polys[i] = detail::voronoi_cell(sites, i);
      check(polys[i].size() >= 3, errc::degenerate, "empty Voronoi cell during relaxation");
    }
    if (it == lloyd_iterations) break;
    for (int i = 0; i < cells; ++i) {
      const double a = detail::polygon_area(polys[i]);
      sites[i] = detail::polygon_centroid(polys[i], a);
    }
  }

  // Weld cell corners into a conforming vertex list. Coincident corners of
  // neighbouring cells agree up to rounding, far below the weld tolerance.
  // Spatial hash with neighbour probing so points straddling a bucket
  // boundary still merge.
  Mesh<2> mesh;
  const double tol = 1e-9;
  const double cell_w = 4.0 * tol;
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  auto bucket = [&](double x, double y) {
    return (static_cast<std::int64_t>(std::floor(x / cell_w)) << 32) ^
           (static_cast<std::int64_t>(std::floor(y / cell_w)) & 0xffffffffll);
  };
  auto find_or_add = [&](const VecD<2>& p) {
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        auto it = grid.find(bucket(p.x() + di * cell_w, p.y() + dj * cell_w));
        if (it == grid.end()) continue;
        for (int v : it->second)
          if ((mesh.vertices[v] - p).norm() <= tol) return v;
      }
    mesh.vertices.push_back(p);
    const int v = static_cast<int>(mesh.vertices.size()) - 1;
    grid[bucket(p.x(), p.y())].push_back(v);
    return v;
  };
  for (int i = 0; i < cells; ++i) {
    Element<2> el;
    for (const auto& p : polys[i]) {
      const int v = find_or_add(p);
      if (el.vertex_ids.empty() || (el.vertex_ids.back() != v && el.vertex_ids.front() != v))
        el.vertex_ids.push_back(v);
    }
    check(el.vertex_ids.size() >= 3, errc::degenerate, "degenerate Voronoi cell");
    mesh.elements.push_back(std::move(el));
  }
  finalize_mesh(mesh);
  return mesh;
}

}  // namespace stokesls

#endif
