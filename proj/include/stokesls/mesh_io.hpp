// ASCII mesh ingestion and output.
//
// Format: first non-comment line is `dim nv ne`; the next nv lines hold
// vertex coordinates; the next ne lines hold `k v0 v1 ... v(k-1)` with
// counter-clockwise vertex order in 2D and tetrahedra (k = 4) in 3D.
// Lines starting with '#' are comments.

#ifndef STOKESLS_MESH_IO_HPP
#define STOKESLS_MESH_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "stokesls/mesh.hpp"

namespace stokesls {

namespace detail {

inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace detail

template <int Dim>
Mesh<Dim> load_mesh(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), errc::io, "cannot open mesh file: " + path);
  std::string line;
  check(detail::next_data_line(in, line), errc::parse, "empty mesh file: " + path);

  int dim = 0, nv = 0, ne = 0;
  {
    std::istringstream hs(line);
    check(static_cast<bool>(hs >> dim >> nv >> ne), errc::parse, "malformed mesh header");
  }
  check(dim == Dim, errc::parse,
        "mesh file dimension " + std::to_string(dim) + " does not match requested " +
            std::to_string(Dim));
  check(nv > 0 && ne > 0, errc::parse, "mesh must have vertices and elements");

  Mesh<Dim> mesh;
  mesh.vertices.reserve(nv);
  for (int v = 0; v < nv; ++v) {
    check(detail::next_data_line(in, line), errc::parse, "unexpected end of vertex list");
    std::istringstream vs(line);
    VecD<Dim> p;
    for (int d = 0; d < Dim; ++d)
      check(static_cast<bool>(vs >> p[d]), errc::parse,
            "malformed vertex line " + std::to_string(v));
    mesh.vertices.push_back(p);
  }
  mesh.elements.reserve(ne);
  for (int e = 0; e < ne; ++e) {
    check(detail::next_data_line(in, line), errc::parse, "unexpected end of element list");
    std::istringstream es(line);
    int k = 0;
    check(static_cast<bool>(es >> k), errc::parse, "malformed element line " + std::to_string(e));
    check(k >= Dim + 1, errc::parse, "element with too few vertices");
    if constexpr (Dim == 3)
      check(k == 4, errc::unsupported, "3D ingestion is restricted to tetrahedra");
    Element<Dim> el;
    el.vertex_ids.resize(k);
    for (int i = 0; i < k; ++i)
      check(static_cast<bool>(es >> el.vertex_ids[i]), errc::parse,
            "malformed element line " + std::to_string(e));
    mesh.elements.push_back(std::move(el));
  }
  finalize_mesh(mesh);
  validate_mesh(mesh, /*sigma_v=*/0.0);
  return mesh;
}

template <int Dim>
void save_mesh(const Mesh<Dim>& mesh, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), errc::io, "cannot write mesh file: " + path);
  out.precision(17);
  out << "# stokesls mesh\n";
  out << Dim << " " << mesh.vertices.size() << " " << mesh.elements.size() << "\n";
  for (const auto& v : mesh.vertices) {
    for (int d = 0; d < Dim; ++d) out << (d ? " " : "") << v[d];
    out << "\n";
  }
  for (const auto& el : mesh.elements) {
    out << el.vertex_ids.size();
    for (int v : el.vertex_ids) out << " " << v;
    out << "\n";
  }
}

}  // namespace stokesls

#endif
