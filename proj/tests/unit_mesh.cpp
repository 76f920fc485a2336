#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "stokesls/mesh.hpp"
#include "stokesls/mesh_io.hpp"
#include "stokesls/voronoi.hpp"

using namespace stokesls;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("two-triangle unit square") {
  const auto path = write_temp("two_tri.msh",
                               "# unit square\n"
                               "2 4 2\n"
                               "0 0\n1 0\n1 1\n0 1\n"
                               "3 0 1 2\n"
                               "3 0 2 3\n");
  const auto mesh = load_mesh<2>(path);
  CHECK(mesh.element_count() == 2);
  CHECK(mesh.faces.size() == 5);
  CHECK(mesh.boundary_face_ids.size() == 4);
  CHECK(mesh.interior_face_ids.size() == 1);
  CHECK(total_measure(mesh) == Catch::Approx(1.0).margin(1e-14));

  // Interior face: deterministic orientation, + side is the lower index.
  const auto [ep, em, n] = face_trace_pair(mesh, mesh.interior_face_ids[0]);
  CHECK(ep == 0);
  CHECK(em == 1);
  CHECK(n.norm() == Catch::Approx(1.0).margin(1e-14));
  // Normal points from element 0 into element 1.
  const VecD<2> d = mesh.elements[1].barycenter - mesh.elements[0].barycenter;
  CHECK(n.dot(d) > 0.0);

  CHECK_THROWS_AS(face_trace_pair(mesh, mesh.boundary_face_ids[0]), error);
}

TEST_CASE("missing vertex id is a parse failure") {
  const auto path = write_temp("bad_vertex.msh",
                               "2 3 1\n"
                               "0 0\n1 0\n0 1\n"
                               "3 0 1 7\n");
  CHECK_THROWS_AS(load_mesh<2>(path), error);
}

TEST_CASE("dimension mismatch is a parse failure") {
  const auto path = write_temp("bad_dim.msh", "3 3 1\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK_THROWS_AS(load_mesh<2>(path), error);
}

TEST_CASE("structured 2d mesh") {
  const auto mesh = generate_structured<2>(10);
  CHECK(mesh.element_count() == 200);
  CHECK(mesh.mesh_size == Catch::Approx(std::sqrt(2.0) / 10.0).margin(1e-14));
  CHECK(total_measure(mesh) == Catch::Approx(1.0).margin(1e-12));
  CHECK(validate_mesh(mesh, 0.3).empty());

  // mesh_size is the max element diameter.
  double dmax = 0.0;
  for (const auto& el : mesh.elements) dmax = std::max(dmax, el.diameter);
  CHECK(mesh.mesh_size == dmax);
}

TEST_CASE("structured 2d n=1 covers the unit square") {
  const auto mesh = generate_structured<2>(1);
  CHECK(mesh.element_count() == 2);
  CHECK(total_measure(mesh) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("structured 3d mesh") {
  const auto mesh = generate_structured<3>(4);
  CHECK(mesh.element_count() == 384);
  CHECK(total_measure(mesh) == Catch::Approx(1.0).margin(1e-12));
  CHECK(validate_mesh(mesh, 0.2).empty());
}

TEST_CASE("six-tet cube face counts") {
  // Oracle: brute-force enumeration of the standard six-tet split of one
  // cube gives 18 distinct triangles, 12 of them on the cube boundary.
  const auto mesh = generate_structured<3>(1);
  REQUIRE(mesh.element_count() == 6);
  CHECK(mesh.faces.size() == 18);
  CHECK(mesh.boundary_face_ids.size() == 12);
  CHECK(mesh.interior_face_ids.size() == 6);
}

TEST_CASE("interior face normals negate across sides") {
  const auto mesh = generate_structured<2>(3);
  for (int f : mesh.interior_face_ids) {
    const auto& fc = mesh.faces[f];
    // Geometric recomputation from the second element's side.
    const VecD<2> a = mesh.vertices[fc.vertex_ids[0]];
    const VecD<2> b = mesh.vertices[fc.vertex_ids[1]];
    const VecD<2> mid = 0.5 * (a + b);
    const VecD<2> toward0 = mesh.elements[fc.element_ids[0]].barycenter - mid;
    CHECK(fc.normal.dot(toward0) < 0.0);
    const VecD<2> toward1 = mesh.elements[fc.element_ids[1]].barycenter - mid;
    CHECK(fc.normal.dot(toward1) > 0.0);
  }
}

TEST_CASE("face vertices belong to both adjacent elements") {
  const auto mesh = generate_structured<2>(4);
  for (const auto& fc : mesh.faces)
    for (int side = 0; side < 2; ++side) {
      if (fc.element_ids[side] < 0) continue;
      const auto& el = mesh.elements[fc.element_ids[side]];
      for (int v : fc.vertex_ids)
        CHECK(std::count(el.vertex_ids.begin(), el.vertex_ids.end(), v) == 1);
    }
}

TEST_CASE("barycenters lie inside elements") {
  const auto mesh = generate_structured<3>(2);
  for (int k = 0; k < mesh.element_count(); ++k) {
    // For a tetrahedron: all barycentric fan volumes positive.
    const auto& el = mesh.elements[k];
    std::array<VecD<3>, 4> v;
    for (int i = 0; i < 4; ++i) v[i] = mesh.vertices[el.vertex_ids[i]];
    for (int i = 0; i < 4; ++i) {
      auto w = v;
      w[i] = el.barycenter;
      CHECK(simplex_measure(w) > 0.0);
    }
  }
}

TEST_CASE("voronoi cvt mesh is conforming") {
  const auto mesh = generate_polygonal_cvt(40, 3, 40);
  CHECK(mesh.element_count() == 40);
  CHECK(total_measure(mesh) == Catch::Approx(1.0).margin(1e-10));
  validate_mesh(mesh, 0.0);
  // Round-trip through the ASCII format.
  const auto path = (std::filesystem::temp_directory_path() / "cvt40.msh").string();
  save_mesh(mesh, path);
  const auto back = load_mesh<2>(path);
  CHECK(back.element_count() == 40);
  CHECK(back.faces.size() == mesh.faces.size());
}

TEST_CASE("degenerate element rejected") {
  const auto path = write_temp("degen.msh",
                               "2 3 1\n"
                               "0 0\n1 0\n2 0\n"
                               "3 0 1 2\n");
  CHECK_THROWS_AS(load_mesh<2>(path), error);
}
