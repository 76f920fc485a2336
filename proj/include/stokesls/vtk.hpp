// Legacy VTK unstructured grid output. Cells are the per-element simplicial
// sub-decomposition with element-local point copies, so the discontinuous
// fields are rendered without cross-element averaging. Point data: velocity
// vectors, pressure and speed magnitude.

#ifndef STOKESLS_VTK_HPP
#define STOKESLS_VTK_HPP

#include <cstdio>
#include <fstream>

#include "stokesls/errors.hpp"

namespace stokesls {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

}  // namespace detail

template <int Dim>
void emit_vtk(const Mesh<Dim>& mesh, const StokesSolution<Dim>& sol, const std::string& path) {
  check(!sol.velocity_coeffs.empty() && !sol.pressure_coeffs.empty(), errc::config,
        "VTK output requires a fully solved solution");
  std::ofstream out(path);
  check(out.good(), errc::io, "cannot write VTK file: " + path);

  int npoints = 0, ncells = 0;
  for (const auto& el : mesh.elements) {
    ncells += static_cast<int>(el.simplices.size());
    npoints += static_cast<int>(el.simplices.size()) * (Dim + 1);
  }

  out << "# vtk DataFile Version 3.0\n";
  out << "stokesls solution\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << npoints << " double\n";
  for (int k = 0; k < mesh.element_count(); ++k)
    for (std::size_t s = 0; s < mesh.elements[k].simplices.size(); ++s) {
      const auto v = mesh.simplex(k, static_cast<int>(s));
      for (int i = 0; i <= Dim; ++i) {
        out << detail::fmt_double(v[i][0]) << " " << detail::fmt_double(v[i][1]) << " "
            << detail::fmt_double(Dim == 3 ? v[i][2] : 0.0) << "\n";
      }
    }
  out << "CELLS " << ncells << " " << ncells * (Dim + 2) << "\n";
  int pt = 0;
  for (const auto& el : mesh.elements)
    for (std::size_t s = 0; s < el.simplices.size(); ++s) {
      out << (Dim + 1);
      for (int i = 0; i <= Dim; ++i) out << " " << pt++;
      out << "\n";
    }
  out << "CELL_TYPES " << ncells << "\n";
  for (int c = 0; c < ncells; ++c) out << (Dim == 2 ? 5 : 10) << "\n";

  // Per-element evaluation at the duplicated corner points.
  std::vector<VecD<Dim>> velocity(npoints);
  std::vector<double> pressure(npoints);
  pt = 0;
  for (int k = 0; k < mesh.element_count(); ++k) {
    const auto& el = mesh.elements[k];
    const int n = static_cast<int>(el.simplices.size()) * (Dim + 1);
    Eigen::Matrix<double, Eigen::Dynamic, Dim> pts(n, Dim);
    int r = 0;
    for (std::size_t s = 0; s < el.simplices.size(); ++s) {
      const auto v = mesh.simplex(k, static_cast<int>(s));
      for (int i = 0; i <= Dim; ++i) pts.row(r++) = v[i].transpose();
    }
    const Eigen::MatrixXd uv = eval_components(sol.ops->vector, k, sol.velocity_coeffs[k], pts);
    const Eigen::MatrixXd pv = eval_components(sol.ops->scalar, k, sol.pressure_coeffs[k], pts);
    for (int i = 0; i < n; ++i) {
      velocity[pt + i] = uv.row(i).transpose();
      pressure[pt + i] = pv(i, 0);
    }
    pt += n;
  }

  out << "POINT_DATA " << npoints << "\n";
  out << "VECTORS velocity double\n";
  for (int i = 0; i < npoints; ++i)
    out << detail::fmt_double(velocity[i][0]) << " " << detail::fmt_double(velocity[i][1]) << " "
        << detail::fmt_double(Dim == 3 ? velocity[i][2] : 0.0) << "\n";
  out << "SCALARS pressure double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int i = 0; i < npoints; ++i) out << detail::fmt_double(pressure[i]) << "\n";
  out << "SCALARS speed double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int i = 0; i < npoints; ++i) out << detail::fmt_double(velocity[i].norm()) << "\n";
}

}  // namespace stokesls

#endif
