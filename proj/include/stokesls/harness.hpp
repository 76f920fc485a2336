// Experiment driver: convergence studies over mesh families, the cavity
// benchmark with its cached fine reference, and CSV emission.

#ifndef STOKESLS_HARNESS_HPP
#define STOKESLS_HARNESS_HPP

#include <fstream>
#include <memory>
#include <optional>

#include "stokesls/errors.hpp"
#include "stokesls/mesh_io.hpp"
#include "stokesls/problems.hpp"
#include "stokesls/voronoi.hpp"
#include "stokesls/vtk.hpp"

namespace stokesls {

/// Everything one solve produces; kept together so the acceptance checks can
/// evaluate functionals against interpolants on the same systems. Mesh,
/// patches and operators sit behind shared_ptr so the solution's internal
/// references stay valid when artifacts are moved around.
template <int Dim>
struct SolveArtifacts {
  std::shared_ptr<Mesh<Dim>> mesh;
  std::shared_ptr<std::vector<ElementPatch<Dim>>> patches;
  std::shared_ptr<ReconstructionSet<Dim>> ops;
  LeastSquaresSystem<Dim> system1;
  LeastSquaresSystem<Dim> system2;
  StokesSolution<Dim> solution;
  SolveReport report1, report2;
};

template <int Dim>
int resolve_patch_size(const SolverConfig& config) {
  return config.patch_size > 0 ? config.patch_size : default_patch_size(Dim, config.order);
}

/// Full pipeline on an existing mesh: patches, reconstructions, both solves.
template <int Dim>
SolveArtifacts<Dim> solve_on_mesh(Mesh<Dim> mesh, const ProblemDefinition<Dim>& problem,
                                  const SolverConfig& config) {
  config.validate();
  problem.validate();
  SolveArtifacts<Dim> art;
  art.mesh = std::make_shared<Mesh<Dim>>(std::move(mesh));
  PatchConfig pc;
  pc.patch_size = resolve_patch_size<Dim>(config);
  pc.order = config.order;
  art.patches =
      std::make_shared<std::vector<ElementPatch<Dim>>>(build_patches(*art.mesh, pc));
  art.ops = std::make_shared<ReconstructionSet<Dim>>(
      build_reconstructions(*art.mesh, *art.patches, config.order));

  art.system1 = assemble_step1(*art.mesh, *art.patches, *art.ops, config,
                               problem.source_for(config.nu), problem.boundary);
  auto [x1, rep1] = solve_step1(art.system1);
  art.report1 = rep1;
  art.solution.mesh = art.mesh.get();
  art.solution.ops = art.ops.get();
  const int ne = art.mesh->element_count();
  art.solution.gradient_dofs = x1.head((Dim * Dim - 1) * ne);
  art.solution.pressure_dofs = x1.tail(ne);
  art.solution.cache_step1();

  art.system2 = assemble_step2(*art.mesh, *art.patches, *art.ops, config, art.solution,
                               problem.boundary);
  auto [x2, rep2] = solve_step2(art.system2);
  art.report2 = rep2;
  art.solution.velocity_dofs = std::move(x2);
  art.solution.cache_step2();
  return art;
}

/// All error measures of a solved state against the exact fields.
template <int Dim>
ErrorReport compute_errors(const SolveArtifacts<Dim>& art, const ProblemDefinition<Dim>& problem,
                           const SolverConfig& config, std::optional<double> h_label = {}) {
  check(problem.has_exact, errc::config, "error report requires exact fields");
  const int qd = config.quad();
  ErrorReport r;
  r.h = h_label.value_or(art.mesh->mesh_size);
  r.elements = art.mesh->element_count();
  r.dofs_step1 = art.system1.matrix.n + 1;
  r.dofs_step2 = art.system2.matrix.n;
  r.energy_Up = energy_norm_Up(*art.mesh, art.solution, problem.velocity_gradient,
                               problem.velocity_laplacian, problem.pressure_gradient, qd);
  r.energy_u =
      energy_norm_u(*art.mesh, art.solution, problem.velocity, problem.velocity_gradient, qd);
  r.l2_U = l2_error(*art.mesh, art.solution, FieldKind::gradient,
                    [&](const VecD<Dim>& x) -> Eigen::VectorXd {
                      const MatD<Dim> g = problem.velocity_gradient(x);
                      Eigen::VectorXd v(Dim * Dim);
                      for (int i = 0; i < Dim; ++i)
                        for (int j = 0; j < Dim; ++j) v[i * Dim + j] = g(i, j);
                      return v;
                    },
                    qd);
  r.l2_p = l2_error(*art.mesh, art.solution, FieldKind::pressure,
                    [&](const VecD<Dim>& x) -> Eigen::VectorXd {
                      Eigen::VectorXd v(1);
                      v[0] = problem.pressure(x);
                      return v;
                    },
                    qd);
  r.l2_u = l2_error(*art.mesh, art.solution, FieldKind::velocity,
                    [&](const VecD<Dim>& x) -> Eigen::VectorXd {
                      return Eigen::VectorXd(problem.velocity(x));
                    },
                    qd);
  return r;
}

struct ConvergenceRecord {
  std::string problem_name;
  std::string mesh_family;
  int order = 0;
  int patch_size = 0;
  double eta = 1.0, mu = 1.0, nu = 1.0;
  std::vector<ErrorReport> rows;  // sorted by decreasing h
};

/// Convergence study over structured meshes with the given subdivision
/// counts (h labelled 1/n as in the published tables).
template <int Dim>
ConvergenceRecord run_convergence(const ProblemDefinition<Dim>& problem,
                                  const std::vector<int>& subdivisions,
                                  const SolverConfig& config) {
  check(!subdivisions.empty(), errc::config, "no refinements requested");
  ConvergenceRecord rec;
  rec.problem_name = problem.name;
  rec.mesh_family = Dim == 2 ? "structured-triangles" : "structured-tetrahedra";
  rec.order = config.order;
  rec.patch_size = resolve_patch_size<Dim>(config);
  rec.eta = config.eta;
  rec.mu = config.mu;
  rec.nu = config.nu;
  for (int n : subdivisions) {
    auto art = solve_on_mesh(generate_structured<Dim>(n), problem, config);
    rec.rows.push_back(compute_errors(art, problem, config, 1.0 / n));
  }
  return rec;
}

/// Convergence study over ingested polygonal meshes; the effective mesh
/// size is (#elements)^(-1/2).
inline ConvergenceRecord run_convergence_files(const ProblemDefinition<2>& problem,
                                               const std::vector<std::string>& mesh_files,
                                               const SolverConfig& config) {
  check(!mesh_files.empty(), errc::config, "no mesh files given");
  ConvergenceRecord rec;
  rec.problem_name = problem.name;
  rec.mesh_family = "polygonal-files";
  rec.order = config.order;
  rec.patch_size = resolve_patch_size<2>(config);
  rec.eta = config.eta;
  rec.mu = config.mu;
  rec.nu = config.nu;
  for (const auto& path : mesh_files) {
    auto art = solve_on_mesh(load_mesh<2>(path), problem, config);
    const double h = 1.0 / std::sqrt(static_cast<double>(art.mesh->element_count()));
    rec.rows.push_back(compute_errors(art, problem, config, h));
  }
  return rec;
}

/// CSV table: one row per refinement, orders populated from the second row.
inline void emit_csv(const ConvergenceRecord& rec, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), errc::io, "cannot write CSV file: " + path);
  out << "h,elements";
  for (const auto& n : error_measure_names()) out << "," << n;
  for (const auto& n : error_measure_names()) out << ",order_" << n;
  out << "\n";
  std::optional<ConvergenceOrders> orders;
  if (rec.rows.size() >= 2) orders = convergence_orders(rec.rows);
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    const auto& r = rec.rows[i];
    out << detail::fmt_double(r.h) << "," << r.elements;
    for (double e : error_measures(r)) out << "," << detail::fmt_double(e);
    for (std::size_t m = 0; m < error_measure_names().size(); ++m) {
      out << ",";
      if (i > 0 && orders) out << detail::fmt_double(orders->pairwise[m][i - 1]);
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Cavity benchmark.

/// Locates the structured-mesh triangle containing x (2D generator layout).
inline int locate_structured_element(int n, const VecD<2>& x) {
  const double eps = 1e-14;
  int i = static_cast<int>(std::floor(x[0] * n));
  int j = static_cast<int>(std::floor(x[1] * n));
  i = std::clamp(i, 0, n - 1);
  j = std::clamp(j, 0, n - 1);
  const double fx = x[0] * n - i, fy = x[1] * n - j;
  const int tri = fy <= fx + eps ? 0 : 1;
  return 2 * (j * n + i) + tri;
}

struct CavitySelfConvergence {
  std::vector<int> subdivisions;
  std::vector<double> l2_u;      // against the fine reference
  std::vector<double> h1_u;      // broken gradient seminorm part
  double slope_l2 = 0.0;
};

/// Simple FNV-1a hash of the reference configuration, to invalidate caches.
inline std::uint64_t cavity_cache_hash(int n, const SolverConfig& config) {
  std::string key = "cavity-v1|" + std::to_string(n) + "|" + std::to_string(config.order) + "|" +
                    std::to_string(config.patch_size) + "|" + std::to_string(config.quad()) +
                    "|" + detail::fmt_double(config.eta) + "|" + detail::fmt_double(config.mu) +
                    "|" + detail::fmt_double(config.nu);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Solves the cavity at subdivision n (computing or loading the cached dof
/// vectors when a cache path is given).
template <typename Solver>
Eigen::VectorXd cached_velocity_dofs(const std::string& cache_file, std::uint64_t hash,
                                     Solver&& solver) {
  if (!cache_file.empty()) {
    std::ifstream in(cache_file, std::ios::binary);
    if (in.good()) {
      std::uint64_t file_hash = 0;
      std::int64_t size = 0;
      in.read(reinterpret_cast<char*>(&file_hash), sizeof(file_hash));
      in.read(reinterpret_cast<char*>(&size), sizeof(size));
      if (in.good() && file_hash == hash && size > 0) {
        Eigen::VectorXd dofs(size);
        in.read(reinterpret_cast<char*>(dofs.data()), size * sizeof(double));
        if (in.good()) return dofs;
      }
    }
  }
  Eigen::VectorXd dofs = solver();
  if (!cache_file.empty()) {
    std::ofstream out(cache_file, std::ios::binary);
    if (out.good()) {
      const std::int64_t size = dofs.size();
      out.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
      out.write(reinterpret_cast<const char*>(&size), sizeof(size));
      out.write(reinterpret_cast<const char*>(dofs.data()), size * sizeof(double));
    }
  }
  return dofs;
}

/// Self-convergence of the cavity against an internally computed fine
/// reference; errors are measured with the coarse-mesh quadrature, locating
/// reference elements through the structured grid.
inline CavitySelfConvergence cavity_self_convergence(const std::vector<int>& subdivisions,
                                                     const SolverConfig& coarse_config,
                                                     int ref_n, const SolverConfig& ref_config,
                                                     const std::string& cache_file = "") {
  const auto problem = cavity_problem();

  // Reference solve (or cache load); the evaluation machinery needs the
  // mesh/patches/operators regardless.
  Mesh<2> ref_mesh = generate_structured<2>(ref_n);
  PatchConfig ref_pc;
  ref_pc.patch_size = resolve_patch_size<2>(ref_config);
  ref_pc.order = ref_config.order;
  auto ref_patches = build_patches(ref_mesh, ref_pc);
  auto ref_ops = build_reconstructions(ref_mesh, ref_patches, ref_config.order);
  const Eigen::VectorXd ref_dofs =
      cached_velocity_dofs(cache_file, cavity_cache_hash(ref_n, ref_config), [&]() {
        auto art = solve_on_mesh(generate_structured<2>(ref_n), problem, ref_config);
        return art.solution.velocity_dofs;
      });
  std::vector<Eigen::VectorXd> ref_coeffs(ref_mesh.element_count());
  for (int k = 0; k < ref_mesh.element_count(); ++k)
    ref_coeffs[k] = local_coefficients(ref_ops.vector, k, ref_dofs);

  CavitySelfConvergence out;
  out.subdivisions = subdivisions;
  for (int n : subdivisions) {
    auto art = solve_on_mesh(generate_structured<2>(n), problem, coarse_config);
    double l2 = 0.0, h1 = 0.0;
    for (int k = 0; k < art.mesh->element_count(); ++k) {
      const auto rule = element_rule(*art.mesh, k, coarse_config.quad());
      const Eigen::MatrixXd uc =
          eval_components(art.ops->vector, k, art.solution.velocity_coeffs[k], rule.points);
      const Eigen::MatrixXd jc =
          eval_jacobian(art.ops->vector, k, art.solution.velocity_coeffs[k], rule.points);
      for (int q = 0; q < rule.size(); ++q) {
        const VecD<2> x = rule.points.row(q).transpose();
        const int rk = locate_structured_element(ref_n, x);
        Eigen::Matrix<double, Eigen::Dynamic, 2> pt(1, 2);
        pt.row(0) = x.transpose();
        const Eigen::MatrixXd ur = eval_components(ref_ops.vector, rk, ref_coeffs[rk], pt);
        const Eigen::MatrixXd jr = eval_jacobian(ref_ops.vector, rk, ref_coeffs[rk], pt);
        l2 += rule.weights[q] * (uc.row(q) - ur.row(0)).squaredNorm();
        h1 += rule.weights[q] * (jc.row(q) - jr.row(0)).squaredNorm();
      }
    }
    out.l2_u.push_back(std::sqrt(l2));
    out.h1_u.push_back(std::sqrt(h1));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < subdivisions.size(); ++i) {
    const double lx = std::log(1.0 / subdivisions[i]);
    const double ly = std::log(out.l2_u[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = static_cast<double>(subdivisions.size());
  out.slope_l2 = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  return out;
}

}  // namespace stokesls

#endif
