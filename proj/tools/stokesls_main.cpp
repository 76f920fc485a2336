// Command-line driver: manufactured-solution convergence studies, the
// lid-driven cavity benchmark, one-shot solves on mesh files and the
// polygonal mesh generator used to create test fixtures.

#include <CLI11.hpp>

#include <iostream>

#include "stokesls/harness.hpp"

namespace {

using namespace stokesls;

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  check(!out.empty(), errc::config, "empty list: " + csv);
  return out;
}

struct CommonOptions {
  int dim = 2;
  int order = 1;
  int patch_size = 0;
  double eta = 1.0;
  double mu = 1.0;
  double nu = 1.0;
  int quad_degree = 0;

  SolverConfig config() const {
    SolverConfig c;
    c.order = order;
    c.patch_size = patch_size;
    c.eta = eta;
    c.mu = mu;
    c.nu = nu;
    c.quadrature_degree = quad_degree;
    return c;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--dim", opt.dim, "Space dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
  cmd->add_option("--order,-m", opt.order, "Reconstruction order m");
  cmd->add_option("--patch-size", opt.patch_size, "Patch cardinality #S (0 = table default)");
  cmd->add_option("--eta", opt.eta, "Step-1 face penalty");
  cmd->add_option("--mu", opt.mu, "Step-2 face penalty");
  cmd->add_option("--nu", opt.nu, "Viscosity (reciprocal Reynolds number)");
  cmd->add_option("--quad-degree", opt.quad_degree, "Quadrature exactness (0 = 2m+2)");
}

template <int Dim>
ProblemDefinition<Dim> builtin_problem(int example);

template <>
ProblemDefinition<2> builtin_problem<2>(int example) {
  switch (example) {
    case 1: return example1_problem();
    case 2: {
      auto p = example1_problem();
      p.name = "example2";
      return p;
    }
    case 3: return cavity_problem();
    default: fail(errc::config, "2D examples are 1, 2 and 3");
  }
}

template <>
ProblemDefinition<3> builtin_problem<3>(int example) {
  switch (example) {
    case 4: return example4_problem();
    case 5: return example5_problem();
    default: fail(errc::config, "3D examples are 4 and 5");
  }
}

void print_record(const ConvergenceRecord& rec) {
  std::printf("# %s on %s, m=%d, #S=%d, eta=%g, mu=%g, nu=%g\n", rec.problem_name.c_str(),
              rec.mesh_family.c_str(), rec.order, rec.patch_size, rec.eta, rec.mu, rec.nu);
  std::printf("%12s %9s %13s %13s %13s %13s %13s\n", "h", "elements", "energy_Up", "l2_U", "l2_p",
              "energy_u", "l2_u");
  for (const auto& r : rec.rows)
    std::printf("%12.5e %9d %13.5e %13.5e %13.5e %13.5e %13.5e\n", r.h, r.elements, r.energy_Up,
                r.l2_U, r.l2_p, r.energy_u, r.l2_u);
  if (rec.rows.size() >= 2) {
    const auto orders = convergence_orders(rec.rows);
    std::printf("least-squares slopes:");
    for (std::size_t m = 0; m < error_measure_names().size(); ++m)
      std::printf(" %s=%.2f", error_measure_names()[m].c_str(), orders.slope[m]);
    std::printf("\n");
  }
}

int run_converge(const CommonOptions& opt, int example, const std::string& refinements,
                 const std::string& mesh_dir, const std::string& out_csv) {
  ConvergenceRecord rec;
  if (example == 2) {
    // Polygonal meshes ingested from files; generated once as fixtures.
    const auto counts = parse_int_list(refinements.empty() ? "64,256,1024" : refinements);
    std::vector<std::string> files;
    for (int c : counts) {
      const std::string path = (mesh_dir.empty() ? std::string(".") : mesh_dir) + "/poly" +
                               std::to_string(c) + ".msh";
      std::ifstream probe(path);
      if (!probe.good()) save_mesh(generate_polygonal_cvt(c, 7), path);
      files.push_back(path);
    }
    rec = run_convergence_files(builtin_problem<2>(2), files, opt.config());
  } else if (opt.dim == 2) {
    const auto ns = parse_int_list(refinements.empty() ? "10,20,40" : refinements);
    rec = run_convergence(builtin_problem<2>(example), ns, opt.config());
  } else {
    const auto ns = parse_int_list(refinements.empty() ? "4,8" : refinements);
    rec = run_convergence(builtin_problem<3>(example), ns, opt.config());
  }
  print_record(rec);
  if (!out_csv.empty()) {
    emit_csv(rec, out_csv);
    std::printf("wrote %s\n", out_csv.c_str());
  }
  return 0;
}

int run_cavity_cmd(const CommonOptions& opt, int n, const std::string& out_vtk, int ref_n,
                   int ref_order, bool self_converge, const std::string& refinements,
                   const std::string& cache) {
  const auto problem = cavity_problem();
  auto art = solve_on_mesh(generate_structured<2>(n), problem, opt.config());
  const auto [max_div, max_grad] = max_velocity_divergence(*art.mesh, art.solution,
                                                           opt.config().quad());
  std::printf("cavity n=%d m=%d: %d elements, max |div u_h| = %.3e (max |grad u_h| = %.3e)\n", n,
              opt.order, art.mesh->element_count(), max_div, max_grad);
  if (!out_vtk.empty()) {
    emit_vtk(*art.mesh, art.solution, out_vtk);
    std::printf("wrote %s\n", out_vtk.c_str());
  }
  if (self_converge) {
    SolverConfig ref_config = opt.config();
    ref_config.order = ref_order;
    ref_config.patch_size = 0;
    const auto ns = parse_int_list(refinements.empty() ? "10,20,40" : refinements);
    const auto sc = cavity_self_convergence(ns, opt.config(), ref_n, ref_config, cache);
    std::printf("self-convergence against n=%d, m=%d reference:\n", ref_n, ref_order);
    for (std::size_t i = 0; i < sc.subdivisions.size(); ++i)
      std::printf("  n=%4d  l2_u=%.5e  h1_u=%.5e\n", sc.subdivisions[i], sc.l2_u[i], sc.h1_u[i]);
    std::printf("  l2_u slope = %.2f\n", sc.slope_l2);
  }
  return 0;
}

template <int Dim>
int run_solve(const CommonOptions& opt, const std::string& mesh_file, int example,
              const std::string& out_vtk, const std::string& out_csv) {
  const auto problem = builtin_problem<Dim>(example);
  auto art = solve_on_mesh(load_mesh<Dim>(mesh_file), problem, opt.config());
  std::printf("solved %s on %s: %d elements, %d + %d dofs\n", problem.name.c_str(),
              mesh_file.c_str(), art.mesh->element_count(), art.system1.matrix.n + 1,
              art.system2.matrix.n);
  if (problem.has_exact) {
    ConvergenceRecord rec;
    rec.problem_name = problem.name;
    rec.mesh_family = "file:" + mesh_file;
    rec.order = opt.order;
    rec.patch_size = resolve_patch_size<Dim>(opt.config());
    rec.rows.push_back(compute_errors(art, problem, opt.config()));
    print_record(rec);
    if (!out_csv.empty()) emit_csv(rec, out_csv);
  }
  if (!out_vtk.empty()) {
    emit_vtk(*art.mesh, art.solution, out_vtk);
    std::printf("wrote %s\n", out_vtk.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential least squares Stokes solver with patch-reconstructed spaces"};
  app.require_subcommand(1);

  CommonOptions opt;

  auto* converge = app.add_subcommand("converge", "Manufactured-solution convergence study");
  int example = 1;
  std::string refinements, mesh_dir, out_csv;
  add_common(converge, opt);
  converge->add_option("--example", example, "Built-in example (1-5)");
  converge->add_option("--refinements", refinements,
                       "Comma list: subdivisions per axis (structured) or element counts "
                       "(example 2)");
  converge->add_option("--mesh-dir", mesh_dir, "Directory for example-2 mesh fixtures");
  converge->add_option("--out", out_csv, "CSV output path");

  auto* cavity = app.add_subcommand("cavity", "Lid-driven cavity benchmark");
  int n = 40, ref_n = 160, ref_order = 2;
  bool self_converge = false;
  std::string out_vtk, cavity_refinements, cache;
  add_common(cavity, opt);
  cavity->add_option("--n", n, "Subdivisions per axis");
  cavity->add_option("--out", out_vtk, "VTK output path");
  cavity->add_flag("--self-converge", self_converge, "Run the self-convergence study");
  cavity->add_option("--ref-n", ref_n, "Reference subdivisions");
  cavity->add_option("--ref-order", ref_order, "Reference order");
  cavity->add_option("--refinements", cavity_refinements, "Coarse subdivisions for the study");
  cavity->add_option("--cache", cache, "Reference dof cache file");

  auto* solve = app.add_subcommand("solve", "One-shot solve on a mesh file");
  std::string mesh_file, solve_vtk, solve_csv;
  int solve_example = 1;
  add_common(solve, opt);
  solve->add_option("--mesh", mesh_file, "Mesh file (ASCII format)")->required();
  solve->add_option("--example", solve_example, "Built-in example providing data");
  solve->add_option("--out", solve_vtk, "VTK output path");
  solve->add_option("--csv", solve_csv, "CSV output path");

  auto* genpoly = app.add_subcommand("genpoly", "Generate a centroidal Voronoi polygon mesh");
  int cells = 250;
  unsigned seed = 7;
  int lloyd = 80;
  std::string gen_out = "poly.msh";
  genpoly->add_option("--elements", cells, "Cell count");
  genpoly->add_option("--seed", seed, "RNG seed");
  genpoly->add_option("--lloyd", lloyd, "Lloyd iterations");
  genpoly->add_option("--out", gen_out, "Output mesh path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (converge->parsed()) return run_converge(opt, example, refinements, mesh_dir, out_csv);
    if (cavity->parsed())
      return run_cavity_cmd(opt, n, out_vtk, ref_n, ref_order, self_converge,
                            cavity_refinements, cache);
    if (solve->parsed()) {
      if (opt.dim == 2) return run_solve<2>(opt, mesh_file, solve_example, solve_vtk, solve_csv);
      return run_solve<3>(opt, mesh_file, solve_example, solve_vtk, solve_csv);
    }
    if (genpoly->parsed()) {
      const auto mesh = stokesls::generate_polygonal_cvt(cells, seed, lloyd);
      stokesls::save_mesh(mesh, gen_out);
      std::printf("wrote %s (%d elements, %zu vertices)\n", gen_out.c_str(),
                  mesh.element_count(), mesh.vertices.size());
      return 0;
    }
  } catch (const stokesls::error& e) {
    std::cerr << "error [" << stokesls::errc_name(e.code) << "]: " << e.what() << "\n";
    return static_cast<int>(e.code);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(stokesls::errc::internal);
  }
  return 0;
}
