// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stokesls/harness.hpp"

using namespace stokesls;

namespace {

struct Gate {
  int failures = 0;
  void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string cache_dir = ".";

void criterion1(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  ok &= divfree_basis<2>(1).count() == 5;
  ok &= divfree_basis<2>(2).count() == 9;
  ok &= divfree_basis<3>(1).count() == 11;
  for (int m = 1; m <= 3; ++m) {
    const int expected = static_cast<int>(3 * binomial(m + 3, 3) - binomial(m + 2, 3));
    ok &= divfree_basis<3>(m).count() == expected;
  }
  ok &= curlfree_tracefree_basis<2>(1).count() == 7;
  const double dt = seconds_since(t0);
  ok &= dt < 1.0;
  gate.report(1, ok,
              "basis dimensions (2D divfree 5/9, 3D 11 and 3C(m+3,3)-C(m+2,3) for m<=3, "
              "tensor 7), " +
                  std::to_string(dt) + " s (< 1 s)");
}

void criterion2(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (int m = 1; m <= 3; ++m) {
    ok &= symbolic_divergence_max(divfree_basis<2>(m)) == 0.0;
    ok &= symbolic_divergence_max(divfree_basis<3>(m)) == 0.0;
    const auto t2 = curlfree_tracefree_basis<2>(m);
    ok &= symbolic_curl_max(t2) == 0.0;
    ok &= symbolic_trace_max(t2) == 0.0;
    const auto t3 = curlfree_tracefree_basis<3>(m);
    ok &= symbolic_curl_max(t3) == 0.0;
    ok &= symbolic_trace_max(t3) == 0.0;
  }

  double worst = 0.0;
  int count = 0;
  std::mt19937_64 rng(511);
  const auto mesh2 = generate_structured<2>(5);
  const auto mesh3 = generate_structured<3>(2);
  for (int m = 1; m <= 3; ++m) {
    worst = std::max(worst, oracles::reproduction_worst_error<2>(mesh2, m, 23, rng, count));
    worst = std::max(worst, oracles::reproduction_worst_error<3>(mesh3, m, 12, rng, count));
  }
  ok &= count >= 200;
  ok &= worst <= 1e-10;
  const double dt = seconds_since(t0);
  ok &= dt < 30.0;
  gate.report(2, ok,
              "symbolic zero divergence/curl/trace at the coefficient level; " +
                  std::to_string(count) + " random admissible polynomials reproduced, worst "
                  "rel err " +
                  std::to_string(worst) + ", " + std::to_string(dt) + " s (< 30 s)");
}

void criterion3(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst_sys = 0.0, worst_kkt = 0.0;
  {
    const auto mesh = generate_structured<2>(2);  // 8 elements
    worst_sys = std::max(worst_sys, oracles::system_oracle_worst_error<2>(mesh, 1, 5));
    worst_kkt = std::max(worst_kkt, oracles::kkt_worst_error<2>(mesh, 1, 5));
  }
  {
    const auto mesh = oracles::five_tet_cube();
    worst_sys = std::max(worst_sys, oracles::system_oracle_worst_error<3>(mesh, 1, 5));
    worst_kkt = std::max(worst_kkt, oracles::kkt_worst_error<3>(mesh, 1, 5));
  }
  ok &= worst_sys <= 1e-10;
  ok &= worst_kkt <= 1e-10;
  const double dt = seconds_since(t0);
  ok &= dt < 60.0;
  gate.report(3, ok,
              "assembled step-1/step-2 systems vs dense quadratic-form oracle (worst rel " +
                  std::to_string(worst_sys) + "), local reconstruction vs KKT oracle (worst "
                  "rel " +
                  std::to_string(worst_kkt) + "), " + std::to_string(dt) + " s (< 60 s)");
}

struct Example1Results {
  bool ok4 = true;
  std::string d4;
  bool ok7 = true;
  std::string d7;
  double div_ratio = 0.0;
  double seconds = 0.0;
};

Example1Results run_example1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto problem = example1_problem();
  Example1Results res;
  for (int m = 1; m <= 3; ++m) {
    SolverConfig config;
    config.order = m;
    std::vector<ErrorReport> rows;
    for (int n : {10, 20, 40}) {
      auto art = solve_on_mesh(generate_structured<2>(n), problem, config);
      rows.push_back(compute_errors(art, problem, config, 1.0 / n));

      const auto [max_div, max_grad] =
          max_velocity_divergence(*art.mesh, art.solution, config.quad());
      res.div_ratio = std::max(res.div_ratio, max_div / std::max(max_grad, 1e-300));

      const Eigen::VectorXd x1 = nodal_interpolant_step1(problem, *art.mesh);
      Eigen::VectorXd xsol(x1.size());
      xsol.head(art.solution.gradient_dofs.size()) = art.solution.gradient_dofs;
      xsol.tail(art.solution.pressure_dofs.size()) = art.solution.pressure_dofs;
      const double j_sol = functional_value(art.system1, xsol);
      const double j_int = functional_value(art.system1, x1);
      if (j_sol > j_int * (1.0 + 1e-10)) {
        res.ok7 = false;
        res.d7 += " J_p(sol)=" + std::to_string(j_sol) + " > J_p(interp)=" + std::to_string(j_int);
      }
      const Eigen::VectorXd xu = nodal_interpolant_velocity(problem, *art.mesh);
      const double ju_sol = functional_value(art.system2, art.solution.velocity_dofs);
      const double ju_int = functional_value(art.system2, xu);
      if (ju_sol > ju_int * (1.0 + 1e-10)) {
        res.ok7 = false;
        res.d7 += " J_u(sol)=" + std::to_string(ju_sol) + " > J_u(interp)=" + std::to_string(ju_int);
      }
    }
    const auto orders = convergence_orders(rows);
    const double s_eUp = orders.slope[0], s_lU = orders.slope[1], s_lp = orders.slope[2];
    const double s_eu = orders.slope[3], s_lu = orders.slope[4];
    bool mok = std::abs(s_eUp - m) <= 0.3 && std::abs(s_eu - m) <= 0.3;
    if (m % 2 == 1) {
      mok &= std::abs(s_lU - (m + 1)) <= 0.35 && std::abs(s_lp - (m + 1)) <= 0.35 &&
             std::abs(s_lu - (m + 1)) <= 0.35;
    } else {
      mok &= s_lU >= m && s_lp >= m && s_lu >= m;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), " m=%d: eUp=%.2f eu=%.2f l2U=%.2f l2p=%.2f l2u=%.2f%s", m,
                  s_eUp, s_eu, s_lU, s_lp, s_lu, mok ? "" : " (out of band)");
    res.d4 += buf;
    res.ok4 &= mok;
  }
  res.seconds = seconds_since(t0);
  return res;
}

struct Example4Results {
  bool ok5 = true;
  std::string d5;
  double div_ratio = 0.0;
  double seconds = 0.0;
};

Example4Results run_example4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto problem = example4_problem();
  Example4Results res;
  auto run_order = [&](int m, double target_eUp, double target_eu, double target_l2u,
                       bool check_l2u) {
    SolverConfig config;
    config.order = m;
    std::vector<ErrorReport> rows;
    for (int n : {4, 8}) {
      auto art = solve_on_mesh(generate_structured<3>(n), problem, config);
      rows.push_back(compute_errors(art, problem, config, 1.0 / n));
      const auto [max_div, max_grad] =
          max_velocity_divergence(*art.mesh, art.solution, config.quad());
      res.div_ratio = std::max(res.div_ratio, max_div / std::max(max_grad, 1e-300));
    }
    const auto orders = convergence_orders(rows);
    const double o_eUp = orders.pairwise[0][0];
    const double o_eu = orders.pairwise[3][0];
    const double o_l2u = orders.pairwise[4][0];
    bool mok = std::abs(o_eUp - target_eUp) <= 0.4 && std::abs(o_eu - target_eu) <= 0.4;
    if (check_l2u) mok &= std::abs(o_l2u - target_l2u) <= 0.4;
    char buf[160];
    std::snprintf(buf, sizeof(buf), " m=%d: order(eUp)=%.2f order(eu)=%.2f order(l2u)=%.2f%s", m,
                  o_eUp, o_eu, o_l2u, mok ? "" : " (out of band)");
    res.d5 += buf;
    res.ok5 &= mok;
  };
  run_order(1, 0.77, 0.75, 1.16, true);   // published h=1/8 orders
  run_order(2, 1.81, 2.15, 2.21, false);  // runtime permits m=2; orders vs published bands
  res.seconds = seconds_since(t0);
  return res;
}

void criterion8(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  SolverConfig coarse;
  coarse.order = 2;
  SolverConfig ref = coarse;
  const std::string cache = cache_dir + "/cavity_ref.bin";
  const auto sc = cavity_self_convergence({10, 20, 40}, coarse, 160, ref, cache);
  ok &= sc.slope_l2 >= 0.6 && sc.slope_l2 <= 1.4;

  const auto art = solve_on_mesh(generate_structured<2>(10), cavity_problem(), coarse);
  const std::string vtk_path = cache_dir + "/cavity10.vtk";
  emit_vtk(*art.mesh, art.solution, vtk_path);
  const auto parsed = oracles::read_vtk_legacy(vtk_path);
  std::size_t expected_cells = 0;
  for (const auto& el : art.mesh->elements) expected_cells += el.simplices.size();
  ok &= parsed.cells == expected_cells;
  ok &= parsed.points == expected_cells * 3;
  ok &= parsed.has_velocity && parsed.has_pressure && parsed.has_speed;

  const double dt = seconds_since(t0);
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "cavity self-convergence vs n=160 m=2 reference: l2_u slope %.2f in [0.6,1.4]; "
                "VTK round trip %zu cells ok; %.0f s",
                sc.slope_l2, parsed.cells, dt);
  gate.report(8, ok, buf);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--cache-dir") cache_dir = argv[i + 1];
  std::filesystem::create_directories(cache_dir);

  Gate gate;
  criterion1(gate);
  criterion2(gate);
  criterion3(gate);
  const auto ex1 = run_example1();
  const auto ex4 = run_example4();
  gate.report(4, ex1.ok4,
              "Example 1 (h=1/10,1/20,1/40) least-squares slopes:" + ex1.d4 + ", " +
                  std::to_string(ex1.seconds) + " s (target < 600 s)");
  gate.report(5, ex4.ok5,
              "Example 4 (h=1/4,1/8) orders vs published values:" + ex4.d5 + ", " +
                  std::to_string(ex4.seconds) + " s (target < 1200 s)");
  const double div_ratio = std::max(ex1.div_ratio, ex4.div_ratio);
  gate.report(6, div_ratio <= 1e-10,
              "max |div u_h| / max |grad u_h| over all criteria 4-5 solves = " +
                  std::to_string(div_ratio) + " (<= 1e-10)");
  gate.report(7, ex1.ok7,
              ex1.ok7 ? "J_h^p and J_h^u at discrete solutions <= reconstructed-interpolant "
                        "values on every criterion-4 run"
                      : "minimizer property violated:" + ex1.d7);
  criterion8(gate);
  if (gate.failures == 0) std::printf("all acceptance criteria passed\n");
  return gate.failures;
}
