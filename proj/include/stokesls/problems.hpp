// Problem definitions: manufactured solutions on the unit square/cube and
// the regularized lid-driven cavity. Velocity gradients follow the Jacobian
// convention (row i = grad u_i), matching the tensor unknown of step 1.

#ifndef STOKESLS_PROBLEMS_HPP
#define STOKESLS_PROBLEMS_HPP

#include <random>

#include "stokesls/assembly.hpp"

namespace stokesls {

template <int Dim>
struct ProblemDefinition {
  std::string name;
  bool has_exact = false;

  std::function<VecD<Dim>(const VecD<Dim>&)> velocity;
  std::function<MatD<Dim>(const VecD<Dim>&)> velocity_gradient;   // U
  std::function<VecD<Dim>(const VecD<Dim>&)> velocity_laplacian;  // div U
  std::function<double(const VecD<Dim>&)> pressure;
  std::function<VecD<Dim>(const VecD<Dim>&)> pressure_gradient;
  std::function<VecD<Dim>(const VecD<Dim>&, double)> source;  // f(x; nu)
  BoundaryData<Dim> boundary;

  std::function<VecD<Dim>(const VecD<Dim>&)> source_for(double nu) const {
    auto fsrc = source;
    return [fsrc, nu](const VecD<Dim>& x) { return fsrc(x, nu); };
  }

  /// Consistency of the supplied callbacks at random sample points:
  /// div u = tr U = 0 and f = -nu lap u + grad p, both to 1e-8 relative.
  void validate(unsigned seed = 20240811) const {
    if (!has_exact) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < 100; ++s) {
      VecD<Dim> x;
      for (int d = 0; d < Dim; ++d) x[d] = unif(rng);
      const MatD<Dim> grad = velocity_gradient(x);
      check(std::abs(grad.trace()) <= 1e-8 * (1.0 + grad.norm()), errc::config,
            name + ": exact velocity is not divergence free");
      for (double nu : {1.0, 0.7}) {
        const VecD<Dim> f = source(x, nu);
        const VecD<Dim> expected = -nu * velocity_laplacian(x) + pressure_gradient(x);
        check((f - expected).norm() <= 1e-8 * (1.0 + expected.norm()), errc::config,
              name + ": source term is inconsistent with -nu lap u + grad p");
      }
    }
  }
};

/// f == 0, g == 0 (used by the trivial sanity checks).
template <int Dim>
ProblemDefinition<Dim> zero_problem() {
  ProblemDefinition<Dim> p;
  p.name = "zero";
  p.has_exact = true;
  p.velocity = [](const VecD<Dim>&) { return VecD<Dim>::Zero(); };
  p.velocity_gradient = [](const VecD<Dim>&) { return MatD<Dim>::Zero(); };
  p.velocity_laplacian = [](const VecD<Dim>&) { return VecD<Dim>::Zero(); };
  p.pressure = [](const VecD<Dim>&) { return 0.0; };
  p.pressure_gradient = [](const VecD<Dim>&) { return VecD<Dim>::Zero(); };
  p.source = [](const VecD<Dim>&, double) { return VecD<Dim>::Zero(); };
  p.boundary.g = [](const VecD<Dim>&) { return VecD<Dim>::Zero(); };
  p.boundary.grad_g = [](const VecD<Dim>&) { return MatD<Dim>::Zero(); };
  return p;
}

/// Builds a manufactured problem from velocity/pressure callbacks; the
/// Dirichlet data is the velocity trace and f = -nu lap u + grad p.
template <int Dim>
ProblemDefinition<Dim> manufactured_problem(
    std::string name, std::function<VecD<Dim>(const VecD<Dim>&)> u,
    std::function<MatD<Dim>(const VecD<Dim>&)> grad_u,
    std::function<VecD<Dim>(const VecD<Dim>&)> lap_u, std::function<double(const VecD<Dim>&)> p,
    std::function<VecD<Dim>(const VecD<Dim>&)> grad_p) {
  ProblemDefinition<Dim> def;
  def.name = std::move(name);
  def.has_exact = true;
  def.velocity = u;
  def.velocity_gradient = grad_u;
  def.velocity_laplacian = lap_u;
  def.pressure = p;
  def.pressure_gradient = grad_p;
  def.source = [lap_u, grad_p](const VecD<Dim>& x, double nu) -> VecD<Dim> {
    return -nu * lap_u(x) + grad_p(x);
  };
  def.boundary.g = u;
  def.boundary.grad_g = grad_u;
  return def;
}

/// u = (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y), p = x^2 + y^2 - 2/3.
inline ProblemDefinition<2> example1_problem() {
  const double w = 2.0 * M_PI;
  return manufactured_problem<2>(
      "example1",
      [w](const VecD<2>& x) {
        return VecD<2>(std::sin(w * x[0]) * std::cos(w * x[1]),
                       -std::cos(w * x[0]) * std::sin(w * x[1]));
      },
      [w](const VecD<2>& x) {
        MatD<2> g;
        g(0, 0) = w * std::cos(w * x[0]) * std::cos(w * x[1]);
        g(0, 1) = -w * std::sin(w * x[0]) * std::sin(w * x[1]);
        g(1, 0) = w * std::sin(w * x[0]) * std::sin(w * x[1]);
        g(1, 1) = -w * std::cos(w * x[0]) * std::cos(w * x[1]);
        return g;
      },
      [w](const VecD<2>& x) {
        return VecD<2>(-2.0 * w * w * std::sin(w * x[0]) * std::cos(w * x[1]),
                       2.0 * w * w * std::cos(w * x[0]) * std::sin(w * x[1]));
      },
      [](const VecD<2>& x) { return x.squaredNorm() - 2.0 / 3.0; },
      [](const VecD<2>& x) { return VecD<2>(2.0 * x[0], 2.0 * x[1]); });
}

/// Regularized lid-driven cavity: g = (4x(1-x), 0) on y = 1, no-slip
/// elsewhere, f = 0. grad_g carries only the tangential information the
/// boundary term consumes; no exact solution.
inline ProblemDefinition<2> cavity_problem() {
  ProblemDefinition<2> p;
  p.name = "cavity";
  p.has_exact = false;
  p.source = [](const VecD<2>&, double) { return VecD<2>::Zero(); };
  p.boundary.g = [](const VecD<2>& x) {
    if (x[1] >= 1.0 - 1e-12) return VecD<2>(4.0 * x[0] * (1.0 - x[0]), 0.0);
    return VecD<2>(0.0, 0.0);
  };
  p.boundary.grad_g = [](const VecD<2>& x) {
    MatD<2> g = MatD<2>::Zero();
    if (x[1] >= 1.0 - 1e-12) g(0, 0) = 4.0 - 8.0 * x[0];
    return g;
  };
  return p;
}

/// u = (1 - e^x cos 2pi y, e^x sin(2pi y)/2pi, 0), p = x^2 + y^2 - 2/3.
inline ProblemDefinition<3> example4_problem() {
  const double w = 2.0 * M_PI;
  return manufactured_problem<3>(
      "example4",
      [w](const VecD<3>& x) {
        const double ex = std::exp(x[0]);
        return VecD<3>(1.0 - ex * std::cos(w * x[1]), ex * std::sin(w * x[1]) / w, 0.0);
      },
      [w](const VecD<3>& x) {
        const double ex = std::exp(x[0]);
        MatD<3> g = MatD<3>::Zero();
        g(0, 0) = -ex * std::cos(w * x[1]);
        g(0, 1) = w * ex * std::sin(w * x[1]);
        g(1, 0) = ex * std::sin(w * x[1]) / w;
        g(1, 1) = ex * std::cos(w * x[1]);
        return g;
      },
      [w](const VecD<3>& x) {
        const double ex = std::exp(x[0]);
        return VecD<3>((w * w - 1.0) * ex * std::cos(w * x[1]),
                       (1.0 / w - w) * ex * std::sin(w * x[1]), 0.0);
      },
      [](const VecD<3>& x) { return x[0] * x[0] + x[1] * x[1] - 2.0 / 3.0; },
      [](const VecD<3>& x) { return VecD<3>(2.0 * x[0], 2.0 * x[1], 0.0); });
}

/// u = (sin pi x cos pi y, cos pi x sin pi y, pi cos pi x cos pi y) e^{-2z},
/// p = x^2 + y^2 + z^2 - 1.
inline ProblemDefinition<3> example5_problem() {
  const double w = M_PI;
  return manufactured_problem<3>(
      "example5",
      [w](const VecD<3>& x) {
        const double ez = std::exp(-2.0 * x[2]);
        return VecD<3>(std::sin(w * x[0]) * std::cos(w * x[1]) * ez,
                       std::cos(w * x[0]) * std::sin(w * x[1]) * ez,
                       w * std::cos(w * x[0]) * std::cos(w * x[1]) * ez);
      },
      [w](const VecD<3>& x) {
        const double ez = std::exp(-2.0 * x[2]);
        const double sx = std::sin(w * x[0]), cx = std::cos(w * x[0]);
        const double sy = std::sin(w * x[1]), cy = std::cos(w * x[1]);
        MatD<3> g;
        g(0, 0) = w * cx * cy * ez;
        g(0, 1) = -w * sx * sy * ez;
        g(0, 2) = -2.0 * sx * cy * ez;
        g(1, 0) = -w * sx * sy * ez;
        g(1, 1) = w * cx * cy * ez;
        g(1, 2) = -2.0 * cx * sy * ez;
        g(2, 0) = -w * w * sx * cy * ez;
        g(2, 1) = -w * w * cx * sy * ez;
        g(2, 2) = -2.0 * w * cx * cy * ez;
        return g;
      },
      [w](const VecD<3>& x) {
        const double ez = std::exp(-2.0 * x[2]);
        const double factor = 4.0 - 2.0 * w * w;
        return VecD<3>(factor * std::sin(w * x[0]) * std::cos(w * x[1]) * ez,
                       factor * std::cos(w * x[0]) * std::sin(w * x[1]) * ez,
                       factor * w * std::cos(w * x[0]) * std::cos(w * x[1]) * ez);
      },
      [](const VecD<3>& x) { return x.squaredNorm() - 1.0; },
      [](const VecD<3>& x) { return VecD<3>(2.0 * x[0], 2.0 * x[1], 2.0 * x[2]); });
}

/// Nodal values of the exact solution on the step-1 dof layout (the
/// reconstructed interpolants R-hat U and R p share these dofs).
template <int Dim>
Eigen::VectorXd nodal_interpolant_step1(const ProblemDefinition<Dim>& problem,
                                        const Mesh<Dim>& mesh) {
  check(problem.has_exact, errc::config, "interpolant requires exact fields");
  const int ne = mesh.element_count();
  const int vpc = Dim * Dim - 1;
  Eigen::VectorXd x(Dim * Dim * ne);
  const auto order = tracefree_entry_order<Dim>();
  for (int k = 0; k < ne; ++k) {
    const MatD<Dim> grad = problem.velocity_gradient(mesh.elements[k].barycenter);
    for (int t = 0; t < vpc; ++t) x[k * vpc + t] = grad(order[t].first, order[t].second);
    x[vpc * ne + k] = problem.pressure(mesh.elements[k].barycenter);
  }
  return x;
}

template <int Dim>
Eigen::VectorXd nodal_interpolant_velocity(const ProblemDefinition<Dim>& problem,
                                           const Mesh<Dim>& mesh) {
  check(problem.has_exact, errc::config, "interpolant requires exact fields");
  Eigen::VectorXd x(Dim * mesh.element_count());
  for (int k = 0; k < mesh.element_count(); ++k) {
    const VecD<Dim> u = problem.velocity(mesh.elements[k].barycenter);
    for (int c = 0; c < Dim; ++c) x[k * Dim + c] = u[c];
  }
  return x;
}

}  // namespace stokesls

#endif
