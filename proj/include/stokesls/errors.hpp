// Error measures: the two mesh-dependent energy norms for (U, p) and u,
// L^2 errors for all fields, and convergence orders across refinements.
// Exact fields enter through analytic callbacks and are evaluated pointwise
// with the same quadrature the assembly uses; the exact solution has no
// jumps, so interior face terms reduce to the discrete trace jumps.

#ifndef STOKESLS_ERRORS_HPP
#define STOKESLS_ERRORS_HPP

#include "stokesls/assembly.hpp"

namespace stokesls {

struct ErrorReport {
  double h = 0.0;
  int elements = 0;
  double energy_Up = 0.0;  // |||U - U_h||| + |||p - p_h|||
  double l2_U = 0.0;
  double l2_p = 0.0;
  double energy_u = 0.0;
  double l2_u = 0.0;
  int dofs_step1 = 0;
  int dofs_step2 = 0;
};

/// Names shared by the CSV emitter and the order bookkeeping.
inline const std::vector<std::string>& error_measure_names() {
  static const std::vector<std::string> names = {"energy_Up", "l2_U", "l2_p", "energy_u", "l2_u"};
  return names;
}

inline std::vector<double> error_measures(const ErrorReport& r) {
  return {r.energy_Up, r.l2_U, r.l2_p, r.energy_u, r.l2_u};
}

namespace detail {

// Interior-face jump of one discrete field: sum of h_e^-1 L2 norms squared
// of the (+) minus (-) traces over all components.
template <int Dim, typename CoeffOf>
double interior_jump_sq(const Mesh<Dim>& mesh, const ReconstructionOperator<Dim>& op,
                        CoeffOf&& coeff_of, int qd) {
  double total = 0.0;
  for (int f : mesh.interior_face_ids) {
    const auto& fc = mesh.faces[f];
    const int kp = fc.element_ids[0], km = fc.element_ids[1];
    const auto rule = face_rule(mesh, f, qd);
    const Eigen::MatrixXd vp = eval_components(op, kp, coeff_of(kp), rule.points);
    const Eigen::MatrixXd vm = eval_components(op, km, coeff_of(km), rule.points);
    const Eigen::MatrixXd d = vp - vm;
    total += (rule.weights.transpose() * d.cwiseAbs2()).sum() / fc.size;
  }
  return total;
}

}  // namespace detail

/// |||U - U_h||| + |||p - p_h|||.
template <int Dim>
double energy_norm_Up(const Mesh<Dim>& mesh, const StokesSolution<Dim>& sol,
                      const std::function<MatD<Dim>(const VecD<Dim>&)>& exact_gradient,
                      const std::function<VecD<Dim>(const VecD<Dim>&)>& exact_gradient_div,
                      const std::function<VecD<Dim>(const VecD<Dim>&)>& exact_pressure_gradient,
                      int qd) {
  double u_part = 0.0, p_part = 0.0;
  for (int k = 0; k < mesh.element_count(); ++k) {
    const auto rule = element_rule(mesh, k, qd);
    const Eigen::MatrixXd divs =
        eval_tensor_divergence(sol.ops->tensor, k, sol.tensor_coeffs[k], rule.points);
    const Eigen::MatrixXd gradp =
        eval_jacobian(sol.ops->scalar, k, sol.pressure_coeffs[k], rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const VecD<Dim> x = rule.points.row(q).transpose();
      u_part += rule.weights[q] *
                (divs.row(q).transpose() - exact_gradient_div(x)).squaredNorm();
      p_part += rule.weights[q] *
                (gradp.row(q).transpose() - exact_pressure_gradient(x)).squaredNorm();
    }
  }
  u_part += detail::interior_jump_sq(mesh, sol.ops->tensor,
                                     [&](int k) { return sol.tensor_coeffs[k]; }, qd);
  p_part += detail::interior_jump_sq(mesh, sol.ops->scalar,
                                     [&](int k) { return sol.pressure_coeffs[k]; }, qd);
  // Boundary: h_e^-1 | n x (U_h - U) |^2, rows crossed with the normal.
  for (int f : mesh.boundary_face_ids) {
    const auto& fc = mesh.faces[f];
    const int k = fc.element_ids[0];
    const auto rule = face_rule(mesh, f, qd);
    const Eigen::MatrixXd vals = eval_components(sol.ops->tensor, k, sol.tensor_coeffs[k],
                                                 rule.points);
    const VecD<Dim> n = fc.normal;
    for (int q = 0; q < rule.size(); ++q) {
      const VecD<Dim> x = rule.points.row(q).transpose();
      const MatD<Dim> exact = exact_gradient(x);
      MatD<Dim> diff;
      for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j) diff(i, j) = vals(q, i * Dim + j) - exact(i, j);
      double cross_sq = 0.0;
      for (int i = 0; i < Dim; ++i) {
        const VecD<Dim> row = diff.row(i).transpose();
        if constexpr (Dim == 2) {
          const double c = n.x() * row.y() - n.y() * row.x();
          cross_sq += c * c;
        } else {
          cross_sq += n.cross(row).squaredNorm();
        }
      }
      u_part += rule.weights[q] * cross_sq / fc.size;
    }
  }
  return std::sqrt(u_part) + std::sqrt(p_part);
}

/// |||u - u_h||| (gradient volume term, interior jumps, boundary trace).
template <int Dim>
double energy_norm_u(const Mesh<Dim>& mesh, const StokesSolution<Dim>& sol,
                     const std::function<VecD<Dim>(const VecD<Dim>&)>& exact_velocity,
                     const std::function<MatD<Dim>(const VecD<Dim>&)>& exact_gradient, int qd) {
  double total = 0.0;
  for (int k = 0; k < mesh.element_count(); ++k) {
    const auto rule = element_rule(mesh, k, qd);
    const Eigen::MatrixXd jac =
        eval_jacobian(sol.ops->vector, k, sol.velocity_coeffs[k], rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const VecD<Dim> x = rule.points.row(q).transpose();
      const MatD<Dim> exact = exact_gradient(x);
      double s = 0.0;
      for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j) {
          const double d = jac(q, i * Dim + j) - exact(i, j);
          s += d * d;
        }
      total += rule.weights[q] * s;
    }
  }
  total += detail::interior_jump_sq(mesh, sol.ops->vector,
                                    [&](int k) { return sol.velocity_coeffs[k]; }, qd);
  for (int f : mesh.boundary_face_ids) {
    const auto& fc = mesh.faces[f];
    const int k = fc.element_ids[0];
    const auto rule = face_rule(mesh, f, qd);
    const Eigen::MatrixXd vals =
        eval_components(sol.ops->vector, k, sol.velocity_coeffs[k], rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const VecD<Dim> x = rule.points.row(q).transpose();
      total += rule.weights[q] *
               (vals.row(q).transpose() - exact_velocity(x)).squaredNorm() / fc.size;
    }
  }
  return std::sqrt(total);
}

enum class FieldKind { gradient, pressure, velocity };

/// Composite-quadrature L^2 error of one solution field.
template <int Dim, typename Exact>
double l2_error(const Mesh<Dim>& mesh, const StokesSolution<Dim>& sol, FieldKind kind,
                Exact&& exact, int qd) {
  double total = 0.0;
  for (int k = 0; k < mesh.element_count(); ++k) {
    const auto rule = element_rule(mesh, k, qd);
    Eigen::MatrixXd vals;
    switch (kind) {
      case FieldKind::gradient:
        vals = eval_components(sol.ops->tensor, k, sol.tensor_coeffs[k], rule.points);
        break;
      case FieldKind::pressure:
        vals = eval_components(sol.ops->scalar, k, sol.pressure_coeffs[k], rule.points);
        break;
      case FieldKind::velocity:
        vals = eval_components(sol.ops->vector, k, sol.velocity_coeffs[k], rule.points);
        break;
    }
    for (int q = 0; q < rule.size(); ++q) {
      const VecD<Dim> x = rule.points.row(q).transpose();
      const Eigen::VectorXd e = exact(x);
      total += rule.weights[q] * (vals.row(q).transpose() - e).squaredNorm();
    }
  }
  return std::sqrt(total);
}

/// Pairwise convergence orders log(e_prev/e_curr)/log(h_prev/h_curr) plus
/// the least-squares slope of log e against log h.
struct ConvergenceOrders {
  std::vector<std::vector<double>> pairwise;  // [measure][row-1]
  std::vector<double> slope;                  // [measure]
};

inline ConvergenceOrders convergence_orders(const std::vector<ErrorReport>& reports) {
  check(reports.size() >= 2, errc::config, "convergence orders need at least two reports");
  for (std::size_t i = 1; i < reports.size(); ++i)
    check(reports[i].h < reports[i - 1].h, errc::config,
          "mesh sizes must be strictly decreasing");
  const int nm = static_cast<int>(error_measure_names().size());
  ConvergenceOrders out;
  out.pairwise.assign(nm, {});
  out.slope.assign(nm, 0.0);
  for (int m = 0; m < nm; ++m) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const double e = error_measures(reports[i])[m];
      if (i > 0) {
        const double ep = error_measures(reports[i - 1])[m];
        out.pairwise[m].push_back(std::log(ep / e) / std::log(reports[i - 1].h / reports[i].h));
      }
      const double lx = std::log(reports[i].h), ly = std::log(std::max(e, 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    out.slope[m] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return out;
}

}  // namespace stokesls

#endif
