// Step-1/step-2 solves, the solved-state container and batched evaluation
// of the reconstructed solution fields. Included by assembly.hpp.

#ifndef STOKESLS_SOLUTION_HPP
#define STOKESLS_SOLUTION_HPP

namespace stokesls {

namespace detail {

// The Lagrange row makes the bordered matrix symmetric indefinite with one
// dense column. LDLT of the quasi-definite regularization (a small negative
// multiplier diagonal) factors quickly because AMD orders the dense column
// last; iterative refinement against the exact bordered operator removes
// the regularization error. Unsymmetric sparse LU is the fallback.
inline Eigen::VectorXd solve_direct_bordered(const CsrMatrix& a, const Eigen::VectorXd& rhs,
                                             const Eigen::VectorXd& constraint,
                                             SolveReport& report) {
  const int n = a.n;
  Eigen::SparseMatrix<double> exact(n + 1, n + 1);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(a.val.size() + 2 * n + 1);
    for (int r = 0; r < n; ++r)
      for (std::int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
        trip.emplace_back(r, a.col[k], a.val[k]);
    for (int r = 0; r < n; ++r) {
      if (constraint[r] == 0.0) continue;
      trip.emplace_back(r, n, constraint[r]);
      trip.emplace_back(n, r, constraint[r]);
    }
    exact.setFromTriplets(trip.begin(), trip.end());
  }
  Eigen::VectorXd ext(n + 1);
  ext.head(n) = rhs;
  ext[n] = 0.0;
  const double ext_norm = std::max(1e-300, ext.norm());

  Eigen::SparseMatrix<double> regularized = exact;
  regularized.coeffRef(n, n) = -1e-10 * a.max_abs();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(regularized);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd sol = ldlt.solve(ext);
    double rel = (exact * sol - ext).norm() / ext_norm;
    for (int it = 0; it < 8 && rel > 1e-13; ++it) {
      const Eigen::VectorXd r = ext - exact * sol;
      sol += ldlt.solve(r);
      rel = (exact * sol - ext).norm() / ext_norm;
    }
    if (rel <= 1e-10) {
      report = {0, rel, true};
      return sol.head(n);
    }
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(exact);
  check(lu.info() == Eigen::Success, errc::numeric,
        "bordered step-1 system is singular (factorization failed)");
  const Eigen::VectorXd sol = lu.solve(ext);
  report = {0, (exact * sol - ext).norm() / ext_norm, true};
  return sol.head(n);
}

inline Eigen::VectorXd solve_direct_spd(const CsrMatrix& a, const Eigen::VectorXd& rhs,
                                        SolveReport& report) {
  Eigen::SparseMatrix<double> s = a.to_eigen();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(s);
  check(ldlt.info() == Eigen::Success, errc::numeric, "step-2 factorization failed");
  const Eigen::VectorXd sol = ldlt.solve(rhs);
  report = {0, (s * sol - rhs).norm() / std::max(1e-300, rhs.norm()), true};
  return sol;
}

}  // namespace detail

/// Solves the bordered step-1 system. Direct factorization up to the dof
/// cutoff, Jacobi-CG with the constant-pressure mode projected out above it;
/// either way the returned pressure has zero mean.
template <int Dim>
std::pair<Eigen::VectorXd, SolveReport> solve_step1(const LeastSquaresSystem<Dim>& sys) {
  check(sys.step == 1, errc::config, "solve_step1 expects a step-1 system");
  SolveReport report;
  if (sys.matrix.n + 1 <= direct_solver_dof_limit) {
    Eigen::VectorXd x =
        detail::solve_direct_bordered(sys.matrix, sys.rhs, sys.mean_constraint, report);
    return {std::move(x), report};
  }
  Eigen::VectorXd nullspace = Eigen::VectorXd::Zero(sys.matrix.n);
  for (int e = 0; e < sys.elements; ++e) nullspace[sys.pressure_dof(e)] = 1.0;
  Eigen::VectorXd x = conjugate_gradient(sys.matrix, sys.rhs, nullspace, 1e-12, report);
  const double shift = sys.mean_constraint.dot(x) / sys.mean_constraint.dot(nullspace);
  x -= shift * nullspace;
  return {std::move(x), report};
}

/// Solves the SPD step-2 system under the same size policy.
template <int Dim>
std::pair<Eigen::VectorXd, SolveReport> solve_step2(const LeastSquaresSystem<Dim>& sys) {
  check(sys.step == 2, errc::config, "solve_step2 expects a step-2 system");
  SolveReport report;
  if (sys.matrix.n <= direct_solver_dof_limit) {
    Eigen::VectorXd x = detail::solve_direct_spd(sys.matrix, sys.rhs, report);
    return {std::move(x), report};
  }
  Eigen::VectorXd x = conjugate_gradient(sys.matrix, sys.rhs, Eigen::VectorXd(), 1e-12, report);
  return {std::move(x), report};
}

template <int Dim>
struct StokesSolution {
  const Mesh<Dim>* mesh = nullptr;
  const ReconstructionSet<Dim>* ops = nullptr;
  Eigen::VectorXd gradient_dofs;  // (d^2-1) per element
  Eigen::VectorXd pressure_dofs;  // 1 per element
  Eigen::VectorXd velocity_dofs;  // d per element

  // Local basis coefficients per element, cached after each solve.
  std::vector<Eigen::VectorXd> tensor_coeffs, pressure_coeffs, velocity_coeffs;

  void cache_step1() {
    const int ne = mesh->element_count();
    tensor_coeffs.resize(ne);
    pressure_coeffs.resize(ne);
    for (int k = 0; k < ne; ++k) {
      tensor_coeffs[k] = local_coefficients(ops->tensor, k, gradient_dofs);
      pressure_coeffs[k] = local_coefficients(ops->scalar, k, pressure_dofs);
    }
  }
  void cache_step2() {
    const int ne = mesh->element_count();
    velocity_coeffs.resize(ne);
    for (int k = 0; k < ne; ++k)
      velocity_coeffs[k] = local_coefficients(ops->vector, k, velocity_dofs);
  }
};

/// Batched evaluation of a locally reconstructed field: every basis
/// component at the given points (nq x ncomp).
template <int Dim>
Eigen::MatrixXd eval_components(const ReconstructionOperator<Dim>& op, int k,
                                const Eigen::VectorXd& coeffs,
                                const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts) {
  const Eigen::MatrixXd mono = detail::mono_matrix(op, k, pts);
  Eigen::MatrixXd out(pts.rows(), op.basis.ncomp);
  for (int c = 0; c < op.basis.ncomp; ++c)
    out.col(c) = mono * (op.basis.comp[c].transpose() * coeffs);
  return out;
}

/// Jacobian entries d u_i / d x_j (columns i*Dim+j) of a vector field, or
/// the gradient (columns j) of a scalar field.
template <int Dim>
Eigen::MatrixXd eval_jacobian(const ReconstructionOperator<Dim>& op, int k,
                              const Eigen::VectorXd& coeffs,
                              const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts) {
  const Eigen::MatrixXd mono = detail::mono_matrix(op, k, pts);
  const double h = op.mesh->elements[k].diameter;
  const int nc = op.basis.ncomp;
  Eigen::MatrixXd out(pts.rows(), nc * Dim);
  for (int c = 0; c < nc; ++c)
    for (int j = 0; j < Dim; ++j)
      out.col(c * Dim + j) =
          mono *
          (Monomials<Dim>::derivative(op.basis.comp[c], j, op.basis.order).transpose() * coeffs) /
          h;
  return out;
}

/// Row-wise divergence of a tensor field (columns = rows of the tensor).
template <int Dim>
Eigen::MatrixXd eval_tensor_divergence(const ReconstructionOperator<Dim>& op, int k,
                                       const Eigen::VectorXd& coeffs,
                                       const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts) {
  const Eigen::MatrixXd mono = detail::mono_matrix(op, k, pts);
  const double h = op.mesh->elements[k].diameter;
  const auto tables = divergence_tables(op.basis);
  Eigen::MatrixXd out(pts.rows(), Dim);
  for (int i = 0; i < Dim; ++i) out.col(i) = mono * (tables[i].transpose() * coeffs) / h;
  return out;
}

/// Step 2: assemble a_h^u / l_h^u over the velocity dofs, with the step-1
/// gradient entering the right-hand side.
template <int Dim>
LeastSquaresSystem<Dim> assemble_step2(const Mesh<Dim>& mesh,
                                       const std::vector<ElementPatch<Dim>>& patches,
                                       const ReconstructionSet<Dim>& ops,
                                       const SolverConfig& config,
                                       const StokesSolution<Dim>& step1,
                                       const BoundaryData<Dim>& boundary) {
  config.validate();
  check(static_cast<bool>(boundary.g), errc::config, "step 2 requires boundary data g");
  check(!step1.tensor_coeffs.empty(), errc::config,
        "step 2 requires the cached step-1 gradient solution");
  const int ne = mesh.element_count();
  const double mu = config.mu;
  const int qd = config.quad();

  LeastSquaresSystem<Dim> sys;
  sys.step = 2;
  sys.elements = ne;
  const int ndof = Dim * ne;

  const auto adjacency = detail::element_adjacency(mesh, patches);
  build_block_pattern(sys.matrix, ndof, adjacency,
                      [&](int e) { return detail::velocity_dofs_of(sys, {e}); });
  sys.rhs = Eigen::VectorXd::Zero(ndof);

  std::vector<std::vector<Eigen::MatrixXd>> deriv_tables(Dim);
  for (int i = 0; i < Dim; ++i) {
    deriv_tables[i].resize(Dim);
    for (int j = 0; j < Dim; ++j)
      deriv_tables[i][j] = Monomials<Dim>::derivative(ops.vector.basis.comp[i], j, config.order);
  }

  // Volume: integral of grad u : grad v, with integral of grad v : U_h on
  // the right-hand side.
  detail::batched(
      ne,
      [&](std::size_t k) {
        const auto& patch = patches[k];
        const int nloc = static_cast<int>(patch.members.size()) * Dim;
        const auto rule = element_rule(mesh, static_cast<int>(k), qd);
        const int nq = rule.size();
        const double hk = mesh.elements[k].diameter;
        const Eigen::MatrixXd mono = detail::mono_matrix(ops.vector, k, rule.points);

        Eigen::MatrixXd b(Dim * Dim * nq, nloc);
        for (int i = 0; i < Dim; ++i)
          for (int j = 0; j < Dim; ++j)
            b.middleRows((i * Dim + j) * nq, nq) =
                (mono * (deriv_tables[i][j].transpose() * ops.vector.coeff[k])) / hk;

        const Eigen::MatrixXd uh =
            eval_components(ops.tensor, static_cast<int>(k), step1.tensor_coeffs[k], rule.points);
        Eigen::VectorXd uv(Dim * Dim * nq);
        detail::LocalContribution lb;
        for (int c = 0; c < Dim * Dim; ++c) uv.segment(c * nq, nq) = uh.col(c);
        for (int q = 0; q < nq; ++q)
          lb.constant += rule.weights[q] * uh.row(q).squaredNorm();

        const Eigen::VectorXd sw = rule.weights.cwiseSqrt().replicate(Dim * Dim, 1);
        const Eigen::MatrixXd bw = sw.asDiagonal() * b;
        auto& part = lb.parts.emplace_back();
        part.dofs = detail::velocity_dofs_of(sys, patch.members);
        part.mat = bw.transpose() * bw;
        part.rhs = bw.transpose() * (sw.asDiagonal() * uv);
        return lb;
      },
      [&](const detail::LocalContribution& lb) { detail::commit_contribution(sys, lb); });

  // Interior faces: (mu/h_e) jump(n (x) u) : jump(n (x) v) = entry jumps.
  detail::batched(
      mesh.interior_face_ids.size(),
      [&](std::size_t fi) {
        const int f = mesh.interior_face_ids[fi];
        const auto& fc = mesh.faces[f];
        const int kp = fc.element_ids[0], km = fc.element_ids[1];
        const auto rule = face_rule(mesh, f, qd);
        const int nq = rule.size();
        const double w_face = mu / fc.size;

        const Eigen::MatrixXd mono_p = detail::mono_matrix(ops.vector, kp, rule.points);
        const Eigen::MatrixXd mono_m = detail::mono_matrix(ops.vector, km, rule.points);
        const auto u = detail::patch_union(patches[kp], patches[km], Dim);
        const int ncols = static_cast<int>(u.members.size()) * Dim;

        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(Dim * nq, ncols);
        for (int c = 0; c < Dim; ++c) {
          const Eigen::MatrixXd vp = detail::dof_values(ops.vector, kp, mono_p, c);
          const Eigen::MatrixXd vm = detail::dof_values(ops.vector, km, mono_m, c);
          for (std::size_t i = 0; i < patches[kp].members.size(); ++i)
            j.block(c * nq, u.side_cols[0][i], nq, Dim) += vp.middleCols(i * Dim, Dim);
          for (std::size_t i = 0; i < patches[km].members.size(); ++i)
            j.block(c * nq, u.side_cols[1][i], nq, Dim) -= vm.middleCols(i * Dim, Dim);
        }
        const Eigen::VectorXd sw = (w_face * rule.weights).cwiseSqrt().replicate(Dim, 1);
        const Eigen::MatrixXd jw = sw.asDiagonal() * j;

        detail::LocalContribution lb;
        auto& part = lb.parts.emplace_back();
        part.dofs = detail::velocity_dofs_of(sys, u.members);
        part.mat = jw.transpose() * jw;
        return lb;
      },
      [&](const detail::LocalContribution& lb) { detail::commit_contribution(sys, lb); });

  // Boundary faces: (mu/h_e) (u - g) . (v - g).
  detail::batched(
      mesh.boundary_face_ids.size(),
      [&](std::size_t fi) {
        const int f = mesh.boundary_face_ids[fi];
        const auto& fc = mesh.faces[f];
        const int k = fc.element_ids[0];
        const auto& patch = patches[k];
        const int nloc = static_cast<int>(patch.members.size()) * Dim;
        const auto rule = face_rule(mesh, f, qd);
        const int nq = rule.size();
        const double w_face = mu / fc.size;

        const Eigen::MatrixXd mono = detail::mono_matrix(ops.vector, k, rule.points);
        Eigen::MatrixXd vm(Dim * nq, nloc);
        for (int c = 0; c < Dim; ++c)
          vm.middleRows(c * nq, nq) = detail::dof_values(ops.vector, k, mono, c);
        Eigen::VectorXd gv(Dim * nq);
        detail::LocalContribution lb;
        for (int q = 0; q < nq; ++q) {
          const VecD<Dim> gq = boundary.g(rule.points.row(q).transpose());
          for (int c = 0; c < Dim; ++c) gv[c * nq + q] = gq[c];
          lb.constant += w_face * rule.weights[q] * gq.squaredNorm();
        }
        const Eigen::VectorXd sw = (w_face * rule.weights).cwiseSqrt().replicate(Dim, 1);
        const Eigen::MatrixXd vw = sw.asDiagonal() * vm;
        auto& part = lb.parts.emplace_back();
        part.dofs = detail::velocity_dofs_of(sys, patch.members);
        part.mat = vw.transpose() * vw;
        part.rhs = vw.transpose() * (sw.asDiagonal() * gv);
        return lb;
      },
      [&](const detail::LocalContribution& lb) { detail::commit_contribution(sys, lb); });

  return sys;
}

/// Runs both sequential solves and returns the populated solution.
template <int Dim>
StokesSolution<Dim> solve_stokes(const Mesh<Dim>& mesh,
                                 const std::vector<ElementPatch<Dim>>& patches,
                                 const ReconstructionSet<Dim>& ops, const SolverConfig& config,
                                 const std::function<VecD<Dim>(const VecD<Dim>&)>& f,
                                 const BoundaryData<Dim>& boundary) {
  StokesSolution<Dim> sol;
  sol.mesh = &mesh;
  sol.ops = &ops;
  const auto sys1 = assemble_step1(mesh, patches, ops, config, f, boundary);
  auto [x1, rep1] = solve_step1(sys1);
  const int vpc = Dim * Dim - 1;
  sol.gradient_dofs = x1.head(vpc * mesh.element_count());
  sol.pressure_dofs = x1.tail(mesh.element_count());
  sol.cache_step1();
  const auto sys2 = assemble_step2(mesh, patches, ops, config, sol, boundary);
  auto [x2, rep2] = solve_step2(sys2);
  sol.velocity_dofs = std::move(x2);
  sol.cache_step2();
  return sol;
}

/// Max |div u_h| over all element quadrature points, computed from the
/// Jacobian trace (numerical cancellation, not the symbolic zero tables),
/// together with max |grad u_h| for the relative bound.
template <int Dim>
std::pair<double, double> max_velocity_divergence(const Mesh<Dim>& mesh,
                                                  const StokesSolution<Dim>& sol,
                                                  int quad_degree) {
  double max_div = 0.0, max_grad = 0.0;
  for (int k = 0; k < mesh.element_count(); ++k) {
    const auto rule = element_rule(mesh, k, quad_degree);
    const Eigen::MatrixXd jac =
        eval_jacobian(sol.ops->vector, k, sol.velocity_coeffs[k], rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      double div = 0.0;
      for (int i = 0; i < Dim; ++i) div += jac(q, i * Dim + i);
      max_div = std::max(max_div, std::abs(div));
      max_grad = std::max(max_grad, jac.row(q).cwiseAbs().maxCoeff());
    }
  }
  return {max_div, max_grad};
}

}  // namespace stokesls

#endif
