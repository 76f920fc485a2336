// Assembly and solution of the two sequential global least squares systems:
// step 1 couples the velocity-gradient tensor dofs with the pressure dofs
// through the residual of -nu div U + grad p = f plus eta/h_e-weighted face
// jump terms; step 2 recovers the velocity in the divergence-free space from
// the computed gradient. Face integrals are assembled once per face using
// the traces from both adjacent patches.
//
// Dof layout, step 1: tensor dofs [0, (d^2-1) E), pressure dofs
// [(d^2-1) E, d^2 E); the pressure zero-mean constraint is a dense row kept
// next to the matrix and appended as a Lagrange multiplier in the direct
// solver. Step 2: velocity dofs [0, d E).

#ifndef STOKESLS_ASSEMBLY_HPP
#define STOKESLS_ASSEMBLY_HPP

#include <Eigen/SparseCholesky>

#include <functional>

#include "stokesls/quadrature.hpp"
#include "stokesls/reconstruction.hpp"
#include "stokesls/sparse.hpp"

namespace stokesls {

struct SolverConfig {
  double nu = 1.0;   // viscosity (reciprocal Reynolds number)
  double eta = 1.0;  // step-1 face penalty
  double mu = 1.0;   // step-2 face penalty
  int order = 1;     // reconstruction order m
  int patch_size = 0;         // 0 -> tabulated default
  int quadrature_degree = 0;  // 0 -> 2m+2

  int quad() const { return quadrature_degree > 0 ? quadrature_degree : 2 * order + 2; }
  void validate() const {
    check(nu > 0.0 && eta > 0.0 && mu > 0.0, errc::config, "nu, eta and mu must be positive");
    check(order >= 1, errc::config, "order must be >= 1");
  }
};

template <int Dim>
struct ReconstructionSet {
  ReconstructionOperator<Dim> tensor;  // velocity gradient
  ReconstructionOperator<Dim> scalar;  // pressure
  ReconstructionOperator<Dim> vector;  // velocity
};

template <int Dim>
ReconstructionSet<Dim> build_reconstructions(const Mesh<Dim>& mesh,
                                             const std::vector<ElementPatch<Dim>>& patches,
                                             int m) {
  ReconstructionSet<Dim> ops;
  ops.tensor = build_tensor_reconstruction(mesh, patches, m);
  ops.scalar = build_scalar_reconstruction(mesh, patches, m);
  ops.vector = build_vector_reconstruction(mesh, patches, m);
  return ops;
}

/// Dirichlet data; grad_g must be supplied whenever step-1 boundary terms
/// are assembled (it enters through the tangential trace n x grad g).
template <int Dim>
struct BoundaryData {
  std::function<VecD<Dim>(const VecD<Dim>&)> g;
  std::function<MatD<Dim>(const VecD<Dim>&)> grad_g;  // row i = grad g_i
};

template <int Dim>
struct LeastSquaresSystem {
  CsrMatrix matrix;
  Eigen::VectorXd rhs;
  Eigen::VectorXd mean_constraint;  // dense pressure-mean row (step 1 only)
  double data_constant = 0.0;       // J(x) = x^T A x - 2 b^T x + data_constant
  int step = 1;
  int elements = 0;

  static constexpr int tensor_vpc = Dim * Dim - 1;
  int tensor_dof(int e, int t) const { return e * tensor_vpc + t; }
  int pressure_dof(int e) const { return tensor_vpc * elements + e; }
  int velocity_dof(int e, int c) const { return e * Dim + c; }
};

/// Value of the quadratic least squares functional at a dof vector.
template <int Dim>
double functional_value(const LeastSquaresSystem<Dim>& sys, const Eigen::VectorXd& x) {
  return x.dot(sys.matrix.multiply(x)) - 2.0 * sys.rhs.dot(x) + sys.data_constant;
}

namespace detail {

// Element-level adjacency: J ~ J' when they share a patch (volume terms) or
// appear in the union of the two patches of a common face (jump terms).
template <int Dim>
std::vector<std::vector<int>> element_adjacency(const Mesh<Dim>& mesh,
                                                const std::vector<ElementPatch<Dim>>& patches) {
  const int ne = mesh.element_count();
  std::vector<std::vector<int>> adj(ne);
  for (const auto& p : patches)
    for (int a : p.members)
      for (int b : p.members) adj[a].push_back(b);
  for (int f : mesh.interior_face_ids) {
    const auto& fc = mesh.faces[f];
    std::vector<int> u;
    for (int side = 0; side < 2; ++side)
      for (int m : patches[fc.element_ids[side]].members) u.push_back(m);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    for (int a : u)
      for (int b : u) adj[a].push_back(b);
  }
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return adj;
}

// Sorted union of two patches with per-side column offsets into the union
// dof numbering (vpc dofs per member).
struct PatchUnion {
  std::vector<int> members;
  std::array<std::vector<int>, 2> side_cols;
};

template <int Dim>
PatchUnion patch_union(const ElementPatch<Dim>& sp, const ElementPatch<Dim>& sm, int vpc) {
  PatchUnion u;
  u.members = sp.members;
  u.members.insert(u.members.end(), sm.members.begin(), sm.members.end());
  std::sort(u.members.begin(), u.members.end());
  u.members.erase(std::unique(u.members.begin(), u.members.end()), u.members.end());
  const ElementPatch<Dim>* side[2] = {&sp, &sm};
  for (int s = 0; s < 2; ++s) {
    u.side_cols[s].resize(side[s]->members.size());
    for (std::size_t i = 0; i < side[s]->members.size(); ++i)
      u.side_cols[s][i] = static_cast<int>(std::lower_bound(u.members.begin(), u.members.end(),
                                                            side[s]->members[i]) -
                                           u.members.begin()) *
                          vpc;
  }
  return u;
}

struct LocalContribution {
  struct Part {
    std::vector<int> dofs;
    Eigen::MatrixXd mat;   // may be empty (rhs-only)
    Eigen::VectorXd rhs;   // may be empty
  };
  std::vector<Part> parts;
  std::vector<int> mean_dofs;
  Eigen::VectorXd mean;
  double constant = 0.0;
};

// Batched compute-then-commit loop: contributions are computed in parallel
// per batch and merged serially in index order, so the result is bitwise
// independent of the worker count.
template <typename Work, typename Commit>
void batched(std::size_t n, Work&& work, Commit&& commit, std::size_t batch = 128) {
  std::vector<LocalContribution> buf;
  for (std::size_t lo = 0; lo < n; lo += batch) {
    const std::size_t len = std::min(batch, n - lo);
    buf.assign(len, LocalContribution{});
    parallel_for(len, [&](std::size_t i) { buf[i] = work(lo + i); });
    for (std::size_t i = 0; i < len; ++i) commit(buf[i]);
  }
}

template <int Dim>
void commit_contribution(LeastSquaresSystem<Dim>& sys, const LocalContribution& lb) {
  for (const auto& part : lb.parts) {
    if (part.mat.size() > 0) sys.matrix.add_block(part.dofs, part.dofs, part.mat);
    if (part.rhs.size() > 0)
      for (std::size_t i = 0; i < part.dofs.size(); ++i) sys.rhs[part.dofs[i]] += part.rhs[i];
  }
  for (std::size_t i = 0; i < lb.mean_dofs.size(); ++i)
    sys.mean_constraint[lb.mean_dofs[i]] += lb.mean[i];
  sys.data_constant += lb.constant;
}

// Per-dof value matrix (nq x |S| vpc) of one field component on one element.
template <int Dim>
Eigen::MatrixXd dof_values(const ReconstructionOperator<Dim>& op, int k,
                           const Eigen::MatrixXd& mono, int comp) {
  return mono * (op.basis.comp[comp].transpose() * op.coeff[k]);
}

template <int Dim>
Eigen::MatrixXd mono_matrix(const ReconstructionOperator<Dim>& op, int k,
                            const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts) {
  return Monomials<Dim>::values(
      op.basis.to_local(pts, op.mesh->elements[k].barycenter, op.mesh->elements[k].diameter),
      op.basis.order);
}

template <int Dim>
std::vector<int> tensor_dofs_of(const LeastSquaresSystem<Dim>& sys,
                                const std::vector<int>& members) {
  std::vector<int> dofs(members.size() * LeastSquaresSystem<Dim>::tensor_vpc);
  for (std::size_t i = 0; i < members.size(); ++i)
    for (int c = 0; c < LeastSquaresSystem<Dim>::tensor_vpc; ++c)
      dofs[i * LeastSquaresSystem<Dim>::tensor_vpc + c] = sys.tensor_dof(members[i], c);
  return dofs;
}

template <int Dim>
std::vector<int> pressure_dofs_of(const LeastSquaresSystem<Dim>& sys,
                                  const std::vector<int>& members) {
  std::vector<int> dofs(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) dofs[i] = sys.pressure_dof(members[i]);
  return dofs;
}

template <int Dim>
std::vector<int> velocity_dofs_of(const LeastSquaresSystem<Dim>& sys,
                                  const std::vector<int>& members) {
  std::vector<int> dofs(members.size() * Dim);
  for (std::size_t i = 0; i < members.size(); ++i)
    for (int c = 0; c < Dim; ++c) dofs[i * Dim + c] = sys.velocity_dof(members[i], c);
  return dofs;
}

}  // namespace detail

/// Step 1: assemble a_h^p / l_h^p over the tensor and pressure dofs.
template <int Dim>
LeastSquaresSystem<Dim> assemble_step1(const Mesh<Dim>& mesh,
                                       const std::vector<ElementPatch<Dim>>& patches,
                                       const ReconstructionSet<Dim>& ops,
                                       const SolverConfig& config,
                                       const std::function<VecD<Dim>(const VecD<Dim>&)>& f,
                                       const BoundaryData<Dim>& boundary) {
  config.validate();
  check(static_cast<bool>(f), errc::config, "step 1 requires the source field f");
  check(static_cast<bool>(boundary.grad_g), errc::config,
        "step 1 boundary terms require the analytic gradient of g");
  const int ne = mesh.element_count();
  constexpr int vpc = Dim * Dim - 1;
  const double nu = config.nu, eta = config.eta;
  const int qd = config.quad();

  LeastSquaresSystem<Dim> sys;
  sys.step = 1;
  sys.elements = ne;
  const int ndof = Dim * Dim * ne;

  const auto adjacency = detail::element_adjacency(mesh, patches);
  build_block_pattern(sys.matrix, ndof, adjacency, [&](int e) {
    std::vector<int> dofs(Dim * Dim);
    for (int t = 0; t < vpc; ++t) dofs[t] = sys.tensor_dof(e, t);
    dofs[vpc] = sys.pressure_dof(e);
    return dofs;
  });
  sys.rhs = Eigen::VectorXd::Zero(ndof);
  sys.mean_constraint = Eigen::VectorXd::Zero(ndof);

  const auto div_tables = divergence_tables(ops.tensor.basis);
  std::vector<Eigen::MatrixXd> grad_tables(Dim);
  for (int d = 0; d < Dim; ++d)
    grad_tables[d] = Monomials<Dim>::derivative(ops.scalar.basis.comp[0], d, config.order);

  // Volume terms: integral of (-nu div V + grad q) . (-nu div V' + grad q').
  detail::batched(
      ne,
      [&](std::size_t k) {
        const auto& patch = patches[k];
        const int s = static_cast<int>(patch.members.size());
        const int nt = s * vpc, np = s;
        const auto rule = element_rule(mesh, static_cast<int>(k), qd);
        const int nq = rule.size();
        const double hk = mesh.elements[k].diameter;

        const Eigen::MatrixXd mono_t = detail::mono_matrix(ops.tensor, k, rule.points);
        const Eigen::MatrixXd mono_s = detail::mono_matrix(ops.scalar, k, rule.points);

        Eigen::MatrixXd b(Dim * nq, nt + np);
        for (int i = 0; i < Dim; ++i) {
          b.block(i * nq, 0, nq, nt) =
              (-nu / hk) * (mono_t * (div_tables[i].transpose() * ops.tensor.coeff[k]));
          b.block(i * nq, nt, nq, np) =
              (1.0 / hk) * (mono_s * (grad_tables[i].transpose() * ops.scalar.coeff[k]));
        }
        Eigen::VectorXd fv(Dim * nq);
        detail::LocalContribution lb;
        for (int q = 0; q < nq; ++q) {
          const VecD<Dim> fq = f(rule.points.row(q).transpose());
          for (int i = 0; i < Dim; ++i) fv[i * nq + q] = fq[i];
          lb.constant += rule.weights[q] * fq.squaredNorm();
        }
        const Eigen::VectorXd sw = rule.weights.cwiseSqrt().replicate(Dim, 1);
        const Eigen::MatrixXd bw = sw.asDiagonal() * b;

        auto& part = lb.parts.emplace_back();
        part.dofs = detail::tensor_dofs_of(sys, patch.members);
        const auto pdofs = detail::pressure_dofs_of(sys, patch.members);
        part.dofs.insert(part.dofs.end(), pdofs.begin(), pdofs.end());
        part.mat = bw.transpose() * bw;
        part.rhs = bw.transpose() * (sw.asDiagonal() * fv);

        lb.mean_dofs = pdofs;
        lb.mean = detail::dof_values(ops.scalar, k, mono_s, 0).transpose() * rule.weights;
        return lb;
      },
      [&](const detail::LocalContribution& lb) { detail::commit_contribution(sys, lb); });

  // Interior faces: (eta/h_e) [ jump(q) . jump(q') + jump(n (x) V) : jump(n (x) V') ].
  detail::batched(
      mesh.interior_face_ids.size(),
      [&](std::size_t fi) {
        const int f = mesh.interior_face_ids[fi];
        const auto& fc = mesh.faces[f];
        const int kp = fc.element_ids[0], km = fc.element_ids[1];
        const auto rule = face_rule(mesh, f, qd);
        const int nq = rule.size();
        const double w_face = eta / fc.size;

        const Eigen::MatrixXd mono_tp = detail::mono_matrix(ops.tensor, kp, rule.points);
        const Eigen::MatrixXd mono_tm = detail::mono_matrix(ops.tensor, km, rule.points);
        const Eigen::MatrixXd mono_sp = detail::mono_matrix(ops.scalar, kp, rule.points);
        const Eigen::MatrixXd mono_sm = detail::mono_matrix(ops.scalar, km, rule.points);

        const auto ut = detail::patch_union(patches[kp], patches[km], vpc);
        const auto us = detail::patch_union(patches[kp], patches[km], 1);
        const int ncols_t = static_cast<int>(ut.members.size()) * vpc;
        const int ncols_s = static_cast<int>(us.members.size());

        // Full Frobenius contraction of jump(n (x) .) reduces to the plain
        // entrywise jumps because n is a unit vector.
        Eigen::MatrixXd jt = Eigen::MatrixXd::Zero(Dim * Dim * nq, ncols_t);
        for (int c = 0; c < Dim * Dim; ++c) {
          const Eigen::MatrixXd vp = detail::dof_values(ops.tensor, kp, mono_tp, c);
          const Eigen::MatrixXd vm = detail::dof_values(ops.tensor, km, mono_tm, c);
          for (std::size_t i = 0; i < patches[kp].members.size(); ++i)
            jt.block(c * nq, ut.side_cols[0][i], nq, vpc) += vp.middleCols(i * vpc, vpc);
          for (std::size_t i = 0; i < patches[km].members.size(); ++i)
            jt.block(c * nq, ut.side_cols[1][i], nq, vpc) -= vm.middleCols(i * vpc, vpc);
        }
        Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(nq, ncols_s);
        {
          const Eigen::MatrixXd vp = detail::dof_values(ops.scalar, kp, mono_sp, 0);
          const Eigen::MatrixXd vm = detail::dof_values(ops.scalar, km, mono_sm, 0);
          for (std::size_t i = 0; i < patches[kp].members.size(); ++i)
            jp.col(us.side_cols[0][i]) += vp.col(i);
          for (std::size_t i = 0; i < patches[km].members.size(); ++i)
            jp.col(us.side_cols[1][i]) -= vm.col(i);
        }

        const Eigen::VectorXd sw = (w_face * rule.weights).cwiseSqrt();
        const Eigen::MatrixXd jtw = sw.replicate(Dim * Dim, 1).asDiagonal() * jt;
        const Eigen::MatrixXd jpw = sw.asDiagonal() * jp;

        detail::LocalContribution lb;
        auto& tp = lb.parts.emplace_back();
        tp.dofs = detail::tensor_dofs_of(sys, ut.members);
        tp.mat = jtw.transpose() * jtw;
        auto& pp = lb.parts.emplace_back();
        pp.dofs = detail::pressure_dofs_of(sys, us.members);
        pp.mat = jpw.transpose() * jpw;
        return lb;
      },
      [&](const detail::LocalContribution& lb) { detail::commit_contribution(sys, lb); });

  // Boundary faces: (eta/h_e) (n x V - n x grad g) . (n x V' - n x grad g).
  const int cross_comps = Dim == 2 ? 1 : 3;
  detail::batched(
      mesh.boundary_face_ids.size(),
      [&](std::size_t fi) {
        const int f = mesh.boundary_face_ids[fi];
        const auto& fc = mesh.faces[f];
        const int k = fc.element_ids[0];
        const auto& patch = patches[k];
        const int s = static_cast<int>(patch.members.size());
        const auto rule = face_rule(mesh, f, qd);
        const int nq = rule.size();
        const double w_face = eta / fc.size;
        const VecD<Dim> n = fc.normal;

        const Eigen::MatrixXd mono_t = detail::mono_matrix(ops.tensor, k, rule.points);
        std::vector<Eigen::MatrixXd> entry(Dim * Dim);
        for (int c = 0; c < Dim * Dim; ++c) entry[c] = detail::dof_values(ops.tensor, k, mono_t, c);

        const int nrows = Dim * cross_comps * nq;
        Eigen::MatrixXd cm(nrows, s * vpc);
        Eigen::VectorXd data(nrows);
        std::vector<MatD<Dim>> gg(nq);
        for (int q = 0; q < nq; ++q) gg[q] = boundary.grad_g(rule.points.row(q).transpose());
        for (int i = 0; i < Dim; ++i) {
          if constexpr (Dim == 2) {
            cm.middleRows(i * nq, nq) = n.x() * entry[i * Dim + 1] - n.y() * entry[i * Dim + 0];
            for (int q = 0; q < nq; ++q)
              data[i * nq + q] = n.x() * gg[q](i, 1) - n.y() * gg[q](i, 0);
          } else {
            for (int a = 0; a < 3; ++a) {
              const int u = (a + 1) % 3, v = (a + 2) % 3;
              cm.middleRows((i * 3 + a) * nq, nq) =
                  n[u] * entry[i * Dim + v] - n[v] * entry[i * Dim + u];
              for (int q = 0; q < nq; ++q)
                data[(i * 3 + a) * nq + q] = n[u] * gg[q](i, v) - n[v] * gg[q](i, u);
            }
          }
        }
        const Eigen::VectorXd sw =
            (w_face * rule.weights).cwiseSqrt().replicate(Dim * cross_comps, 1);
        const Eigen::MatrixXd cw = sw.asDiagonal() * cm;
        const Eigen::VectorXd dw = sw.asDiagonal() * data;

        detail::LocalContribution lb;
        auto& part = lb.parts.emplace_back();
        part.dofs = detail::tensor_dofs_of(sys, patch.members);
        part.mat = cw.transpose() * cw;
        part.rhs = cw.transpose() * dw;
        lb.constant = dw.squaredNorm();
        return lb;
      },
      [&](const detail::LocalContribution& lb) { detail::commit_contribution(sys, lb); });

  return sys;
}

}  // namespace stokesls

#include "stokesls/solution.hpp"

#endif
