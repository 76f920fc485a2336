// Patch reconstruction operators: per element, the constrained discrete
// least squares problems for scalar (P_m), divergence-free vector and
// curl-free trace-free tensor polynomials, stored as coefficient matrices
// mapping patch nodal values to local basis coefficients.
//
// The collocation constraint q(x_K) = g(x_K) is eliminated by substitution:
// the constant basis fields carry the owner's nodal values and the
// remaining (higher) basis functions vanish at x_K, so the free coefficients
// solve an unconstrained least squares system over the other patch members.
// The stored matrix is the bordered form
//     [ I          0 ]
//     [ -M 1 x I   M ]
// with M the (weighted) pseudoinverse of the patch design matrix. For the
// tensor problem the rows and data of the independent diagonal entries are
// scaled by 2, matching the published coefficient-matrix construction.

#ifndef STOKESLS_RECONSTRUCTION_HPP
#define STOKESLS_RECONSTRUCTION_HPP

#include "stokesls/parallel.hpp"
#include "stokesls/patch.hpp"
#include "stokesls/poly_basis.hpp"

namespace stokesls {

template <int Dim>
struct ReconstructionOperator {
  BasisKind kind = BasisKind::scalar;
  int order = 0;
  int values_per_cell = 1;  // nodal values per patch member
  PolyBasis<Dim> basis;     // shared tables; per-element center/scale from the mesh

  /// coeff[K]: (basis.count() x |S(K)|*values_per_cell), columns ordered by
  /// patch member (owner first), then by nodal component.
  std::vector<Eigen::MatrixXd> coeff;

  const Mesh<Dim>* mesh = nullptr;
  const std::vector<ElementPatch<Dim>>* patches = nullptr;

  int nodal_size() const { return values_per_cell * mesh->element_count(); }

  /// Global nodal index of component c attached to element j.
  int nodal_index(int j, int c) const { return j * values_per_cell + c; }
};

namespace detail {

template <int Dim>
int values_per_cell(BasisKind kind) {
  switch (kind) {
    case BasisKind::scalar: return 1;
    case BasisKind::divfree_vector: return Dim;
    case BasisKind::curlfree_tracefree_tensor: return Dim * Dim - 1;
  }
  return 0;
}

// Component index (into the basis ncomp layout) carrying nodal value c.
template <int Dim>
int nodal_component(BasisKind kind, int c) {
  if (kind == BasisKind::curlfree_tracefree_tensor) {
    const auto order = tracefree_entry_order<Dim>();
    return order[c].first * Dim + order[c].second;
  }
  return c;
}

template <int Dim>
double nodal_weight(BasisKind kind, int c) {
  // Diagonal entries of the trace-free parametrization appear twice in the
  // Frobenius residual; the published construction scales their rows and
  // data by 2.
  return (kind == BasisKind::curlfree_tracefree_tensor && c < Dim - 1) ? 2.0 : 1.0;
}

template <int Dim>
ReconstructionOperator<Dim> build_reconstruction(const Mesh<Dim>& mesh,
                                                 const std::vector<ElementPatch<Dim>>& patches,
                                                 int m, BasisKind kind) {
  check(static_cast<int>(patches.size()) == mesh.element_count(), errc::config,
        "patch list does not match the mesh");
  ReconstructionOperator<Dim> op;
  op.kind = kind;
  op.order = m;
  op.values_per_cell = values_per_cell<Dim>(kind);
  switch (kind) {
    case BasisKind::scalar: op.basis = scalar_basis<Dim>(m); break;
    case BasisKind::divfree_vector: op.basis = divfree_basis<Dim>(m); break;
    case BasisKind::curlfree_tracefree_tensor: op.basis = curlfree_tracefree_basis<Dim>(m); break;
  }
  op.mesh = &mesh;
  op.patches = &patches;

  const int nfunc = op.basis.count();
  const int nconst = op.basis.constant_count();
  const int nfree = nfunc - nconst;
  const int vpc = op.values_per_cell;
  check(nconst == vpc, errc::internal, "constant fields must match the nodal parametrization");

  for (int k = 0; k < mesh.element_count(); ++k)
    check(!patches[k].members.empty() && patches[k].members[0] == patches[k].owner &&
              patches[k].owner == k,
          errc::config, "patch members must lead with the owner");

  op.coeff.resize(mesh.element_count());
  std::vector<std::string> failures(mesh.element_count());
  parallel_for(mesh.element_count(), [&](std::size_t k) {
    const ElementPatch<Dim>& patch = patches[k];
    const int s = static_cast<int>(patch.members.size());
    const VecD<Dim> xk = mesh.elements[k].barycenter;
    const double hk = mesh.elements[k].diameter;

    Eigen::Matrix<double, Eigen::Dynamic, Dim> pts(s - 1, Dim);
    for (int i = 1; i < s; ++i) pts.row(i - 1) = patch.collocation_points[i].transpose();
    const auto vals = basis_values(op.basis, pts, xk, hk);

    const int rows = (s - 1) * vpc;
    Eigen::MatrixXd a(rows, nfree);
    Eigen::MatrixXd data_scale = Eigen::MatrixXd::Zero(rows, rows);
    for (int i = 1; i < s; ++i)
      for (int c = 0; c < vpc; ++c) {
        const int r = (i - 1) * vpc + c;
        const double w = nodal_weight<Dim>(kind, c);
        a.row(r) = w * vals[nodal_component<Dim>(kind, c)].row(i - 1).tail(nfree);
        data_scale(r, r) = w;
      }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < nfree) {
      failures[k] = "patch of element " + std::to_string(k) +
                    " yields a rank-deficient least squares problem (unisolvence violated)";
      return;
    }
    const Eigen::MatrixXd m_mat = qr.solve(data_scale);  // nfree x rows

    Eigen::MatrixXd c_mat = Eigen::MatrixXd::Zero(nfunc, s * vpc);
    for (int c = 0; c < vpc; ++c) c_mat(c, c) = 1.0;  // owner carries the constants
    for (int i = 1; i < s; ++i)
      for (int c = 0; c < vpc; ++c) {
        const auto col = m_mat.col((i - 1) * vpc + c);
        c_mat.block(nconst, i * vpc + c, nfree, 1) = col;
        c_mat.block(nconst, c, nfree, 1) -= col;  // -M 1 block
      }
    op.coeff[k] = std::move(c_mat);
  });
  for (const auto& f : failures)
    if (!f.empty()) fail(errc::numeric, f);
  return op;
}

}  // namespace detail

template <int Dim>
ReconstructionOperator<Dim> build_scalar_reconstruction(
    const Mesh<Dim>& mesh, const std::vector<ElementPatch<Dim>>& patches, int m) {
  check(m >= 1, errc::config, "reconstruction order must be >= 1");
  return detail::build_reconstruction(mesh, patches, m, BasisKind::scalar);
}

template <int Dim>
ReconstructionOperator<Dim> build_vector_reconstruction(
    const Mesh<Dim>& mesh, const std::vector<ElementPatch<Dim>>& patches, int m) {
  check(m >= 1, errc::config, "reconstruction order must be >= 1");
  return detail::build_reconstruction(mesh, patches, m, BasisKind::divfree_vector);
}

template <int Dim>
ReconstructionOperator<Dim> build_tensor_reconstruction(
    const Mesh<Dim>& mesh, const std::vector<ElementPatch<Dim>>& patches, int m) {
  check(m >= 1, errc::config, "reconstruction order must be >= 1");
  return detail::build_reconstruction(mesh, patches, m, BasisKind::curlfree_tracefree_tensor);
}

/// Local coefficients on element K for the given global nodal vector.
template <int Dim>
Eigen::VectorXd local_coefficients(const ReconstructionOperator<Dim>& op, int k,
                                   const Eigen::VectorXd& nodal) {
  const auto& patch = (*op.patches)[k];
  const int vpc = op.values_per_cell;
  Eigen::VectorXd gathered(patch.members.size() * vpc);
  for (std::size_t i = 0; i < patch.members.size(); ++i)
    for (int c = 0; c < vpc; ++c)
      gathered[i * vpc + c] = nodal[op.nodal_index(patch.members[i], c)];
  return op.coeff[k] * gathered;
}

/// Values at pts of every global basis function supported on element K
/// (one column per local degree of freedom, i.e. per patch member and nodal
/// component). comp selects the field component in basis layout.
template <int Dim>
Eigen::MatrixXd global_basis_values(const ReconstructionOperator<Dim>& op, int k,
                                    const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts,
                                    int comp) {
  const auto vals =
      basis_values(op.basis, pts, op.mesh->elements[k].barycenter, op.mesh->elements[k].diameter);
  return vals[comp] * op.coeff[k];
}

/// A reconstructed polynomial restricted to one element.
template <int Dim>
struct LocalField {
  const PolyBasis<Dim>* basis = nullptr;
  VecD<Dim> center = VecD<Dim>::Zero();
  double scale = 1.0;
  Eigen::VectorXd coeffs;

  Eigen::MatrixXd monomials(const VecD<Dim>& x) const {
    Eigen::Matrix<double, 1, Dim> row = x.transpose();
    Eigen::Matrix<double, Eigen::Dynamic, Dim> pts = row;
    return Monomials<Dim>::values(basis->to_local(pts, center, scale), basis->order);
  }

  double scalar(const VecD<Dim>& x) const {
    return (monomials(x) * basis->comp[0].transpose() * coeffs)(0);
  }
  VecD<Dim> vector(const VecD<Dim>& x) const {
    const Eigen::MatrixXd mono = monomials(x);
    VecD<Dim> v;
    for (int c = 0; c < Dim; ++c) v[c] = (mono * basis->comp[c].transpose() * coeffs)(0);
    return v;
  }
  MatD<Dim> tensor(const VecD<Dim>& x) const {
    const Eigen::MatrixXd mono = monomials(x);
    MatD<Dim> t;
    for (int i = 0; i < Dim; ++i)
      for (int j = 0; j < Dim; ++j)
        t(i, j) = (mono * basis->comp[i * Dim + j].transpose() * coeffs)(0);
    return t;
  }
  /// Gradient of a scalar field / Jacobian rows of a vector field.
  VecD<Dim> scalar_gradient(const VecD<Dim>& x) const {
    const Eigen::MatrixXd mono = monomials(x);
    VecD<Dim> g;
    for (int d = 0; d < Dim; ++d)
      g[d] = (mono * Monomials<Dim>::derivative(basis->comp[0], d, basis->order).transpose() *
              coeffs)(0) /
             scale;
    return g;
  }
  MatD<Dim> vector_jacobian(const VecD<Dim>& x) const {
    const Eigen::MatrixXd mono = monomials(x);
    MatD<Dim> jac;
    for (int i = 0; i < Dim; ++i)
      for (int j = 0; j < Dim; ++j)
        jac(i, j) = (mono * Monomials<Dim>::derivative(basis->comp[i], j, basis->order).transpose() *
                     coeffs)(0) /
                    scale;
    return jac;
  }
  /// Row-wise divergence of a tensor field.
  VecD<Dim> tensor_divergence(const VecD<Dim>& x) const {
    const Eigen::MatrixXd mono = monomials(x);
    const auto tables = divergence_tables(*basis);
    VecD<Dim> v;
    for (int i = 0; i < Dim; ++i) v[i] = (mono * tables[i].transpose() * coeffs)(0) / scale;
    return v;
  }
};

template <int Dim>
LocalField<Dim> local_field(const ReconstructionOperator<Dim>& op, int k,
                            const Eigen::VectorXd& nodal) {
  return LocalField<Dim>{&op.basis, op.mesh->elements[k].barycenter,
                         op.mesh->elements[k].diameter, local_coefficients(op, k, nodal)};
}

}  // namespace stokesls

#endif
