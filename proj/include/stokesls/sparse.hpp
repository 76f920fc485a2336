// Symmetric sparse matrix assembly and the solver policies for the two
// global least squares systems.
//
// The pattern is precomputed from element-level adjacency so dense local
// blocks accumulate by binary search into a fixed CSR structure; assembly
// stays deterministic because blocks merge in a fixed order regardless of
// the worker count. Systems up to the direct-solver cutoff factorize with
// Eigen; larger ones run a Jacobi-preconditioned conjugate gradient (with
// the pressure constant projected out for the semi-definite first step).

#ifndef STOKESLS_SPARSE_HPP
#define STOKESLS_SPARSE_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stokesls/common.hpp"
#include "stokesls/parallel.hpp"

namespace stokesls {

struct CsrMatrix {
  int n = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  /// Builds the pattern from per-row sorted unique column lists.
  void set_pattern(std::vector<std::vector<int>>& cols) {
    n = static_cast<int>(cols.size());
    row_ptr.assign(n + 1, 0);
    for (int r = 0; r < n; ++r) row_ptr[r + 1] = row_ptr[r] + cols[r].size();
    col.resize(row_ptr[n]);
    val.assign(row_ptr[n], 0.0);
    for (int r = 0; r < n; ++r)
      std::copy(cols[r].begin(), cols[r].end(), col.begin() + row_ptr[r]);
  }

  double& at(int r, int c) {
    const auto lo = col.begin() + row_ptr[r];
    const auto hi = col.begin() + row_ptr[r + 1];
    const auto it = std::lower_bound(lo, hi, c);
    check(it != hi && *it == c, errc::internal, "entry outside the assembled sparsity pattern");
    return val[it - col.begin()];
  }

  /// Entry value; zero outside the pattern.
  double get(int r, int c) const {
    const auto lo = col.begin() + row_ptr[r];
    const auto hi = col.begin() + row_ptr[r + 1];
    const auto it = std::lower_bound(lo, hi, c);
    return (it != hi && *it == c) ? val[it - col.begin()] : 0.0;
  }

  void add_block(const std::vector<int>& rows, const std::vector<int>& cols,
                 const Eigen::MatrixXd& block) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto lo = col.begin() + row_ptr[rows[i]];
      const auto hi = col.begin() + row_ptr[rows[i] + 1];
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto it = std::lower_bound(lo, hi, cols[j]);
        check(it != hi && *it == cols[j], errc::internal,
              "entry outside the assembled sparsity pattern");
        val[it - col.begin()] += block(i, j);
      }
    }
  }

  // Row-partitioned parallel product; each row is a fixed serial sum, so
  // the result does not depend on the worker count. Small systems stay
  // serial to avoid thread overhead.
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    auto row_product = [&](std::size_t r) {
      double s = 0.0;
      for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
      y[r] = s;
    };
    if (n < 16384) {
      for (int r = 0; r < n; ++r) row_product(r);
    } else {
      parallel_for(n, row_product);
    }
    return y;
  }

  Eigen::VectorXd diagonal() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < n; ++r)
      for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col[k] == r) d[r] = val[k];
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
  }

  /// Max |A - A^T| entry, for the symmetry invariant.
  double max_asymmetry() const {
    double m = 0.0;
    for (int r = 0; r < n; ++r)
      for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        m = std::max(m, std::abs(val[k] - get(col[k], r)));
    return m;
  }

  Eigen::SparseMatrix<double> to_eigen(int extra_rows = 0) const {
    Eigen::SparseMatrix<double> s(n + extra_rows, n + extra_rows);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(val.size());
    for (int r = 0; r < n; ++r)
      for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        trip.emplace_back(r, col[k], val[k]);
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
  }
};

/// Expands element-level adjacency into a per-dof CSR pattern. block_of(e)
/// returns the global dofs attached to element e; the pattern couples every
/// dof of e with every dof of each adjacent element.
template <typename BlockOf>
void build_block_pattern(CsrMatrix& m, int ndof,
                         const std::vector<std::vector<int>>& element_adjacency,
                         BlockOf&& block_of) {
  std::vector<std::vector<int>> cols(ndof);
  for (int e = 0; e < static_cast<int>(element_adjacency.size()); ++e) {
    const std::vector<int> rows = block_of(e);
    std::size_t total = 0;
    std::vector<std::vector<int>> neighbor_blocks;
    neighbor_blocks.reserve(element_adjacency[e].size());
    for (int nb : element_adjacency[e]) {
      neighbor_blocks.push_back(block_of(nb));
      total += neighbor_blocks.back().size();
    }
    std::vector<int> all;
    all.reserve(total);
    for (const auto& b : neighbor_blocks) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    for (int r : rows) cols[r] = all;
  }
  m.set_pattern(cols);
}

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  bool direct = true;
};

// Systems with patch-coupled sparsity fill in badly under sparse
// factorization (hundreds of nonzeros per row, 3D-like graphs even in 2D);
// measurements put the direct/iterative crossover far below the usual FEM
// rule of thumb.
constexpr int direct_solver_dof_limit = 20000;

/// Jacobi-preconditioned CG. If nullspace is non-empty it is projected out
/// of the right-hand side and the iterates (the operator must vanish on it).
inline Eigen::VectorXd conjugate_gradient(const CsrMatrix& a, Eigen::VectorXd b,
                                          const Eigen::VectorXd& nullspace, double tol,
                                          SolveReport& report) {
  const int n = a.n;
  Eigen::VectorXd dinv = a.diagonal();
  for (int i = 0; i < n; ++i) dinv[i] = dinv[i] > 0.0 ? 1.0 / dinv[i] : 1.0;
  const bool project = nullspace.size() > 0;
  const double ns2 = project ? nullspace.squaredNorm() : 1.0;
  auto deflate = [&](Eigen::VectorXd& v) {
    if (project) v -= (nullspace.dot(v) / ns2) * nullspace;
  };
  deflate(b);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    report = {0, 0.0, false};
    return Eigen::VectorXd::Zero(n);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  deflate(z);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const int max_iter = std::max(1000, 40 * n);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd ap = a.multiply(p);
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rel = r.norm() / bnorm;
    if (rel <= tol) {
      report = {it + 1, rel, false};
      return x;
    }
    z = dinv.cwiseProduct(r);
    deflate(z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  fail(errc::numeric, "conjugate gradient did not converge: relative residual " +
                          std::to_string(r.norm() / bnorm) + " after " +
                          std::to_string(max_iter) + " iterations");
}

}  // namespace stokesls

#endif
