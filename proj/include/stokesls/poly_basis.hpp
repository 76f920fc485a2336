// Local polynomial bases: monomials, divergence-free vector fields and
// curl-free trace-free tensor fields, in coordinates shifted to a center
// and scaled by a length (xi = (x - c)/h).
//
// Constructions:
//  - 2D divergence-free: constants plus scalar curls (d/dy q, -d/dx q) of
//    the monomials of degree 2..m+1;
//  - 3D divergence-free: single-entry fields whose entry omits its own
//    coordinate, plus two-entry fields (x^t q, -int d/dx(x^t q) dy, 0) and
//    (x^t q, 0, -int d/dx(x^t q) dz) with q a monomial in the remaining two
//    variables (scaled to integer coefficients);
//  - tensors: row-wise Jacobians of the divergence-free basis one order up,
//    with the d constant fields replaced by the canonical unit trace-free
//    matrices that parametrize the nodal values.
//
// All coefficients are integers, so the divergence/curl/trace checks cancel
// exactly at the coefficient level.

#ifndef STOKESLS_POLY_BASIS_HPP
#define STOKESLS_POLY_BASIS_HPP

#include <vector>

#include "stokesls/monomials.hpp"

namespace stokesls {

enum class BasisKind { scalar, divfree_vector, curlfree_tracefree_tensor };

/// Order of the d^2-1 independent entries of a trace-free tensor: first the
/// leading diagonal entries (i,i), i < d-1, then the off-diagonal entries in
/// row-major order. The (d-1,d-1) entry is minus the sum of the leading
/// diagonal.
template <int Dim>
inline std::vector<std::pair<int, int>> tracefree_entry_order() {
  std::vector<std::pair<int, int>> order;
  for (int i = 0; i + 1 < Dim; ++i) order.emplace_back(i, i);
  for (int i = 0; i < Dim; ++i)
    for (int j = 0; j < Dim; ++j)
      if (i != j) order.emplace_back(i, j);
  return order;
}

template <int Dim>
struct PolyBasis {
  BasisKind kind = BasisKind::scalar;
  int order = 0;  // polynomial degree m
  VecD<Dim> center = VecD<Dim>::Zero();
  double scale = 1.0;
  int ncomp = 1;  // 1 scalar, Dim vector, Dim*Dim tensor (row-major)

  /// comp[c] has one row per basis function, columns over monomials of
  /// degree <= order in the shifted coordinates.
  std::vector<Eigen::MatrixXd> comp;
  std::vector<int> func_degree;

  int count() const { return comp.empty() ? 0 : static_cast<int>(comp[0].rows()); }
  int nmono() const { return Monomials<Dim>::count(order); }

  /// Number of constant fields; they lead the function list and carry the
  /// collocation constraint in the reconstruction problems.
  int constant_count() const {
    switch (kind) {
      case BasisKind::scalar: return 1;
      case BasisKind::divfree_vector: return Dim;
      case BasisKind::curlfree_tracefree_tensor: return Dim * Dim - 1;
    }
    return 0;
  }

  Eigen::Matrix<double, Eigen::Dynamic, Dim> to_local(
      const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts, const VecD<Dim>& c, double h) const {
    Eigen::Matrix<double, Eigen::Dynamic, Dim> xi = pts;
    xi.rowwise() -= c.transpose();
    return xi / h;
  }
};

namespace detail {

template <int Dim>
void start_basis(PolyBasis<Dim>& b, BasisKind kind, int order, int ncomp, int reserve) {
  b.kind = kind;
  b.order = order;
  b.ncomp = ncomp;
  b.comp.assign(ncomp, Eigen::MatrixXd::Zero(reserve, Monomials<Dim>::count(order)));
  b.func_degree.reserve(reserve);
}

// Appends one function given (component, monomial exponent, coefficient)
// triplets; rows were preallocated.
template <int Dim>
void push_function(PolyBasis<Dim>& b,
                   const std::vector<std::tuple<int, std::array<int, Dim>, double>>& terms) {
  const int row = static_cast<int>(b.func_degree.size());
  int deg = 0;
  for (const auto& [c, e, v] : terms) {
    b.comp[c](row, Monomials<Dim>::index(e)) += v;
    deg = std::max(deg, Monomials<Dim>::total_degree(e));
  }
  b.func_degree.push_back(deg);
}

}  // namespace detail

/// Monomial basis of P_m, graded-lex order.
template <int Dim>
PolyBasis<Dim> scalar_basis(int m, const VecD<Dim>& center = VecD<Dim>::Zero(),
                            double scale = 1.0) {
  check(m >= 0, errc::config, "negative polynomial order");
  PolyBasis<Dim> b;
  detail::start_basis(b, BasisKind::scalar, m, 1, Monomials<Dim>::count(m));
  b.center = center;
  b.scale = scale;
  b.comp[0].setIdentity();
  const auto& exps = Monomials<Dim>::exponents(m);
  for (const auto& e : exps) b.func_degree.push_back(Monomials<Dim>::total_degree(e));
  return b;
}

/// Basis of P_m^d intersected with the divergence-free fields.
template <int Dim>
PolyBasis<Dim> divfree_basis(int m, const VecD<Dim>& center = VecD<Dim>::Zero(),
                             double scale = 1.0);

template <>
inline PolyBasis<2> divfree_basis<2>(int m, const VecD<2>& center, double scale) {
  check(m >= 0, errc::config, "negative polynomial order");
  using M = Monomials<2>;
  const int n = m >= 1 ? 2 * M::count(m) - M::count(m - 1) : 2;
  PolyBasis<2> b;
  detail::start_basis(b, BasisKind::divfree_vector, m, 2, n);
  b.center = center;
  b.scale = scale;
  detail::push_function<2>(b, {{0, {0, 0}, 1.0}});
  detail::push_function<2>(b, {{1, {0, 0}, 1.0}});
  // Curl (d/dy q, -d/dx q) of every monomial q of degree 2..m+1.
  for (int g = 2; g <= m + 1; ++g)
    for (int a = g; a >= 0; --a) {
      const int bb = g - a;
      std::vector<std::tuple<int, std::array<int, 2>, double>> terms;
      if (bb >= 1) terms.push_back({0, {a, bb - 1}, static_cast<double>(bb)});
      if (a >= 1) terms.push_back({1, {a - 1, bb}, -static_cast<double>(a)});
      detail::push_function<2>(b, terms);
    }
  check(b.count() == n, errc::internal, "divergence-free basis count mismatch");
  return b;
}

template <>
inline PolyBasis<3> divfree_basis<3>(int m, const VecD<3>& center, double scale) {
  check(m >= 0, errc::config, "negative polynomial order");
  using M = Monomials<3>;
  const int n = m >= 1 ? 3 * M::count(m) - M::count(m - 1) : 3;
  PolyBasis<3> b;
  detail::start_basis(b, BasisKind::divfree_vector, m, 3, n);
  b.center = center;
  b.scale = scale;
  // Constant fields lead: they carry the collocation constraint.
  for (int c = 0; c < 3; ++c) {
    std::array<int, 3> zero{};
    detail::push_function<3>(b, {{c, zero, 1.0}});
  }
  // Single-entry group: entry c holds a monomial that omits coordinate c.
  for (int c = 0; c < 3; ++c) {
    const int u = c == 0 ? 1 : 0;
    const int v = c == 2 ? 1 : 2;
    for (int g = 1; g <= m; ++g)
      for (int a = g; a >= 0; --a) {
        std::array<int, 3> e{0, 0, 0};
        e[u] = a;
        e[v] = g - a;
        detail::push_function<3>(b, {{c, e, 1.0}});
      }
  }
  // Two-entry group: p1 = x^t y^a z^b paired with the compensating
  // antiderivative in y (resp. z); scaled by (a+1) (resp. (b+1)) to keep
  // integer coefficients. Zero integration constants.
  for (int t = 1; t <= m; ++t)
    for (int g = 0; g <= m - t; ++g)
      for (int a = g; a >= 0; --a) {
        const int bb = g - a;
        // (x^t y^a z^b (a+1), -t x^(t-1) y^(a+1) z^b, 0)
        detail::push_function<3>(b, {{0, {t, a, bb}, static_cast<double>(a + 1)},
                                     {1, {t - 1, a + 1, bb}, -static_cast<double>(t)}});
        // (x^t y^a z^b (b+1), 0, -t x^(t-1) y^a z^(b+1))
        detail::push_function<3>(b, {{0, {t, a, bb}, static_cast<double>(bb + 1)},
                                     {2, {t - 1, a, bb + 1}, -static_cast<double>(t)}});
      }
  check(b.count() == n, errc::internal, "divergence-free basis count mismatch");
  return b;
}

/// Basis of P_m^{dxd} intersected with the curl-free trace-free tensors:
/// canonical constants plus Jacobians of the non-linear divergence-free
/// basis functions one order up. Row i of a tensor function is the gradient
/// of component i.
template <int Dim>
PolyBasis<Dim> curlfree_tracefree_basis(int m, const VecD<Dim>& center = VecD<Dim>::Zero(),
                                        double scale = 1.0) {
  check(m >= 0, errc::config, "negative polynomial order");
  using M = Monomials<Dim>;
  const PolyBasis<Dim> vec = divfree_basis<Dim>(m + 1);
  const int n = vec.count() - Dim;
  PolyBasis<Dim> b;
  detail::start_basis(b, BasisKind::curlfree_tracefree_tensor, m, Dim * Dim, n);
  b.center = center;
  b.scale = scale;
  for (const auto& [i, j] : tracefree_entry_order<Dim>()) {
    std::vector<std::tuple<int, std::array<int, Dim>, double>> terms;
    std::array<int, Dim> zero{};
    terms.push_back({i * Dim + j, zero, 1.0});
    if (i == j) terms.push_back({Dim * Dim - 1, zero, -1.0});
    detail::push_function<Dim>(b, terms);
  }
  // Jacobians of the degree >= 2 divergence-free functions.
  const int row0 = static_cast<int>(b.func_degree.size());
  int row = row0;
  for (int f = 0; f < vec.count(); ++f) {
    if (vec.func_degree[f] <= 1) continue;
    for (int i = 0; i < Dim; ++i)
      for (int j = 0; j < Dim; ++j)
        b.comp[i * Dim + j].row(row) =
            Monomials<Dim>::derivative(vec.comp[i].row(f), j, m + 1).leftCols(M::count(m));
    b.func_degree.push_back(vec.func_degree[f] - 1);
    ++row;
  }
  check(row == n, errc::internal, "tensor basis count mismatch");

  // Differentiation could only hide a dependency if a construction bug
  // produced one; verify full row rank of the stacked coefficients.
  Eigen::MatrixXd flat(n, Dim * Dim * b.nmono());
  for (int c = 0; c < Dim * Dim; ++c) flat.middleCols(c * b.nmono(), b.nmono()) = b.comp[c];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(flat.transpose());
  check(qr.rank() == n, errc::internal, "tensor basis is rank deficient");
  return b;
}

/// Values of every basis function component at the given physical points:
/// out[c] is (npts x nfunc).
template <int Dim>
std::vector<Eigen::MatrixXd> basis_values(const PolyBasis<Dim>& b,
                                          const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts,
                                          const VecD<Dim>& center, double scale) {
  const Eigen::MatrixXd mono = Monomials<Dim>::values(b.to_local(pts, center, scale), b.order);
  std::vector<Eigen::MatrixXd> out(b.ncomp);
  for (int c = 0; c < b.ncomp; ++c) out[c] = mono * b.comp[c].transpose();
  return out;
}

template <int Dim>
std::vector<Eigen::MatrixXd> basis_values(const PolyBasis<Dim>& b,
                                          const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts) {
  return basis_values(b, pts, b.center, b.scale);
}

/// Derivative tables d/dx_dir of every component (same monomial layout,
/// physical scaling 1/h applied at evaluation).
template <int Dim>
std::vector<Eigen::MatrixXd> basis_derivative_tables(const PolyBasis<Dim>& b, int dir) {
  std::vector<Eigen::MatrixXd> out(b.ncomp);
  for (int c = 0; c < b.ncomp; ++c) out[c] = Monomials<Dim>::derivative(b.comp[c], dir, b.order);
  return out;
}

/// Coefficient tables of the row-wise divergence: scalar gradient components
/// for a scalar basis, one table for a vector basis, d tables (one per row)
/// for a tensor basis. Entries are in basis monomial layout; multiply by
/// 1/scale when evaluating physically.
template <int Dim>
std::vector<Eigen::MatrixXd> divergence_tables(const PolyBasis<Dim>& b) {
  std::vector<Eigen::MatrixXd> out;
  if (b.kind == BasisKind::divfree_vector) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(b.count(), b.nmono());
    for (int c = 0; c < Dim; ++c) d += Monomials<Dim>::derivative(b.comp[c], c, b.order);
    out.push_back(std::move(d));
  } else if (b.kind == BasisKind::curlfree_tracefree_tensor) {
    for (int i = 0; i < Dim; ++i) {
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(b.count(), b.nmono());
      for (int j = 0; j < Dim; ++j)
        d += Monomials<Dim>::derivative(b.comp[i * Dim + j], j, b.order);
      out.push_back(std::move(d));
    }
  } else {
    fail(errc::config, "divergence of a scalar basis is not defined");
  }
  return out;
}

/// Max |coefficient| of the row-wise divergence; exactly zero for correctly
/// constructed divergence-free / trace-free-curl-free bases.
template <int Dim>
double symbolic_divergence_max(const PolyBasis<Dim>& b) {
  double m = 0.0;
  for (const auto& t : divergence_tables(b)) m = std::max(m, t.cwiseAbs().maxCoeff());
  return m;
}

/// Max |coefficient| over all row-curl components of a tensor basis (or the
/// curl of a vector basis); zero for gradient-type tensor fields.
template <int Dim>
double symbolic_curl_max(const PolyBasis<Dim>& b) {
  using M = Monomials<Dim>;
  double mx = 0.0;
  const int rows = b.kind == BasisKind::curlfree_tracefree_tensor ? Dim : 1;
  check(b.kind != BasisKind::scalar, errc::config, "curl of a scalar basis is not defined");
  for (int r = 0; r < rows; ++r) {
    auto row_comp = [&](int j) -> const Eigen::MatrixXd& {
      return b.comp[b.kind == BasisKind::curlfree_tracefree_tensor ? r * Dim + j : j];
    };
    if constexpr (Dim == 2) {
      const Eigen::MatrixXd c = M::derivative(row_comp(1), 0, b.order) -
                                M::derivative(row_comp(0), 1, b.order);
      mx = std::max(mx, c.cwiseAbs().maxCoeff());
    } else {
      for (int a = 0; a < 3; ++a) {
        const int u = (a + 1) % 3, v = (a + 2) % 3;
        const Eigen::MatrixXd c = M::derivative(row_comp(v), u, b.order) -
                                  M::derivative(row_comp(u), v, b.order);
        mx = std::max(mx, c.cwiseAbs().maxCoeff());
      }
    }
  }
  return mx;
}

/// Max |coefficient| of the matrix trace of a tensor basis.
template <int Dim>
double symbolic_trace_max(const PolyBasis<Dim>& b) {
  check(b.kind == BasisKind::curlfree_tracefree_tensor, errc::config,
        "trace check applies to tensor bases");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(b.count(), b.nmono());
  for (int i = 0; i < Dim; ++i) t += b.comp[i * Dim + i];
  return t.cwiseAbs().maxCoeff();
}

}  // namespace stokesls

#endif
