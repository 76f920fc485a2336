// Graded-lexicographic monomial bookkeeping and dense coefficient tables.
//
// Polynomials are stored as coefficient rows over the monomials of degree
// <= deg in Dim variables, ordered by total degree and lexicographically
// (first variable major) within a degree. Differentiation and
// antidifferentiation act exactly on the tables, which is what the symbolic
// divergence/curl/trace checks rely on.

#ifndef STOKESLS_MONOMIALS_HPP
#define STOKESLS_MONOMIALS_HPP

#include <array>
#include <vector>

#include "stokesls/common.hpp"

namespace stokesls {

template <int Dim>
struct Monomials {
  using Exp = std::array<int, Dim>;

  // Tables are built once up to this degree; all users stay far below it.
  static constexpr int max_degree = 24;

  /// Number of monomials of total degree <= deg.
  static int count(int deg) { return static_cast<int>(binomial(deg + Dim, Dim)); }

  /// Exponent tuples in graded-lex order. Thread-safe: the cache is built
  /// exactly once on first use.
  static const std::vector<Exp>& exponents(int deg) {
    check(deg >= 0 && deg <= max_degree, errc::unsupported, "monomial degree out of range");
    static const std::vector<std::vector<Exp>> cache = [] {
      std::vector<std::vector<Exp>> c(max_degree + 1);
      for (int d = 0; d <= max_degree; ++d) {
        c[d].reserve(count(d));
        for (int g = 0; g <= d; ++g) append_degree(g, c[d]);
      }
      return c;
    }();
    return cache[deg];
  }

  static int total_degree(const Exp& a) {
    int g = 0;
    for (int d = 0; d < Dim; ++d) g += a[d];
    return g;
  }

  /// Position of an exponent tuple in graded-lex order.
  static int index(const Exp& a) {
    const int g = total_degree(a);
    const auto& list = exponents(g);
    for (int i = g > 0 ? count(g - 1) : 0; i < static_cast<int>(list.size()); ++i)
      if (list[i] == a) return i;
    fail(errc::internal, "monomial index lookup failed");
  }

  /// Values of all monomials of degree <= deg at the given points (rows).
  static Eigen::MatrixXd values(const Eigen::Matrix<double, Eigen::Dynamic, Dim>& pts, int deg) {
    const auto& exps = exponents(deg);
    const int n = static_cast<int>(exps.size());
    Eigen::MatrixXd m(pts.rows(), n);
    m.col(0).setOnes();
    for (int i = 1; i < n; ++i) {
      Exp a = exps[i];
      int dir = 0;
      while (a[dir] == 0) ++dir;
      a[dir] -= 1;
      m.col(i) = m.col(index(a)).cwiseProduct(pts.col(dir));
    }
    return m;
  }

  /// d/dx_dir applied to coefficient rows; the output lives in the same
  /// monomial space (upper coefficients become zero).
  static Eigen::MatrixXd derivative(const Eigen::MatrixXd& tbl, int dir, int deg) {
    const auto& exps = exponents(deg);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(tbl.rows(), tbl.cols());
    for (int i = 0; i < static_cast<int>(exps.size()); ++i) {
      Exp a = exps[i];
      if (a[dir] == 0) continue;
      const int k = a[dir];
      a[dir] -= 1;
      out.col(index(a)) += k * tbl.col(i);
    }
    return out;
  }

private:
  static void append_degree(int g, std::vector<Exp>& list) {
    Exp a{};
    fill_rec(g, 0, a, list);
  }
  static void fill_rec(int rem, int pos, Exp& a, std::vector<Exp>& list) {
    if (pos == Dim - 1) {
      a[pos] = rem;
      list.push_back(a);
      return;
    }
    for (int k = rem; k >= 0; --k) {
      a[pos] = k;
      fill_rec(rem - k, pos + 1, a, list);
    }
  }
};

}  // namespace stokesls

#endif
