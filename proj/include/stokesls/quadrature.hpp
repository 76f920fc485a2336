// Numerical integration over elements and faces.
//
// Reference rules: Gauss-Legendre on the segment, collapsed (Duffy-type)
// Gauss products on the reference triangle/tetrahedron. The collapsed
// construction keeps every weight strictly positive and is exact for any
// requested polynomial degree; element rules are composites over the
// simplicial sub-decomposition.

#ifndef STOKESLS_QUADRATURE_HPP
#define STOKESLS_QUADRATURE_HPP

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "stokesls/mesh.hpp"

namespace stokesls {

template <int Dim>
struct QuadratureRule {
  Eigen::Matrix<double, Eigen::Dynamic, Dim> points;
  Eigen::VectorXd weights;
  int exact_degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
  double total_weight() const { return weights.sum(); }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration on P_n.
inline void gauss_legendre_01(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess on [-1, 1].
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, p1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
      }
      const double dp = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
    }
    const double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = 0.5 * (1.0 + t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

template <int Dim>
QuadratureRule<Dim> reference_simplex_rule(int degree);

// Unit segment [0, 1].
template <>
inline QuadratureRule<1> reference_simplex_rule<1>(int degree) {
  QuadratureRule<1> r;
  const int n = degree / 2 + 1;
  Eigen::VectorXd x, w;
  gauss_legendre_01(n, x, w);
  r.points = x;
  r.weights = w;
  r.exact_degree = degree;
  return r;
}

// Reference triangle {x, y >= 0, x + y <= 1} via x = u, y = v(1-u);
// Jacobian (1-u) raises the u-degree by one.
template <>
inline QuadratureRule<2> reference_simplex_rule<2>(int degree) {
  QuadratureRule<2> r;
  const int nu = (degree + 2) / 2 + 1;
  const int nv = degree / 2 + 1;
  Eigen::VectorXd xu, wu, xv, wv;
  gauss_legendre_01(nu, xu, wu);
  gauss_legendre_01(nv, xv, wv);
  r.points.resize(nu * nv, 2);
  r.weights.resize(nu * nv);
  int q = 0;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j, ++q) {
      const double u = xu[i], v = xv[j];
      r.points(q, 0) = u;
      r.points(q, 1) = v * (1.0 - u);
      r.weights[q] = wu[i] * wv[j] * (1.0 - u);
    }
  r.exact_degree = degree;
  return r;
}

// Reference tetrahedron via x = u, y = v(1-u), z = w(1-u)(1-v).
template <>
inline QuadratureRule<3> reference_simplex_rule<3>(int degree) {
  QuadratureRule<3> r;
  const int nu = (degree + 3) / 2 + 1;
  const int nv = (degree + 2) / 2 + 1;
  const int nw = degree / 2 + 1;
  Eigen::VectorXd xu, wu, xv, wv, xw, ww;
  gauss_legendre_01(nu, xu, wu);
  gauss_legendre_01(nv, xv, wv);
  gauss_legendre_01(nw, xw, ww);
  r.points.resize(nu * nv * nw, 3);
  r.weights.resize(nu * nv * nw);
  int q = 0;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      for (int k = 0; k < nw; ++k, ++q) {
        const double u = xu[i], v = xv[j], w = xw[k];
        r.points(q, 0) = u;
        r.points(q, 1) = v * (1.0 - u);
        r.points(q, 2) = w * (1.0 - u) * (1.0 - v);
        r.weights[q] = wu[i] * wv[j] * ww[k] * (1.0 - u) * (1.0 - u) * (1.0 - v);
      }
  r.exact_degree = degree;
  return r;
}

template <int RefDim>
const QuadratureRule<RefDim>& cached_reference_rule(int degree) {
  static std::unordered_map<int, QuadratureRule<RefDim>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, reference_simplex_rule<RefDim>(degree)).first;
  return it->second;
}

}  // namespace detail

constexpr int max_quadrature_degree = 20;

/// Composite rule over the simplicial sub-decomposition of an element.
template <int Dim>
QuadratureRule<Dim> element_rule(const Mesh<Dim>& mesh, int elem, int degree) {
  check(degree >= 0 && degree <= max_quadrature_degree, errc::unsupported,
        "unsupported quadrature degree");
  const auto& ref = detail::cached_reference_rule<Dim>(degree);
  const auto& el = mesh.elements[elem];
  const int ns = static_cast<int>(el.simplices.size());
  QuadratureRule<Dim> r;
  r.exact_degree = degree;
  r.points.resize(ns * ref.size(), Dim);
  r.weights.resize(ns * ref.size());
  constexpr double ref_measure = Dim == 2 ? 0.5 : 1.0 / 6.0;
  for (int s = 0; s < ns; ++s) {
    const auto v = mesh.simplex(elem, s);
    Eigen::Matrix<double, Dim, Dim> jac;
    for (int d = 0; d < Dim; ++d) jac.col(d) = v[d + 1] - v[0];
    const double scale = simplex_measure(v) / ref_measure;
    for (int q = 0; q < ref.size(); ++q) {
      VecD<Dim> x = v[0];
      for (int d = 0; d < Dim; ++d) x += ref.points(q, d) * jac.col(d);
      r.points.row(s * ref.size() + q) = x.transpose();
      r.weights[s * ref.size() + q] = ref.weights[q] * scale;
    }
  }
  return r;
}

/// Rule on a face, returning points in the ambient dimension.
template <int Dim>
QuadratureRule<Dim> face_rule(const Mesh<Dim>& mesh, int face, int degree) {
  check(degree >= 0 && degree <= max_quadrature_degree, errc::unsupported,
        "unsupported quadrature degree");
  const auto& fc = mesh.faces[face];
  QuadratureRule<Dim> r;
  r.exact_degree = degree;
  if constexpr (Dim == 2) {
    const auto& ref = detail::cached_reference_rule<1>(degree);
    const VecD<2> a = mesh.vertices[fc.vertex_ids[0]];
    const VecD<2> b = mesh.vertices[fc.vertex_ids[1]];
    r.points.resize(ref.size(), 2);
    r.weights = ref.weights * fc.measure;
    for (int q = 0; q < ref.size(); ++q)
      r.points.row(q) = (a + ref.points(q, 0) * (b - a)).transpose();
  } else {
    const auto& ref = detail::cached_reference_rule<2>(degree);
    const VecD<3> a = mesh.vertices[fc.vertex_ids[0]];
    const VecD<3> b = mesh.vertices[fc.vertex_ids[1]];
    const VecD<3> c = mesh.vertices[fc.vertex_ids[2]];
    r.points.resize(ref.size(), 3);
    r.weights = ref.weights * (fc.measure / 0.5);
    for (int q = 0; q < ref.size(); ++q)
      r.points.row(q) =
          (a + ref.points(q, 0) * (b - a) + ref.points(q, 1) * (c - a)).transpose();
  }
  return r;
}

}  // namespace stokesls

#endif
