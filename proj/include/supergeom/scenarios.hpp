#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "supergeom/chart.hpp"

namespace supergeom::scenarios {

namespace detail {

inline ChartTerm monomial(int n, double c, std::vector<int> pow) {
  pow.resize(n, 0);
  return ChartTerm{c, std::move(pow), {}, {}};
}

// Random polynomial of total degree <= deg in n variables, coefficients in [-scale, scale].
inline ChartFunction random_polynomial(int n, int deg, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ChartFunction f;
  std::vector<int> e(n, 0);
  auto rec = [&](auto&& self, int k, int remaining) -> void {
    if (k == n) {
      f.terms.push_back(monomial(n, u(rng), e));
      return;
    }
    for (int p = 0; p <= remaining; ++p) {
      e[k] = p;
      self(self, k + 1, remaining - p);
    }
    e[k] = 0;
  };
  rec(rec, 0, deg);
  return f;
}

inline ChartFunction scaled(ChartFunction f, double s) {
  for (auto& t : f.terms) t.coef *= s;
  return f;
}

inline ChartFunction sum(ChartFunction a, const ChartFunction& b) {
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  return a;
}

inline std::vector<ChartFunction> constant_matrix(const Matrix& m) {
  std::vector<ChartFunction> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out.push_back(ChartFunction::constant(m(i, j)));
  return out;
}

// Embeds a table over variables [offset, offset+k) into n variables.
inline ChartFunction shift_variables(const ChartFunction& f, int n, int offset) {
  ChartFunction out;
  for (const auto& t : f.terms) {
    ChartTerm s{t.coef, std::vector<int>(n, 0), std::vector<int>(n, 0), std::vector<int>(n, 0)};
    for (std::size_t k = 0; k < t.pow.size(); ++k) s.pow[offset + k] = t.pow[k];
    for (std::size_t k = 0; k < t.sin.size(); ++k) s.sin[offset + k] = t.sin[k];
    for (std::size_t k = 0; k < t.cos.size(); ++k) s.cos[offset + k] = t.cos[k];
    out.terms.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

inline Matrix standard_symplectic(int n) {
  Matrix j = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; k += 2) {
    j(k, k + 1) = 1.0;
    j(k + 1, k) = -1.0;
  }
  return j;
}

/// Euclidean chart: Gamma = 0 and a constant H.
inline GeometryScenario flat(const Matrix& h, SymmetryClass cls) {
  GeometryScenario s;
  const int n = static_cast<int>(h.rows());
  s.name = "flat";
  s.dim = n;
  s.jet_order = 3;
  s.point.assign(n, 0.0);
  s.h_class = cls;
  s.h = detail::constant_matrix(h);
  s.connection = ConnectionKind::christoffel;
  return s;
}

inline GeometryScenario flat_euclidean(int n) {
  auto s = flat(Matrix::Identity(n, n), SymmetryClass::symmetric);
  s.name = "flat-euclidean";
  return s;
}

/// Unit round 2-sphere in the polar chart (theta, phi), g = d theta^2 +
/// sin^2 theta d phi^2, with its Levi-Civita connection. H is
/// a*g + b*vol with vol = sin theta d theta ^ d phi, which is parallel.
inline GeometryScenario round_sphere(double theta, double phi, double a = 1.0, double b = 0.0) {
  GeometryScenario s;
  s.name = "round-sphere";
  s.dim = 2;
  s.jet_order = 4;
  s.point = {theta, phi};
  s.domain_lower = {0.0, -10.0};
  s.domain_upper = {M_PI, 10.0};
  const ChartFunction zero = ChartFunction::constant(0.0);
  const ChartFunction sin2{{ChartTerm{1.0, {0, 0}, {2, 0}, {0, 0}}}};
  s.metric = {ChartFunction::constant(1.0), zero, zero, sin2};
  const ChartFunction vol{{ChartTerm{b, {0, 0}, {1, 0}, {0, 0}}}};
  s.h = {ChartFunction::constant(a), vol, detail::scaled(vol, -1.0), detail::scaled(sin2, a)};
  s.h_class = b == 0.0 ? SymmetryClass::symmetric : (a == 0.0 ? SymmetryClass::skew : SymmetryClass::generic);
  s.connection = ConnectionKind::levi_civita;
  return s;
}

/// Random polynomial Riemannian metric g = I + small perturbation, H = g,
/// Levi-Civita connection.
inline GeometryScenario random_metric(int n, std::uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  GeometryScenario s;
  s.name = "random-metric";
  s.dim = n;
  s.jet_order = 4;
  s.point.assign(n, 0.0);
  s.h_class = SymmetryClass::symmetric;
  s.metric.assign(static_cast<std::size_t>(n * n), ChartFunction{});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      ChartFunction f = detail::random_polynomial(n, 3, scale, rng);
      if (i == j) f = detail::sum(f, ChartFunction::constant(1.5));
      s.metric[idx2(n, i, j)] = f;
      s.metric[idx2(n, j, i)] = f;
    }
  s.connection = ConnectionKind::levi_civita;
  return s;
}

/// Symplectic connection on (R^n, H) with H a constant invertible skew matrix:
/// Gamma^m_ij = S_ijk (H^{-1})_km for a random totally symmetric polynomial S.
inline GeometryScenario symplectic_cubic(int n, std::uint64_t seed, double scale = 0.5) {
  if (n % 2) throw ScenarioError("a skew H needs even dimension");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // Random invertible skew H = P^t J P.
  Matrix p = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) += 0.3 * u(rng);
  const Matrix h = p.transpose() * standard_symplectic(n) * p;
  GeometryScenario s;
  s.name = "symplectic-cubic";
  s.dim = n;
  s.jet_order = 3;
  s.point.assign(n, 0.0);
  s.h_class = SymmetryClass::skew;
  s.h = detail::constant_matrix(h);
  s.connection = ConnectionKind::symplectic_cubic;
  s.cubic.assign(static_cast<std::size_t>(n * n * n), ChartFunction{});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const ChartFunction f = detail::random_polynomial(n, 2, scale, rng);
        const int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
        for (const auto& q : perm) s.cubic[idx3(n, q[0], q[1], q[2])] = f;
      }
  return s;
}

/// Conformally flat surface g = phi (dx^2 + dy^2) with H = phi (a I + b J);
/// both g and the area form are parallel for the Levi-Civita connection.
inline GeometryScenario conformal_surface(std::uint64_t seed, double a, double b, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  const ChartFunction phi = detail::sum(detail::random_polynomial(2, 3, scale, rng), ChartFunction::constant(1.5));
  const ChartFunction zero = ChartFunction::constant(0.0);
  GeometryScenario s;
  s.name = "conformal-surface";
  s.dim = 2;
  s.jet_order = 4;
  s.point = {0.0, 0.0};
  s.metric = {phi, zero, zero, phi};
  s.h = {detail::scaled(phi, a), detail::scaled(phi, b), detail::scaled(phi, -b), detail::scaled(phi, a)};
  s.h_class = b == 0.0 ? SymmetryClass::symmetric : (a == 0.0 ? SymmetryClass::skew : SymmetryClass::generic);
  s.connection = ConnectionKind::levi_civita;
  return s;
}

/// Riemannian product of two conformal surfaces (n = 4), with H the direct
/// sum of the two surface forms. Parallel for the product connection.
inline GeometryScenario product_surfaces(std::uint64_t seed, double a1, double b1, double a2, double b2) {
  const auto s1 = conformal_surface(seed, a1, b1);
  const auto s2 = conformal_surface(seed + 7919, a2, b2);
  GeometryScenario s;
  s.name = "product-surfaces";
  s.dim = 4;
  s.jet_order = 4;
  s.point.assign(4, 0.0);
  s.metric.assign(16, ChartFunction::constant(0.0));
  s.h.assign(16, ChartFunction::constant(0.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      s.metric[idx2(4, i, j)] = detail::shift_variables(s1.metric[idx2(2, i, j)], 4, 0);
      s.metric[idx2(4, i + 2, j + 2)] = detail::shift_variables(s2.metric[idx2(2, i, j)], 4, 2);
      s.h[idx2(4, i, j)] = detail::shift_variables(s1.h[idx2(2, i, j)], 4, 0);
      s.h[idx2(4, i + 2, j + 2)] = detail::shift_variables(s2.h[idx2(2, i, j)], 4, 2);
    }
  const bool sym = b1 == 0.0 && b2 == 0.0;
  const bool skew = a1 == 0.0 && a2 == 0.0;
  s.h_class = sym ? SymmetryClass::symmetric : (skew ? SymmetryClass::skew : SymmetryClass::generic);
  s.connection = ConnectionKind::levi_civita;
  return s;
}

/// Surface times a line (n = 3): H = (a g1 + b vol1) (+) c dz^2.
inline GeometryScenario surface_times_line(std::uint64_t seed, double a, double b, double c) {
  const auto s1 = conformal_surface(seed, a, b);
  GeometryScenario s;
  s.name = "surface-times-line";
  s.dim = 3;
  s.jet_order = 4;
  s.point.assign(3, 0.0);
  s.metric.assign(9, ChartFunction::constant(0.0));
  s.h.assign(9, ChartFunction::constant(0.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      s.metric[idx2(3, i, j)] = detail::shift_variables(s1.metric[idx2(2, i, j)], 3, 0);
      s.h[idx2(3, i, j)] = detail::shift_variables(s1.h[idx2(2, i, j)], 3, 0);
    }
  s.metric[idx2(3, 2, 2)] = ChartFunction::constant(1.0);
  s.h[idx2(3, 2, 2)] = ChartFunction::constant(c);
  s.h_class = b == 0.0 ? SymmetryClass::symmetric : SymmetryClass::generic;
  s.connection = ConnectionKind::levi_civita;
  return s;
}

/// Constant H with a random symmetric polynomial Gamma; nabla H != 0 in general.
inline GeometryScenario random_connection(const Matrix& h, std::uint64_t seed, double scale = 0.5) {
  const int n = static_cast<int>(h.rows());
  std::mt19937_64 rng(seed);
  GeometryScenario s;
  s.name = "random-connection";
  s.dim = n;
  s.jet_order = 3;
  s.point.assign(n, 0.0);
  s.h_class = SymmetryClass::generic;
  s.h = detail::constant_matrix(h);
  s.connection = ConnectionKind::christoffel;
  s.gamma.assign(static_cast<std::size_t>(n * n * n), ChartFunction{});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const ChartFunction f = detail::random_polynomial(n, 2, scale, rng);
        s.gamma[idx3(n, i, j, k)] = f;
        s.gamma[idx3(n, j, i, k)] = f;
      }
  return s;
}

}  // namespace supergeom::scenarios
