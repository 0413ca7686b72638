#include <gtest/gtest.h>

#include <cmath>

#include "supergeom/chart.hpp"
#include "supergeom/scenarios.hpp"

using namespace supergeom;

namespace {

// Plain evaluation of a chart table, independent of the jet machinery.
double evaluate(const ChartFunction& f, const std::vector<double>& x) {
  double total = 0.0;
  for (const auto& t : f.terms) {
    double v = t.coef;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k < t.pow.size()) v *= std::pow(x[k], t.pow[k]);
      if (k < t.sin.size()) v *= std::pow(std::sin(x[k]), t.sin[k]);
      if (k < t.cos.size()) v *= std::pow(std::cos(x[k]), t.cos[k]);
    }
    total += v;
  }
  return total;
}

// Christoffel symbols by fourth-order central differences of the metric table.
std::vector<double> fd_gamma(const GeometryScenario& s, const std::vector<double>& x, double h = 1e-3) {
  const int n = s.dim;
  auto g = [&](const std::vector<double>& p) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = evaluate(s.metric[idx2(n, i, j)], p);
    return m;
  };
  std::vector<Matrix> dg(n);
  for (int k = 0; k < n; ++k) {
    auto at = [&](double t) {
      auto p = x;
      p[k] += t;
      return g(p);
    };
    dg[k] = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
  }
  const Matrix ginv = g(x).inverse();
  std::vector<double> gamma(n * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          gamma[idx3(n, i, j, k)] += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  return gamma;
}

// R(i,j,k,l) from fourth-order central differences of the difference Christoffels.
std::vector<double> fd_curvature(const GeometryScenario& s, double h = 1e-3) {
  const int n = s.dim;
  const auto g0 = fd_gamma(s, s.point);
  std::vector<std::vector<double>> dgam(n);
  for (int k = 0; k < n; ++k) {
    auto at = [&](double t) {
      auto p = s.point;
      p[k] += t;
      return fd_gamma(s, p);
    };
    const auto m2 = at(-2 * h), m1 = at(-h), p1 = at(h), p2 = at(2 * h);
    dgam[k].resize(m2.size());
    for (std::size_t a = 0; a < m2.size(); ++a) dgam[k][a] = (m2[a] - 8 * m1[a] + 8 * p1[a] - p2[a]) / (12 * h);
  }
  std::vector<double> r(n * n * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = dgam[i][idx3(n, j, k, l)] - dgam[j][idx3(n, i, k, l)];
          for (int m = 0; m < n; ++m)
            v += g0[idx3(n, i, m, l)] * g0[idx3(n, j, k, m)] - g0[idx3(n, j, m, l)] * g0[idx3(n, i, k, m)];
          r[idx4(n, i, j, k, l)] = v;
        }
  return r;
}

}  // namespace

TEST(Chart, FlatHasNoCurvature) {
  const auto f = curvature_from_gamma(scenarios::flat_euclidean(3));
  EXPECT_EQ(f.max_curvature(), 0.0);
  EXPECT_EQ(check_nabla_H(f), 0.0);
  const auto rs = ricci_and_scalar(f, FormKind::metric);
  EXPECT_EQ(rs.ricci.norm(), 0.0);
  EXPECT_EQ(rs.scalar, 0.0);
}

TEST(Chart, SphereChristoffel) {
  const double th = M_PI / 4;
  const auto f = curvature_from_gamma(scenarios::round_sphere(th, 0.3));
  // Gamma^theta_{phi phi} = -sin cos, Gamma^phi_{theta phi} = cot.
  EXPECT_NEAR(f.gamma(1, 1, 0), -std::sin(th) * std::cos(th), 1e-14);
  EXPECT_NEAR(f.gamma(0, 1, 1), std::cos(th) / std::sin(th), 1e-14);
  EXPECT_NEAR(f.gamma(1, 0, 1), std::cos(th) / std::sin(th), 1e-14);
  EXPECT_NEAR(f.gamma(0, 0, 0), 0.0, 1e-14);
}

TEST(Chart, SphereCurvatureMatchesFiniteDifferences) {
  const auto s = scenarios::round_sphere(M_PI / 4, 0.0);
  const auto f = curvature_from_gamma(s);
  const auto oracle = fd_curvature(s);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) EXPECT_NEAR(f.curvature(i, j, k, l), oracle[idx4(2, i, j, k, l)], 1e-6);
}

TEST(Chart, RandomMetricCurvatureMatchesFiniteDifferences) {
  const auto s = scenarios::random_metric(3, 42);
  const auto f = curvature_from_gamma(s);
  const auto oracle = fd_curvature(s);
  double err = 0.0;
  for (std::size_t a = 0; a < oracle.size(); ++a) {
    const int l = a % 3, k = (a / 3) % 3, j = (a / 9) % 3, i = static_cast<int>(a / 27);
    err = std::max(err, std::abs(f.curvature(i, j, k, l) - oracle[a]));
  }
  EXPECT_LT(err, 1e-6);
}

TEST(Chart, CurvatureAntisymmetricExactly) {
  const auto f = curvature_from_gamma(scenarios::random_connection(Matrix::Identity(3, 3), 4));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) EXPECT_EQ(f.curvature(i, j, k, l), -f.curvature(j, i, k, l));
}

TEST(Chart, FirstBianchi) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = curvature_from_gamma(scenarios::random_connection(Matrix::Identity(4, 4), seed));
    double err = 0.0;
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y)
        for (int z = 0; z < 4; ++z)
          for (int l = 0; l < 4; ++l)
            err = std::max(err, std::abs(f.curvature(x, y, z, l) + f.curvature(y, z, x, l) + f.curvature(z, x, y, l)));
    EXPECT_LT(err, 1e-9);
  }
}

TEST(Chart, LeviCivitaIsMetric) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = curvature_from_gamma(scenarios::random_metric(3, seed));
    EXPECT_LT(check_nabla_H(f), 1e-10);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(f.gamma(i, j, k), f.gamma(j, i, k), 1e-14);
  }
  EXPECT_EQ(curvature_from_gamma(scenarios::flat_euclidean(2)).gamma(0, 0, 0), 0.0);
}

TEST(Chart, LeviCivitaErrors) {
  auto s = scenarios::flat_euclidean(2);
  s.connection = ConnectionKind::levi_civita;
  s.metric = {ChartFunction::constant(1.0), ChartFunction::constant(0.5), ChartFunction::constant(0.0),
              ChartFunction::constant(1.0)};
  EXPECT_THROW(curvature_from_gamma(s), NonSymmetric);
  s.metric = {ChartFunction::constant(1.0), ChartFunction::constant(0.0), ChartFunction::constant(0.0),
              ChartFunction::constant(-1.0)};
  EXPECT_THROW(curvature_from_gamma(s), NotPositiveDefinite);
}

TEST(Chart, OutsideDomain) {
  EXPECT_THROW(curvature_from_gamma(scenarios::round_sphere(0.0, 0.0)), OutsideChartDomain);
  EXPECT_THROW(curvature_from_gamma(scenarios::round_sphere(4.0, 0.0)), OutsideChartDomain);
}

TEST(Chart, SphereScalarCurvatureIsTwo) {
  for (double th : {0.3, M_PI / 4, 1.2, 2.5}) {
    const auto f = curvature_from_gamma(scenarios::round_sphere(th, 0.1));
    const auto rs = ricci_and_scalar(f, FormKind::metric);
    // Brute-force contraction: g^{xy} R(z,x,y,z).
    const Matrix ginv = f.h_matrix().inverse();
    double oracle = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int z = 0; z < 2; ++z) oracle += ginv(x, y) * f.curvature(z, x, y, z);
    EXPECT_NEAR(rs.scalar, 2.0, 1e-6);
    EXPECT_NEAR(oracle, 2.0, 1e-6);
  }
}

TEST(Chart, MetricRicciSymmetric) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = curvature_from_gamma(scenarios::random_metric(4, seed));
    const auto rs = ricci_and_scalar(f, FormKind::metric);
    EXPECT_LT((rs.ricci - rs.ricci.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Chart, SymplecticScalarVanishes) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = curvature_from_gamma(scenarios::symplectic_cubic(seed % 2 ? 2 : 4, seed));
    EXPECT_LT(check_nabla_H(f), 1e-10);
    EXPECT_GT(f.max_curvature(), 1e-3);
    EXPECT_LT(std::abs(ricci_and_scalar(f, FormKind::symplectic).scalar), 1e-9);
  }
  const auto f = curvature_from_gamma(scenarios::round_sphere(1.0, 0.0, 0.0, 1.0));
  EXPECT_LT(check_nabla_H(f), 1e-10);
  EXPECT_LT(std::abs(ricci_and_scalar(f, FormKind::symplectic).scalar), 1e-9);
}

TEST(Chart, ParallelGenericForms) {
  EXPECT_LT(check_nabla_H(curvature_from_gamma(scenarios::round_sphere(1.0, 0.0, 0.7, 0.4))), 1e-10);
  EXPECT_LT(check_nabla_H(curvature_from_gamma(scenarios::conformal_surface(3, 0.7, 0.4))), 1e-10);
  EXPECT_LT(check_nabla_H(curvature_from_gamma(scenarios::product_surfaces(3, 0.7, 0.4, 0.0, 1.0))), 1e-10);
  EXPECT_LT(check_nabla_H(curvature_from_gamma(scenarios::surface_times_line(3, 0.7, 0.4, 2.0))), 1e-10);
}

TEST(Chart, IncompatibleSymplecticForm) {
  const auto f = curvature_from_gamma(scenarios::random_connection(scenarios::standard_symplectic(2), 1));
  EXPECT_GT(check_nabla_H(f), 1e-3);
  EXPECT_THROW(ricci_and_scalar(f, FormKind::symplectic), IncompatibleConnection);
}

TEST(Chart, TruncatedFrameKeepsValues) {
  const auto f = curvature_from_gamma(scenarios::round_sphere(0.7, 0.0));
  const auto t = f.truncated(1);
  EXPECT_EQ(t.space()->order(), 1);
  EXPECT_EQ(t.curvature(0, 1, 1, 0), f.curvature(0, 1, 1, 0));
  EXPECT_EQ(t.dh(0, 1, 1), f.dh(0, 1, 1));
}
