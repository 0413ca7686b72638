#include <gtest/gtest.h>

#include <Eigen/LU>
#include <random>

#include "supergeom/scenarios.hpp"
#include "supergeom/superconnection.hpp"

using namespace supergeom;

namespace {

std::vector<PointFrame> fedosov_frames(std::uint64_t seed) {
  return {
      curvature_from_gamma(scenarios::round_sphere(0.9, 0.2)),
      curvature_from_gamma(scenarios::round_sphere(1.3, 0.2, 0.7, 0.5)),
      curvature_from_gamma(scenarios::round_sphere(0.6, 0.2, 0.0, 1.0)),
      curvature_from_gamma(scenarios::random_metric(3, seed)),
      curvature_from_gamma(scenarios::surface_times_line(seed, 0.7, 0.4, 2.0)),
      curvature_from_gamma(scenarios::symplectic_cubic(4, seed)),
  };
}

double torsion_max(const Superconnection& sc) {
  double r = 0.0;
  for (const Basic a : basic_derivations(sc.dim()))
    for (const Basic b : basic_derivations(sc.dim())) r = std::max(r, sc.torsion(a, b).max_abs_value());
  return r;
}

void bump(JetTensor& t, std::size_t i, double v) { t[i] += Jet::constant(t[i].space(), v); }

Matrix random_h(int n, SymmetryClass cls, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(rng);
  switch (cls) {
    case SymmetryClass::symmetric: return m + m.transpose() + 2.0 * n * Matrix::Identity(n, n);
    case SymmetryClass::skew: return m - m.transpose() + scenarios::standard_symplectic(n) * 3.0;
    default: return m + 2.0 * Matrix::Identity(n, n);
  }
}

// Dimension of {K3 : K3 skew, H(K3(X,Y),Z) + H(K3(X,Z),Y) = 0} by LU.
Eigen::Index k3_family_dim(const Matrix& h) {
  const int n = static_cast<int>(h.rows()), n3 = n * n * n;
  Matrix a = Matrix::Zero(2 * n3, n3);
  int r = 0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z, ++r) {
        a(r, idx3(n, x, y, z)) += 1.0;
        a(r, idx3(n, y, x, z)) += 1.0;
        for (int p = 0; p < n; ++p) {
          a(n3 + r, idx3(n, x, y, p)) += h(p, z);
          a(n3 + r, idx3(n, x, z, p)) += h(p, y);
        }
      }
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(1e-10);
  return n3 - lu.rank();
}

int binomial3(int n) { return n * (n - 1) * (n - 2) / 6; }

}  // namespace

TEST(Superconnection, ZeroTensorsOnFlatFrame) {
  const auto f = curvature_from_gamma(scenarios::flat_euclidean(3));
  const auto t = ConnectionTensors::zero(make_jet_space(3, 1));
  EXPECT_EQ(symmetry_predicate(t, f).max(), 0.0);
  EXPECT_EQ(compatibility_predicate(t, f).max(), 0.0);
  const Superconnection sc(f, t);
  EXPECT_EQ(torsion_max(sc), 0.0);
  EXPECT_EQ(compatibility_functional(sc, build_omega_H(f)).max, 0.0);
}

TEST(Superconnection, MissingL0ShowsCurvature) {
  const auto f = curvature_from_gamma(scenarios::round_sphere(0.8, 0.0));
  const auto t = ConnectionTensors::zero(make_jet_space(2, 1));
  EXPECT_NEAR(symmetry_predicate(t, f).l0, f.max_curvature(), 1e-15);
  EXPECT_GT(f.max_curvature(), 0.5);
}

TEST(Superconnection, ValidateRejectsWrongShapes) {
  auto t = ConnectionTensors::zero(make_jet_space(2, 1));
  EXPECT_THROW(t.validate(3), DimensionMismatch);
  t.l0.pop_back();
  EXPECT_THROW(t.validate(2), DimensionMismatch);
}

TEST(Superconnection, PredicateNeedsParallelH) {
  const auto f = curvature_from_gamma(scenarios::random_connection(Matrix::Identity(2, 2), 3));
  EXPECT_THROW(compatibility_predicate(ConnectionTensors::zero(make_jet_space(2, 1)), f), IncompatibleFrame);
  EXPECT_THROW(sample_fedosov(f, 1), IncompatibleFrame);
}

TEST(Sampler, SamplesSatisfyEveryCondition) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    for (const auto& f : fedosov_frames(seed)) {
      const auto s = sample_fedosov(f, seed);
      EXPECT_LT(symmetry_predicate(s.tensors, f).max(), 1e-10);
      const auto c = compatibility_predicate(s.tensors, f);
      EXPECT_LT(c.max(), 1e-10);
      EXPECT_LT(c.cond[4], 1e-12);
      EXPECT_LT(s.info.consistency, 1e-12);
      const Superconnection sc(f, s.tensors);
      EXPECT_LT(torsion_max(sc), 1e-12);
      EXPECT_LT(compatibility_functional(sc, build_omega_H(f)).max, 1e-9);
    }
}

TEST(Sampler, FreeDimensions) {
  EXPECT_EQ(sample_fedosov(curvature_from_gamma(scenarios::round_sphere(0.9, 0.0)), 1).info.k3_free_dim, 0);
  EXPECT_TRUE(sample_fedosov(curvature_from_gamma(scenarios::round_sphere(0.9, 0.0)), 1).info.k3_empty_family);
  const auto s3 = sample_fedosov(curvature_from_gamma(scenarios::random_metric(3, 1)), 1);
  EXPECT_EQ(s3.info.k3_free_dim, 1);
  EXPECT_FALSE(s3.info.l0_empty_family);
  EXPECT_EQ(sample_fedosov(curvature_from_gamma(scenarios::symplectic_cubic(4, 1)), 1).info.k3_free_dim, 4);
}

TEST(Sampler, Deterministic) {
  const auto f = curvature_from_gamma(scenarios::random_metric(3, 9));
  const auto a = sample_fedosov(f, 77), b = sample_fedosov(f, 77), c = sample_fedosov(f, 78);
  bool differs = false;
  for (std::size_t k = 0; k < 8; ++k) {
    const auto& ta = *a.tensors.all()[k];
    const auto& tb = *b.tensors.all()[k];
    const auto& tc = *c.tensors.all()[k];
    for (std::size_t i = 0; i < ta.size(); ++i) {
      EXPECT_EQ(ta[i].coeffs(), tb[i].coeffs());
      differs = differs || ta[i].coeffs() != tc[i].coeffs();
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Sampler, MinimalSampleHasNoFreeParts) {
  const auto f = curvature_from_gamma(scenarios::flat_euclidean(3));
  const auto s = sample_fedosov(f, 5, SamplerOptions{false, false, false});
  for (const auto* t : s.tensors.all())
    for (const auto& j : *t) EXPECT_EQ(j.value(), 0.0);
}

TEST(Predicates, ViolatingAGivesTwiceTheEntry) {
  const auto f = curvature_from_gamma(scenarios::flat_euclidean(2));
  auto t = ConnectionTensors::zero(make_jet_space(2, 1));
  bump(t.k3, idx3(2, 0, 1, 1), 0.25);
  EXPECT_DOUBLE_EQ(compatibility_predicate(t, f).cond[0], 0.5);
}

TEST(Predicates, SingleConditionViolations) {
  const auto f = curvature_from_gamma(scenarios::random_metric(3, 2));
  const auto base = sample_fedosov(f, 2).tensors;
  const int n = 3;
  auto expect_only = [&](const ConnectionTensors& t, int cond) {
    const auto r = compatibility_predicate(t, f);
    for (int c = 0; c < 6; ++c) {
      if (c == cond) EXPECT_GT(r.cond[c], 1e-3) << CompatibilityReport::names()[c];
      else EXPECT_LT(r.cond[c], 1e-10) << CompatibilityReport::names()[c];
    }
  };
  {
    auto t = base;  // (a) with K3 kept skew
    bump(t.k3, idx3(n, 0, 1, 2), 0.3);
    bump(t.k3, idx3(n, 1, 0, 2), -0.3);
    expect_only(t, 0);
  }
  {
    auto t = base;
    bump(t.k2, idx3(n, 0, 1, 2), 0.3);
    expect_only(t, 1);
  }
  {
    auto t = base;
    bump(t.l2, idx3(n, 0, 1, 2), 0.3);
    expect_only(t, 2);
  }
  {
    auto t = base;
    bump(t.k1, idx3(n, 0, 1, 2), 0.3);
    expect_only(t, 3);
  }
  {
    auto t = base;
    bump(t.l1, idx3(n, 0, 1, 2), 0.3);
    expect_only(t, 4);
  }
  {
    auto t = base;  // symmetric change of L0
    bump(t.l0, idx4(n, 0, 1, 0, 2), 0.3);
    bump(t.l0, idx4(n, 1, 0, 0, 2), 0.3);
    expect_only(t, 5);
  }
}

TEST(ForcedVanishing, AllSymmetryClasses) {
  std::mt19937_64 rng(2024);
  for (int n = 2; n <= 4; ++n)
    for (const auto cls : {SymmetryClass::symmetric, SymmetryClass::skew, SymmetryClass::generic}) {
      if (cls == SymmetryClass::skew && n % 2) continue;
      for (int trial = 0; trial < 20; ++trial) {
        const Matrix h = random_h(n, cls, rng);
        const auto f = curvature_from_gamma(scenarios::flat(h, cls));
        const auto c = forced_vanishing_check(f);
        EXPECT_TRUE(c.forced) << n << " " << to_string(cls);
        EXPECT_LT(std::max({c.max_k1, c.max_k2, c.max_l3}), 1e-9);
        EXPECT_EQ(c.unknowns, 4 * n * n * n);
        EXPECT_EQ(c.nullspace_dim, c.k3_free_dim);
        EXPECT_EQ(c.k3_free_dim, k3_family_dim(h));
        if (cls == SymmetryClass::symmetric) EXPECT_EQ(c.k3_free_dim, binomial3(n));
      }
    }
}

TEST(ForcedVanishing, CurvedFrames) {
  for (const auto& f : fedosov_frames(4)) {
    const auto c = forced_vanishing_check(f);
    EXPECT_TRUE(c.forced);
    EXPECT_EQ(c.k3_free_dim, k3_family_dim(f.h_matrix()));
  }
}

TEST(ForcedVanishing, SingularH) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 1.0;
  EXPECT_THROW(forced_vanishing_check(curvature_from_gamma(scenarios::flat(h, SymmetryClass::symmetric))),
               SingularBlock);
}

TEST(Action, BasicRows) {
  const auto f = curvature_from_gamma(scenarios::random_metric(3, 6));
  auto t = sample_fedosov(f, 6).tensors;
  const int n = 3;
  // Nonzero odd-slot tensors so that every row is visible.
  for (std::size_t i = 0; i < t.k1.size(); ++i) {
    bump(t.k1, i, 0.1 * (i % 5));
    bump(t.k2, i, -0.07 * (i % 3));
    bump(t.l3, i, 0.05 * (i % 4));
  }
  const Superconnection sc(f, t);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      const auto nn = sc.basic_action(nabla_(x), nabla_(y));
      const auto ni = sc.basic_action(nabla_(x), insert_(y));
      const auto in = sc.basic_action(insert_(x), nabla_(y));
      const auto ii = sc.basic_action(insert_(x), insert_(y));
      for (int m = 0; m < n; ++m) {
        const double g = f.gamma(x, y, m);
        EXPECT_NEAR(nn.nabla_coeff(m).value().at(0), g + t.k(t.k0, x, y, m), 1e-14);
        EXPECT_NEAR(ni.nabla_coeff(m).value().at(0), t.k(t.k1, x, y, m), 1e-14);
        EXPECT_NEAR(ni.insert_coeff(m).value().at(0), g + t.k(t.l1, x, y, m), 1e-14);
        EXPECT_NEAR(in.nabla_coeff(m).value().at(0), t.k(t.k2, x, y, m), 1e-14);
        EXPECT_NEAR(in.insert_coeff(m).value().at(0), t.k(t.l2, x, y, m), 1e-14);
        EXPECT_NEAR(ii.nabla_coeff(m).value().at(0), t.k(t.k3, x, y, m), 1e-14);
        EXPECT_NEAR(ii.insert_coeff(m).value().at(0), t.k(t.l3, x, y, m), 1e-14);
        for (int k = 0; k < n; ++k)
          EXPECT_NEAR(nn.insert_coeff(m).value().at(Mask{1} << k), kVectorFormInsertionSign * t.L0(x, y, k, m),
                      1e-14);
      }
    }
}

TEST(Action, OmegaLinearInFirstSlot) {
  const auto f = curvature_from_gamma(scenarios::random_metric(2, 8));
  const auto t = sample_fedosov(f, 8).tensors;
  const Superconnection sc(f, t);
  const auto sp = sc.space();
  const FormField phi = FormField::term(Jet::constant(sp, 0.7), 0b01);
  const Derivation d = phi * Derivation::basic(sp, insert_(1));
  const Derivation lhs = sc.apply(d, Derivation::basic(sp, nabla_(0)));
  const Derivation rhs = phi * sc.basic_action(insert_(1), nabla_(0));
  EXPECT_LT((lhs - rhs).max_abs_value(), 1e-14);
}

TEST(Torsion, AsymmetricK0ShowsOnlyInNablaPart) {
  const auto f = curvature_from_gamma(scenarios::round_sphere(0.9, 0.0));
  auto t = sample_fedosov(f, 3).tensors;
  bump(t.k0, idx3(2, 0, 1, 1), 0.4);
  const Superconnection sc(f, t);
  const auto tor = sc.torsion(nabla_(0), nabla_(1));
  EXPECT_NEAR(tor.nabla_coeff(1).value().at(0), 0.4, 1e-14);
  EXPECT_LT(tor.insert_coeff(0).value().max_abs() + tor.insert_coeff(1).value().max_abs(), 1e-14);
  for (const Basic a : basic_derivations(2))
    for (const Basic b : basic_derivations(2)) {
      if (a.kind == BasicKind::nabla && b.kind == BasicKind::nabla && a.index != b.index) continue;
      EXPECT_LT(sc.torsion(a, b).max_abs_value(), 1e-14) << to_string(a) << to_string(b);
    }
}

TEST(Functional, ViolationOfELocalizes) {
  const auto f = curvature_from_gamma(scenarios::random_metric(3, 5));
  auto t = sample_fedosov(f, 5).tensors;
  bump(t.l1, idx3(3, 2, 0, 1), 0.3);
  const auto r = compatibility_functional(t, build_omega_H(f), f);
  for (int p = 0; p < 8; ++p) {
    const auto name = CompatibilityFunctionalReport::pattern_name(p);
    if (name == "nni" || name == "nin") EXPECT_GT(r.by_pattern[p], 1e-2) << name;
    else EXPECT_LT(r.by_pattern[p], 1e-10) << name;
  }
}

TEST(Functional, ConditionBCoversOnePatternOnly) {
  // Without K1(X,Y) = K2(Y,X), (b) alone leaves the (i,i,nabla) pattern open.
  const auto f = curvature_from_gamma(scenarios::round_sphere(0.9, 0.0));
  auto t = sample_fedosov(f, 1).tensors;
  const int n = 2;
  const Matrix h = f.h_matrix(), hinv = h.inverse();
  bump(t.k2, idx3(n, 0, 1, 1), 0.3);
  for (int x = 0; x < n; ++x)
    for (int z = 0; z < n; ++z)
      for (int q = 0; q < n; ++q) {
        double v = 0.0;
        for (int y = 0; y < n; ++y)
          for (int p = 0; p < n; ++p) v -= hinv(q, y) * t.k(t.k2, x, y, p) * h(p, z);
        bump(t.l3, idx3(n, x, z, q), v);
      }
  EXPECT_LT(compatibility_predicate(t, f).max(), 1e-12);
  EXPECT_GT(symmetry_predicate(t, f).k1k2, 1e-2);
  const auto r = compatibility_functional(t, build_omega_H(f), f);
  EXPECT_LT(r.by_pattern[5], 1e-12);  // ini
  EXPECT_GT(r.by_pattern[6], 1e-2);   // iin
}

TEST(Functional, EquivalentToPredicateOnSymmetricData) {
  int agree = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto f = seed % 2 ? curvature_from_gamma(scenarios::round_sphere(0.5 + 0.01 * seed, 0.0, 1.0, 0.3))
                            : curvature_from_gamma(scenarios::random_metric(3, seed));
    auto t = sample_fedosov(f, seed).tensors;
    if (seed % 3 == 0) {
      bump(t.k0, idx3(f.dim(), 0, 1, 0), 0.2);
      bump(t.k0, idx3(f.dim(), 1, 0, 0), 0.2);
    }
    const bool pred = compatibility_predicate(t, f).max() < 1e-9;
    const bool func = compatibility_functional(t, build_omega_H(f), f).max < 1e-9;
    EXPECT_LT(symmetry_predicate(t, f).max(), 1e-10);
    EXPECT_EQ(pred, func) << seed;
    agree += pred == func;
    EXPECT_EQ(pred, seed % 3 != 0);
  }
  EXPECT_EQ(agree, 100);
}

TEST(Sampler, ConsistentAlongSphereScan) {
  for (double th = 1.10; th < 1.25; th += 0.005) {
    const auto f = curvature_from_gamma(scenarios::round_sphere(th, 0.0, 1.0, 0.3));
    EXPECT_LT(sample_fedosov(f, 1, SamplerOptions{false, false, false}).info.consistency, 1e-12) << th;
  }
}
