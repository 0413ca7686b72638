#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "supergeom/errors.hpp"
#include "supergeom/jet.hpp"
#include "supergeom/linalg.hpp"

namespace supergeom {

inline std::size_t idx2(int n, int i, int j) { return static_cast<std::size_t>(i * n + j); }
inline std::size_t idx3(int n, int i, int j, int k) { return static_cast<std::size_t>((i * n + j) * n + k); }
inline std::size_t idx4(int n, int i, int j, int k, int l) {
  return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
}

using JetTensor = std::vector<Jet>;

inline JetTensor zero_tensor(const JetSpacePtr& space, std::size_t count) {
  return JetTensor(count, Jet(space));
}

// ---------------------------------------------------------------------------
// Closed-form coefficient tables
// ---------------------------------------------------------------------------

/// coef * prod_k x_k^pow[k] * sin(x_k)^sin[k] * cos(x_k)^cos[k]
struct ChartTerm {
  double coef = 0.0;
  std::vector<int> pow, sin, cos;
};

/// A scalar function on the chart as a finite sum of ChartTerms.
struct ChartFunction {
  std::vector<ChartTerm> terms;

  static ChartFunction constant(double c) { return {{ChartTerm{c, {}, {}, {}}}}; }
  bool is_zero() const {
    for (const auto& t : terms)
      if (t.coef != 0.0) return false;
    return true;
  }
};

namespace detail {

// Taylor jet of x^p sin(x)^s cos(x)^c about x0 in the single variable y_k.
inline Jet univariate_factor(const JetSpacePtr& space, int k, double x0, int p, int s, int c) {
  const int order = space->order();
  auto series = [&](auto&& derivative_at) {
    Jet j(space);
    Jet y = Jet::coordinate(space, k);
    Jet power = Jet::constant(space, 1.0);
    double fact = 1.0;
    for (int d = 0; d <= order; ++d) {
      if (d > 0) {
        power = power * y;
        fact *= d;
      }
      j += power * (derivative_at(d) / fact);
    }
    return j;
  };
  Jet result = Jet::constant(space, 1.0);
  if (p > 0) {
    Jet x = Jet::constant(space, x0) + Jet::coordinate(space, k);
    for (int i = 0; i < p; ++i) result = result * x;
  }
  if (s > 0) {
    Jet sj = series([x0](int d) {
      switch (d % 4) {
        case 0: return std::sin(x0);
        case 1: return std::cos(x0);
        case 2: return -std::sin(x0);
        default: return -std::cos(x0);
      }
    });
    for (int i = 0; i < s; ++i) result = result * sj;
  }
  if (c > 0) {
    Jet cj = series([x0](int d) {
      switch (d % 4) {
        case 0: return std::cos(x0);
        case 1: return -std::sin(x0);
        case 2: return -std::cos(x0);
        default: return std::sin(x0);
      }
    });
    for (int i = 0; i < c; ++i) result = result * cj;
  }
  return result;
}

}  // namespace detail

inline Jet taylor_jet(const ChartFunction& f, const JetSpacePtr& space, const std::vector<double>& point) {
  const int n = space->dim();
  Jet total(space);
  for (const auto& t : f.terms) {
    if (t.coef == 0.0) continue;
    Jet term = Jet::constant(space, t.coef);
    for (int k = 0; k < n; ++k) {
      const int p = k < static_cast<int>(t.pow.size()) ? t.pow[k] : 0;
      const int s = k < static_cast<int>(t.sin.size()) ? t.sin[k] : 0;
      const int c = k < static_cast<int>(t.cos.size()) ? t.cos[k] : 0;
      if (p < 0 || s < 0 || c < 0) throw ScenarioError("negative exponent in chart term");
      if (p == 0 && s == 0 && c == 0) continue;
      term = term * detail::univariate_factor(space, k, point[k], p, s, c);
    }
    total += term;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Matrix-valued jets
// ---------------------------------------------------------------------------

inline Matrix jet_values(const JetTensor& m, int n) {
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = m[idx2(n, i, j)].value();
  return out;
}

inline JetTensor jet_matmul(const JetTensor& a, const JetTensor& b, int n) {
  JetTensor out = zero_tensor(a.front().space(), static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) out[idx2(n, i, j)] += a[idx2(n, i, k)] * b[idx2(n, k, j)];
  return out;
}

/// Inverse of a matrix of jets: (M0 + N)^{-1} = sum_k (-M0^{-1} N)^k M0^{-1}.
inline JetTensor jet_inverse(const JetTensor& m, int n) {
  const JetSpacePtr& space = m.front().space();
  const Matrix m0inv = checked_inverse(jet_values(m, n), "matrix field at the point");
  JetTensor inv0 = zero_tensor(space, n * n);
  JetTensor step = zero_tensor(space, n * n);  // -M0^{-1} N
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv0[idx2(n, i, j)] = Jet::constant(space, m0inv(i, j));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Jet acc(space);
      for (int k = 0; k < n; ++k) {
        Jet nkj = m[idx2(n, k, j)] - Jet::constant(space, m[idx2(n, k, j)].value());
        acc += nkj * (-m0inv(i, k));
      }
      step[idx2(n, i, j)] = acc;
    }
  }
  JetTensor sum = inv0;
  JetTensor term = inv0;
  for (int k = 0; k < space->order(); ++k) {
    term = jet_matmul(step, term, n);
    for (std::size_t e = 0; e < sum.size(); ++e) sum[e] += term[e];
  }
  return sum;
}

// ---------------------------------------------------------------------------
// PointFrame
// ---------------------------------------------------------------------------

/// Pointwise chart data for a coordinate frame at one point. Fields are held
/// as jets in centred coordinates; accessors return values at the point.
///
///   gamma(i,j,k)       = Gamma^k_{ij},  nabla_{d_i} d_j = Gamma^k_{ij} d_k
///   curvature(i,j,k,l) = (Curv(d_i,d_j) d_k)^l
///   nabla_h(k,i,j)     = (nabla_k H)_{ij}
class PointFrame {
 public:
  PointFrame(JetSpacePtr space, JetTensor h, JetTensor gamma) : space_(std::move(space)) {
    n_ = space_->dim();
    if (h.size() != static_cast<std::size_t>(n_ * n_)) throw DimensionMismatch("H must be n x n");
    if (gamma.size() != static_cast<std::size_t>(n_ * n_ * n_))
      throw DimensionMismatch("Gamma must be n x n x n");
    h_ = std::move(h);
    gamma_ = std::move(gamma);
    compute_derived();
  }

  int dim() const { return n_; }
  const JetSpacePtr& space() const { return space_; }

  /// The same frame in a lower-order jet space. Curvature, nabla H and
  /// H^{-1} are projected from the full-order jets, not recomputed.
  PointFrame truncated(int order) const {
    PointFrame f;
    f.space_ = make_jet_space(n_, order);
    f.n_ = n_;
    auto proj = [&](const JetTensor& t) {
      JetTensor out;
      out.reserve(t.size());
      for (const auto& j : t) out.push_back(j.project(f.space_));
      return out;
    };
    f.h_ = proj(h_);
    f.gamma_ = proj(gamma_);
    f.curv_ = proj(curv_);
    f.nabla_h_ = proj(nabla_h_);
    f.h_inv_ = proj(h_inv_);
    return f;
  }

  const Jet& h_jet(int i, int j) const { return h_[idx2(n_, i, j)]; }
  const Jet& gamma_jet(int i, int j, int k) const { return gamma_[idx3(n_, i, j, k)]; }
  const Jet& curvature_jet(int i, int j, int k, int l) const { return curv_[idx4(n_, i, j, k, l)]; }
  const Jet& nabla_h_jet(int k, int i, int j) const { return nabla_h_[idx3(n_, k, i, j)]; }
  const JetTensor& h_jets() const { return h_; }
  const JetTensor& gamma_jets() const { return gamma_; }
  const JetTensor& h_inverse_jets() const { return h_inv_; }

  double h(int i, int j) const { return h_jet(i, j).value(); }
  double gamma(int i, int j, int k) const { return gamma_jet(i, j, k).value(); }
  double curvature(int i, int j, int k, int l) const { return curvature_jet(i, j, k, l).value(); }
  double nabla_h(int k, int i, int j) const { return nabla_h_jet(k, i, j).value(); }
  // Frame derivative d_k H_{ij}.
  double dh(int k, int i, int j) const { return h_jet(i, j).linear(k); }
  double torsion(int i, int j, int k) const { return gamma(i, j, k) - gamma(j, i, k); }
  // Structure coefficients [X_i, X_j]^k; coordinate frames only.
  double frame_bracket(int, int, int) const { return 0.0; }

  Matrix h_matrix() const { return jet_values(h_, n_); }
  Matrix h_inverse() const { return jet_values(h_inv_, n_); }

  double max_curvature() const {
    double r = 0.0;
    for (const auto& j : curv_) r = std::max(r, std::abs(j.value()));
    return r;
  }

 private:
  PointFrame() = default;

  void compute_derived() {
    const int n = n_;
    curv_ = zero_tensor(space_, static_cast<std::size_t>(n * n * n * n));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            Jet r = gamma_jet(j, k, l).derivative(i) - gamma_jet(i, k, l).derivative(j);
            for (int m = 0; m < n; ++m) {
              r += gamma_jet(i, m, l) * gamma_jet(j, k, m);
              r -= gamma_jet(j, m, l) * gamma_jet(i, k, m);
            }
            curv_[idx4(n, j, i, k, l)] = -r;
            curv_[idx4(n, i, j, k, l)] = std::move(r);
          }
    nabla_h_ = zero_tensor(space_, static_cast<std::size_t>(n * n * n));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Jet v = h_jet(i, j).derivative(k);
          for (int m = 0; m < n; ++m) {
            v -= gamma_jet(k, i, m) * h_jet(m, j);
            v -= gamma_jet(k, j, m) * h_jet(i, m);
          }
          nabla_h_[idx3(n, k, i, j)] = v;
        }
    h_inv_ = jet_inverse(h_, n);
  }

  JetSpacePtr space_;
  int n_ = 0;
  JetTensor h_, gamma_, curv_, nabla_h_, h_inv_;
};

// ---------------------------------------------------------------------------
// GeometryScenario
// ---------------------------------------------------------------------------

enum class SymmetryClass { symmetric, skew, generic };

inline std::string to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::symmetric: return "symmetric";
    case SymmetryClass::skew: return "skew";
    default: return "generic";
  }
}

enum class ConnectionKind {
  christoffel,       // Gamma given directly
  levi_civita,       // from the metric table
  symplectic_cubic,  // Gamma^m_ij = S_ijk (H^{-1})_km with S totally symmetric
};

struct GeometryScenario {
  std::string name;
  int dim = 0;
  int jet_order = 3;
  std::vector<double> point;
  std::vector<double> domain_lower, domain_upper;  // empty means unbounded
  SymmetryClass h_class = SymmetryClass::generic;
  std::vector<ChartFunction> metric;  // n*n, needed for levi_civita
  std::vector<ChartFunction> h;       // n*n; empty means H = metric
  ConnectionKind connection = ConnectionKind::christoffel;
  std::vector<ChartFunction> gamma;   // n^3 Gamma^k_ij, christoffel
  std::vector<ChartFunction> cubic;   // n^3 S_ijk, symplectic_cubic
};

inline void check_domain(const GeometryScenario& s) {
  if (static_cast<int>(s.point.size()) != s.dim) throw ScenarioError("evaluation point has wrong dimension");
  for (int k = 0; k < s.dim; ++k) {
    const bool below = !s.domain_lower.empty() && !(s.point[k] > s.domain_lower[k]);
    const bool above = !s.domain_upper.empty() && !(s.point[k] < s.domain_upper[k]);
    if (below || above) {
      throw OutsideChartDomain("evaluation point coordinate " + std::to_string(k + 1) +
                               " lies outside the chart domain");
    }
  }
}

inline JetTensor table_jets(const std::vector<ChartFunction>& table, const JetSpacePtr& space,
                            const std::vector<double>& point) {
  JetTensor out;
  out.reserve(table.size());
  for (const auto& f : table) out.push_back(taylor_jet(f, space, point));
  return out;
}

/// Christoffel symbols of the Levi-Civita connection of a metric field.
inline JetTensor levi_civita(const JetTensor& g, int n, double sym_tol = 1e-12) {
  const Matrix g0 = jet_values(g, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if ((g[idx2(n, i, j)] - g[idx2(n, j, i)]).max_abs() > sym_tol * std::max(1.0, g0.cwiseAbs().maxCoeff()))
        throw NonSymmetric("metric table is not symmetric");
    }
  Eigen::LLT<Matrix> llt(g0);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("metric is not positive definite at the point");
  const JetSpacePtr& space = g.front().space();
  const JetTensor ginv = jet_inverse(g, n);
  JetTensor gamma = zero_tensor(space, static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<Jet> lowered(n, Jet(space));  // Gamma_{ij,l}
      for (int l = 0; l < n; ++l) {
        lowered[l] = 0.5 * (g[idx2(n, j, l)].derivative(i) + g[idx2(n, i, l)].derivative(j) -
                            g[idx2(n, i, j)].derivative(l));
      }
      for (int k = 0; k < n; ++k) {
        Jet acc(space);
        for (int l = 0; l < n; ++l) acc += ginv[idx2(n, k, l)] * lowered[l];
        gamma[idx3(n, i, j, k)] = acc;
      }
    }
  return gamma;
}

/// Builds the PointFrame of a scenario: Taylor jets of H and Gamma at the
/// evaluation point, with Curv^nabla computed exactly from the Gamma jets.
inline PointFrame curvature_from_gamma(const GeometryScenario& s) {
  check_generators(s.dim);
  check_domain(s);
  const int n = s.dim;
  const auto space = make_jet_space(n, s.jet_order);
  const std::size_t n2 = static_cast<std::size_t>(n * n), n3 = n2 * n;

  JetTensor metric;
  if (!s.metric.empty()) {
    if (s.metric.size() != n2) throw ScenarioError("metric table must have n*n entries");
    metric = table_jets(s.metric, space, s.point);
  }
  JetTensor h;
  if (!s.h.empty()) {
    if (s.h.size() != n2) throw ScenarioError("H table must have n*n entries");
    h = table_jets(s.h, space, s.point);
  } else if (!metric.empty()) {
    h = metric;
  } else {
    throw ScenarioError("scenario defines neither H nor a metric");
  }

  JetTensor gamma;
  switch (s.connection) {
    case ConnectionKind::christoffel:
      if (s.gamma.empty()) {
        gamma = zero_tensor(space, n3);
      } else {
        if (s.gamma.size() != n3) throw ScenarioError("Gamma table must have n^3 entries");
        gamma = table_jets(s.gamma, space, s.point);
      }
      break;
    case ConnectionKind::levi_civita:
      if (metric.empty()) throw ScenarioError("levi-civita connection requires a metric table");
      gamma = levi_civita(metric, n);
      break;
    case ConnectionKind::symplectic_cubic: {
      if (s.cubic.size() != n3) throw ScenarioError("cubic table must have n^3 entries");
      const JetTensor cubic = table_jets(s.cubic, space, s.point);
      const JetTensor hinv = jet_inverse(h, n);
      gamma = zero_tensor(space, n3);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m) {
            Jet acc(space);
            for (int k = 0; k < n; ++k) acc += cubic[idx3(n, i, j, k)] * hinv[idx2(n, k, m)];
            gamma[idx3(n, i, j, m)] = acc;
          }
      break;
    }
  }
  return PointFrame(space, std::move(h), std::move(gamma));
}

/// Max-norm of the components of nabla H at the point.
inline double check_nabla_H(const PointFrame& f) {
  const int n = f.dim();
  double r = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r = std::max(r, std::abs(f.nabla_h(k, i, j)));
  return r;
}

// Max-norm of nabla B at the point for a bilinear-form field B.
inline double nabla_form_residual(const PointFrame& f, const JetTensor& b) {
  const int n = f.dim();
  double r = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = b[idx2(n, i, j)].linear(k);
        for (int m = 0; m < n; ++m) {
          v -= f.gamma(k, i, m) * b[idx2(n, m, j)].value();
          v -= f.gamma(k, j, m) * b[idx2(n, i, m)].value();
        }
        r = std::max(r, std::abs(v));
      }
  return r;
}

enum class FormKind { metric, symplectic };

struct RicciScalar {
  Matrix ricci;
  double scalar = 0.0;
};

/// Ric(X,Y) = Tr(Z -> Curv(Z,X)Y) and S = Tr(B^{-1} Ric).
///
/// The trace is taken over the endomorphism slot; the slot order is the one
/// for which the unit round sphere has S = +2.
inline RicciScalar ricci_and_scalar(const PointFrame& f, const JetTensor& b, FormKind kind,
                                    double compat_tol = 1e-9) {
  const int n = f.dim();
  if (b.size() != static_cast<std::size_t>(n * n)) throw DimensionMismatch("bilinear form must be n x n");
  if (kind == FormKind::symplectic) {
    const double res = nabla_form_residual(f, b);
    if (res > compat_tol) {
      throw IncompatibleConnection("connection does not parallelize the symplectic form (residual " +
                                   std::to_string(res) + ")");
    }
  }
  RicciScalar out;
  out.ricci = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) out.ricci(x, y) += f.curvature(z, x, y, z);
  const Matrix binv = checked_inverse(jet_values(b, n), "bilinear form");
  out.scalar = (binv * out.ricci).trace();
  return out;
}

inline RicciScalar ricci_and_scalar(const PointFrame& f, FormKind kind, double compat_tol = 1e-9) {
  return ricci_and_scalar(f, f.h_jets(), kind, compat_tol);
}

}  // namespace supergeom
