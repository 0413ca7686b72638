#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "supergeom/chart.hpp"
#include "supergeom/derivation.hpp"
#include "supergeom/linalg.hpp"

namespace supergeom {

/// The eight tensors of a superconnection relative to a linear connection.
///
///   K0..K3, L1..L3 : idx3(n, x, y, m) = (K(d_x, d_y))^m
///   L0             : idx4(n, x, y, k, l) = (L0(d_x, d_y))^l_k, a vector-valued
///                    1-form with form slot k and vector slot l.
///
/// Entries are jets in centred chart coordinates; only the value and first
/// derivatives at the point enter any computation.
struct ConnectionTensors {
  int n = 0;
  JetSpacePtr space;
  JetTensor k0, k1, k2, k3, l1, l2, l3, l0;

  static ConnectionTensors zero(const JetSpacePtr& space) {
    ConnectionTensors t;
    t.n = space->dim();
    t.space = space;
    const std::size_t n3 = static_cast<std::size_t>(t.n * t.n * t.n);
    for (JetTensor* p : {&t.k0, &t.k1, &t.k2, &t.k3, &t.l1, &t.l2, &t.l3}) *p = zero_tensor(space, n3);
    t.l0 = zero_tensor(space, n3 * t.n);
    return t;
  }

  std::array<JetTensor*, 8> all() { return {&k0, &k1, &k2, &k3, &l0, &l1, &l2, &l3}; }
  std::array<const JetTensor*, 8> all() const { return {&k0, &k1, &k2, &k3, &l0, &l1, &l2, &l3}; }
  static constexpr std::array<const char*, 8> names() { return {"K0", "K1", "K2", "K3", "L0", "L1", "L2", "L3"}; }

  ConnectionTensors project(const JetSpacePtr& target) const {
    ConnectionTensors out = *this;
    out.space = target;
    for (JetTensor* t : out.all())
      for (Jet& j : *t) j = j.project(target);
    return out;
  }

  // Shape check against a dimension.
  void validate(int dim) const {
    const std::size_t n3 = static_cast<std::size_t>(dim * dim * dim);
    if (n != dim) throw DimensionMismatch("connection tensors have dimension " + std::to_string(n));
    const auto ts = all();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::size_t want = i == 4 ? n3 * dim : n3;
      if (ts[i]->size() != want) throw DimensionMismatch(std::string(names()[i]) + " has the wrong shape");
    }
  }

  double k(const JetTensor& t, int x, int y, int m) const { return t[idx3(n, x, y, m)].value(); }
  double L0(int x, int y, int k, int l) const { return l0[idx4(n, x, y, k, l)].value(); }
};

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

/// Max residuals of the six symmetry rows.
struct SymmetryReport {
  double k0 = 0.0;    // K0(X,Y) - K0(Y,X) + Tor(X,Y)
  double l0 = 0.0;    // L0(X,Y) - L0(Y,X) - Curv(X,Y)
  double k1k2 = 0.0;  // K1(X,Y) - K2(Y,X)
  double l1l2 = 0.0;  // L1(X,Y) - L2(Y,X)
  double k3 = 0.0;    // K3(X,Y) + K3(Y,X)
  double l3 = 0.0;    // L3(X,Y) + L3(Y,X)

  std::array<double, 6> rows() const { return {k0, l0, k1k2, l1l2, k3, l3}; }
  static constexpr std::array<const char*, 6> names() { return {"K0", "L0", "K1K2", "L1L2", "K3", "L3"}; }
  double max() const {
    double r = 0.0;
    for (double v : rows()) r = std::max(r, v);
    return r;
  }
};

inline SymmetryReport symmetry_predicate(const ConnectionTensors& t, const PointFrame& f) {
  t.validate(f.dim());
  const int n = f.dim();
  SymmetryReport r;
  auto upd = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int m = 0; m < n; ++m) {
        const double tor = f.torsion(x, y, m) - f.frame_bracket(x, y, m);
        upd(r.k0, t.k(t.k0, x, y, m) - t.k(t.k0, y, x, m) + tor);
        upd(r.k1k2, t.k(t.k1, x, y, m) - t.k(t.k2, y, x, m));
        upd(r.l1l2, t.k(t.l1, x, y, m) - t.k(t.l2, y, x, m));
        upd(r.k3, t.k(t.k3, x, y, m) + t.k(t.k3, y, x, m));
        upd(r.l3, t.k(t.l3, x, y, m) + t.k(t.l3, y, x, m));
        for (int l = 0; l < n; ++l) upd(r.l0, t.L0(x, y, m, l) - t.L0(y, x, m, l) - f.curvature(x, y, m, l));
      }
  return r;
}

/// Max residuals of the six compatibility conditions (a)-(f), written
/// literally with H(U, V) = U^p H_pq V^q.
struct CompatibilityReport {
  std::array<double, 6> cond{};  // (a)..(f)
  double max() const {
    double r = 0.0;
    for (double v : cond) r = std::max(r, v);
    return r;
  }
  static constexpr std::array<const char*, 6> names() { return {"a", "b", "c", "d", "e", "f"}; }
};

inline constexpr double kParallelTolerance = 1e-10;

inline void require_parallel_H(const PointFrame& f, double tol = kParallelTolerance) {
  const double r = check_nabla_H(f);
  if (r > tol) {
    throw IncompatibleFrame("nabla H does not vanish at the point (residual " + std::to_string(r) + ")");
  }
}

inline CompatibilityReport compatibility_predicate(const ConnectionTensors& t, const PointFrame& f) {
  t.validate(f.dim());
  require_parallel_H(f);
  const int n = f.dim();
  const Matrix h = f.h_matrix();
  // H(V, d_z) and H(d_y, V) for V = T(x, y).
  auto hv = [&](const JetTensor& a, int x, int y, int z) {
    double s = 0.0;
    for (int p = 0; p < n; ++p) s += t.k(a, x, y, p) * h(p, z);
    return s;
  };
  auto vh = [&](int y, const JetTensor& a, int x, int z) {
    double s = 0.0;
    for (int q = 0; q < n; ++q) s += h(y, q) * t.k(a, x, z, q);
    return s;
  };
  CompatibilityReport r;
  auto upd = [&](int c, double v) { r.cond[c] = std::max(r.cond[c], std::abs(v)); };
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        upd(0, hv(t.k3, x, y, z) + hv(t.k3, x, z, y));
        upd(1, hv(t.k2, x, y, z) + vh(y, t.l3, x, z));
        upd(2, vh(x, t.l2, y, z) - vh(z, t.l2, y, x));
        upd(3, hv(t.k1, x, y, z) - hv(t.k1, x, z, y));
        upd(4, hv(t.k0, x, y, z) + vh(y, t.l1, x, z));
        for (int k = 0; k < n; ++k) {
          double v = 0.0;
          for (int q = 0; q < n; ++q) v += h(x, q) * t.L0(y, z, k, q) - h(z, q) * t.L0(y, x, k, q);
          upd(5, v);
        }
      }
  return r;
}

// ---------------------------------------------------------------------------
// Forced vanishing
// ---------------------------------------------------------------------------

struct ForcedVanishingCertificate {
  int n = 0;
  Eigen::Index unknowns = 0;
  Eigen::Index equations = 0;
  Eigen::Index rank = 0;
  Eigen::Index nullspace_dim = 0;
  // Largest K1, K2, L3 component over the orthonormal nullspace basis.
  double max_k1 = 0.0, max_k2 = 0.0, max_l3 = 0.0;
  // Dimension of the K3 family that remains (rank of the K3 block of the basis).
  Eigen::Index k3_free_dim = 0;
  bool forced = false;  // K1 = K2 = L3 = 0 on every solution
};

/// Unknowns (K1, K2, K3, L3) at the point; rows: conditions (a), (b), (d),
/// K1(X,Y) = K2(Y,X), K3 and L3 skew. The kernel is computed by SVD.
inline ForcedVanishingCertificate forced_vanishing_check(const PointFrame& f, double tol = 1e-10) {
  const int n = f.dim();
  const Matrix h = f.h_matrix();
  checked_inverse(h, "H");
  require_parallel_H(f);
  const int n3 = n * n * n;
  auto K1 = [&](int x, int y, int m) { return static_cast<Eigen::Index>(idx3(n, x, y, m)); };
  auto K2 = [&](int x, int y, int m) { return n3 + K1(x, y, m); };
  auto K3 = [&](int x, int y, int m) { return 2 * n3 + K1(x, y, m); };
  auto L3 = [&](int x, int y, int m) { return 3 * n3 + K1(x, y, m); };
  const Eigen::Index rows = 6 * static_cast<Eigen::Index>(n3);
  Matrix a = Matrix::Zero(rows, 4 * n3);
  Eigen::Index r = 0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z, ++r) {
        for (int p = 0; p < n; ++p) {
          a(r, K3(x, y, p)) += h(p, z);  // (a)
          a(r, K3(x, z, p)) += h(p, y);
          a(r + n3, K2(x, y, p)) += h(p, z);  // (b)
          a(r + n3, L3(x, z, p)) += h(y, p);
          a(r + 2 * n3, K1(x, y, p)) += h(p, z);  // (d)
          a(r + 2 * n3, K1(x, z, p)) -= h(p, y);
        }
        const int m = z;
        a(r + 3 * n3, K1(x, y, m)) += 1.0;
        a(r + 3 * n3, K2(y, x, m)) -= 1.0;
        a(r + 4 * n3, K3(x, y, m)) += 1.0;
        a(r + 4 * n3, K3(y, x, m)) += 1.0;
        a(r + 5 * n3, L3(x, y, m)) += 1.0;
        a(r + 5 * n3, L3(y, x, m)) += 1.0;
      }
  const KernelSolver solver(a, tol);
  const Matrix& kernel = solver.kernel();
  ForcedVanishingCertificate c;
  c.n = n;
  c.unknowns = a.cols();
  c.equations = a.rows();
  c.rank = solver.rank();
  c.nullspace_dim = kernel.cols();
  if (kernel.cols() > 0) {
    c.max_k1 = kernel.middleRows(0, n3).cwiseAbs().maxCoeff();
    c.max_k2 = kernel.middleRows(n3, n3).cwiseAbs().maxCoeff();
    c.max_l3 = kernel.middleRows(3 * n3, n3).cwiseAbs().maxCoeff();
    c.k3_free_dim = KernelSolver(kernel.middleRows(2 * n3, n3).transpose(), tol).rank();
  }
  c.forced = std::max({c.max_k1, c.max_k2, c.max_l3}) < 1e-9;
  return c;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

// Linear jet equation sum_u c_u(y) x_u(y) = rhs(y), solved through order 1.
struct JetRow {
  std::vector<std::pair<int, Jet>> terms;
  Jet rhs;
};

struct JetSolveInfo {
  Eigen::Index free_dim = 0;   // kernel dimension at each order
  double consistency = 0.0;    // worst residual of the particular solutions
};

inline Jet linear_jet(const JetSpacePtr& space, const Vector& coeffs) {
  Jet j = Jet::constant(space, coeffs(0));
  for (int k = 0; k < space->dim(); ++k) j += Jet::coordinate(space, k) * coeffs(k + 1);
  return j;
}

// Minimum-norm particular solution plus, when rng is given, a random
// kernel element at every order.
inline std::vector<Jet> solve_jet_system(const JetSpacePtr& space, int unknowns, const std::vector<JetRow>& rows,
                                         std::mt19937_64* rng, JetSolveInfo& info) {
  const int n = space->dim();
  const auto m = static_cast<Eigen::Index>(rows.size());
  std::vector<Matrix> a(n + 1, Matrix::Zero(m, unknowns));
  std::vector<Vector> b(n + 1, Vector::Zero(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (const auto& [u, c] : rows[r].terms) {
      a[0](r, u) += c.value();
      for (int k = 0; k < n; ++k) a[k + 1](r, u) += c.linear(k);
    }
    b[0](r) = rows[r].rhs.value();
    for (int k = 0; k < n; ++k) b[k + 1](r) = rows[r].rhs.linear(k);
  }
  const KernelSolver solver(a[0]);
  info.free_dim = solver.kernel().cols();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&](const LinearSolution& s) {
    Vector z(s.kernel.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng ? u(*rng) : 0.0;
    info.consistency = std::max(info.consistency, s.residual);
    return Vector(s.particular + s.kernel * z);
  };
  std::vector<Vector> x(n + 1);
  x[0] = draw(solver.solve(b[0]));
  for (int k = 0; k < n; ++k) x[k + 1] = draw(solver.solve(b[k + 1] - a[k + 1] * x[0]));
  std::vector<Jet> out;
  out.reserve(unknowns);
  for (int v = 0; v < unknowns; ++v) {
    Vector c(n + 1);
    for (int k = 0; k <= n; ++k) c(k) = x[k](v);
    out.push_back(linear_jet(space, c));
  }
  return out;
}

}  // namespace detail

struct FedosovInfo {
  Eigen::Index k3_free_dim = 0;
  Eigen::Index l0_free_dim = 0;
  bool k3_empty_family = false;  // K3 forced to 0
  bool l0_empty_family = false;  // L0 forced to its curvature part
  double consistency = 0.0;
};

struct FedosovSample {
  ConnectionTensors tensors;
  FedosovInfo info;
};

struct SamplerOptions {
  bool sample_k0 = true;
  bool sample_k3 = true;
  bool sample_l0 = true;  // free symmetric part of L0
};

/// Draws a symmetric superconnection compatible with omega_H: K1 = K2 =
/// L3 = 0, K0 random symmetric, L1 and L2 from condition (e), K3 from a
/// kernel parametrization of skewness and (a), L0 from its curvature part
/// plus a kernel element of (f). Tensors are first-order jets.
inline FedosovSample sample_fedosov(const PointFrame& frame, std::uint64_t seed, SamplerOptions opt = {}) {
  require_parallel_H(frame);
  const int n = frame.dim();
  const auto space = make_jet_space(n, 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  checked_inverse(frame.h_matrix(), "H");

  JetTensor h, hinv, curv;
  for (const auto& j : frame.h_jets()) h.push_back(j.project(space));
  for (const auto& j : frame.h_inverse_jets()) hinv.push_back(j.project(space));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) curv.push_back(frame.curvature_jet(x, y, k, l).project(space));
  auto H = [&](int i, int j) -> const Jet& { return h[idx2(n, i, j)]; };

  FedosovSample out;
  ConnectionTensors& t = out.tensors;
  t = ConnectionTensors::zero(space);

  // K0: symmetric, value and first derivatives uniform.
  for (int x = 0; x < n; ++x)
    for (int y = x; y < n; ++y)
      for (int m = 0; m < n; ++m) {
        Vector c(n + 1);
        for (int k = 0; k <= n; ++k) c(k) = opt.sample_k0 ? u(rng) : 0.0;
        const Jet j = detail::linear_jet(space, c);
        t.k0[idx3(n, x, y, m)] = j;
        t.k0[idx3(n, y, x, m)] = j;
      }

  // L1(X,Z)^q = -(H^{-1})^{qy} H(K0(X,Y), Z);  L2(Y,X) = L1(X,Y).
  for (int x = 0; x < n; ++x)
    for (int z = 0; z < n; ++z)
      for (int q = 0; q < n; ++q) {
        Jet acc(space);
        for (int y = 0; y < n; ++y) {
          Jet hk(space);
          for (int p = 0; p < n; ++p) hk += t.k0[idx3(n, x, y, p)] * H(p, z);
          acc -= hinv[idx2(n, q, y)] * hk;
        }
        t.l1[idx3(n, x, z, q)] = acc;
      }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int m = 0; m < n; ++m) t.l2[idx3(n, y, x, m)] = t.l1[idx3(n, x, y, m)];

  // K3: skew and condition (a).
  {
    std::vector<detail::JetRow> rows;
    const Jet one = Jet::constant(space, 1.0), zero(space);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z) {
          rows.push_back({{{int(idx3(n, x, y, z)), one}, {int(idx3(n, y, x, z)), one}}, zero});
          detail::JetRow a;
          a.rhs = zero;
          for (int p = 0; p < n; ++p) {
            a.terms.push_back({int(idx3(n, x, y, p)), H(p, z)});
            a.terms.push_back({int(idx3(n, x, z, p)), H(p, y)});
          }
          rows.push_back(std::move(a));
        }
    detail::JetSolveInfo info;
    std::mt19937_64 sub(rng());
    t.k3 = detail::solve_jet_system(space, n * n * n, rows, opt.sample_k3 ? &sub : nullptr, info);
    out.info.k3_free_dim = info.free_dim;
    out.info.k3_empty_family = info.free_dim == 0;
    out.info.consistency = std::max(out.info.consistency, info.consistency);
  }

  // L0: antisymmetric part = Curv, condition (f) per form slot.
  {
    std::vector<detail::JetRow> rows;
    const Jet one = Jet::constant(space, 1.0), zero(space);
    auto L = [&](int x, int y, int k, int l) { return int(idx4(n, x, y, k, l)); };
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            rows.push_back({{{L(x, y, k, l), one}, {L(y, x, k, l), -one}}, curv[idx4(n, x, y, k, l)]});
            // (f) with X = x, Y = y, Z = l, form slot k.
            detail::JetRow f;
            f.rhs = zero;
            for (int q = 0; q < n; ++q) {
              f.terms.push_back({L(y, l, k, q), H(x, q)});
              f.terms.push_back({L(y, x, k, q), -H(l, q)});
            }
            rows.push_back(std::move(f));
          }
    detail::JetSolveInfo info;
    std::mt19937_64 sub(rng());
    JetTensor l0 = detail::solve_jet_system(space, n * n * n * n, rows, opt.sample_l0 ? &sub : nullptr, info);
    t.l0 = std::move(l0);
    out.info.l0_free_dim = info.free_dim;
    out.info.l0_empty_family = info.free_dim == 0;
    out.info.consistency = std::max(out.info.consistency, info.consistency);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Action on derivations
// ---------------------------------------------------------------------------

/// Sign of the insertion of a vector-valued 1-form L = e^k (x) L_k:
/// i_L = kVectorFormInsertionSign * sum_k e^k ^ i_{L_k}. With this sign the
/// row L0(X,Y) = L0(Y,X) + Curv(X,Y) is exactly the vanishing of the
/// (nabla, nabla) torsion for the bracket convention above.
inline constexpr int kVectorFormInsertionSign = -1;

/// A superconnection bound to a frame. Computations run on a first-order
/// copy of the frame: every quantity evaluated here depends only on values
/// and first derivatives at the point.
class Superconnection {
 public:
  Superconnection(const PointFrame& frame, const ConnectionTensors& t)
      : frame_(std::make_shared<const PointFrame>(frame.truncated(1))), calc_(*frame_) {
    t.validate(frame.dim());
    t_ = t.project(frame_->space());
  }

  const PointFrame& frame() const { return *frame_; }
  const GradedCalculus& calculus() const { return calc_; }
  const JetSpacePtr& space() const { return frame_->space(); }
  int dim() const { return frame_->dim(); }
  const ConnectionTensors& tensors() const { return t_; }

  Derivation basic_derivation(Basic b) const { return Derivation::basic(space(), b); }

  /// The four-row table on basic pairs.
  Derivation basic_action(Basic a, Basic b) const {
    const int n = dim();
    const int x = a.index, y = b.index;
    Derivation out(space());
    auto put = [&](const JetTensor& nab, const JetTensor& ins, bool add_gamma) {
      for (int m = 0; m < n; ++m) {
        Jet w = ins[idx3(n, x, y, m)];
        if (add_gamma) w += frame_->gamma_jet(x, y, m);
        out.nabla_coeff(m) = FormField::scalar(nab[idx3(n, x, y, m)]);
        out.insert_coeff(m) = FormField::scalar(w);
      }
    };
    if (a.kind == BasicKind::nabla && b.kind == BasicKind::nabla) {
      for (int m = 0; m < n; ++m)
        out.nabla_coeff(m) = FormField::scalar(frame_->gamma_jet(x, y, m) + t_.k0[idx3(n, x, y, m)]);
      for (int l = 0; l < n; ++l) {
        FormField c(space());
        for (int k = 0; k < n; ++k)
          c += FormField::term(t_.l0[idx4(n, x, y, k, l)] * double(kVectorFormInsertionSign), Mask{1} << k);
        out.insert_coeff(l) = std::move(c);
      }
      return out;
    }
    if (a.kind == BasicKind::nabla) {
      put(t_.k1, t_.l1, true);
    } else if (b.kind == BasicKind::nabla) {
      put(t_.k2, t_.l2, false);
    } else {
      put(t_.k3, t_.l3, false);
    }
    return out;
  }

  /// nabla-nabla_{D1} D2 for general derivations: Omega-linear in D1,
  /// graded Leibniz in D2.
  Derivation apply(const Derivation& d1, const Derivation& d2) const {
    Derivation out(space());
    for (const Basic a : basic_derivations(dim())) {
      const FormField& ca = d1.coeff(a);
      if (ca.is_zero()) continue;
      Derivation inner(space());
      for (const Basic b : basic_derivations(dim())) {
        const FormField& cb = d2.coeff(b);
        if (cb.is_zero()) continue;
        // A(c_b) B + (-1)^{|c_b||A|} c_b nabla-nabla_A B
        inner.coeff(b) += calc_.apply(a, cb);
        const FormField moved = a.odd() ? cb.parity_twist() : cb;
        inner += moved * basic_action(a, b);
      }
      out += ca * inner;
    }
    return out;
  }

  Derivation apply(Basic a, const Derivation& d2) const { return apply(basic_derivation(a), d2); }
  Derivation apply(Basic a, Basic b) const { return basic_action(a, b); }

  /// <D1, D2 ; Tor> on basic inputs.
  Derivation torsion(Basic a, Basic b) const {
    return basic_action(a, b) - koszul_sign(a.degree(), b.degree()) * basic_action(b, a) -
           basic_bracket_table(*frame_, a, b);
  }

  /// <D1, D2, D3 ; Curv> = [nn_D1, nn_D2] D3 - nn_{[D1,D2]} D3 on basic inputs.
  Derivation curvature(Basic a, Basic b, Basic c) const {
    const double s = koszul_sign(a.degree(), b.degree());
    Derivation out = apply(a, basic_action(b, c));
    out -= s * apply(b, basic_action(a, c));
    out -= apply(basic_bracket_table(*frame_, a, b), basic_derivation(c));
    return out;
  }

 private:
  std::shared_ptr<const PointFrame> frame_;
  GradedCalculus calc_;
  ConnectionTensors t_;
};

inline Derivation apply_superconnection(const ConnectionTensors& t, const Derivation& d1, const Derivation& d2,
                                        const PointFrame& frame) {
  const Superconnection sc(frame, t);
  const auto& sp = sc.space();
  auto proj = [&](const Derivation& d) {
    Derivation out(sp);
    for (const Basic b : basic_derivations(d.dim())) out.coeff(b) = d.coeff(b).project(sp);
    return out;
  };
  return sc.apply(proj(d1), proj(d2));
}

inline Derivation apply_superconnection(const ConnectionTensors& t, Basic a, Basic b, const PointFrame& frame) {
  return Superconnection(frame, t).basic_action(a, b);
}

inline Derivation graded_torsion(const ConnectionTensors& t, Basic a, Basic b, const PointFrame& frame) {
  return Superconnection(frame, t).torsion(a, b);
}

inline SuperTwoForm project(const SuperTwoForm& w, const JetSpacePtr& space) {
  SuperTwoForm out = w;
  for (auto* block : {&out.nn, &out.ni, &out.in, &out.ii})
    for (auto& v : *block) v = v.project(space);
  return out;
}

/// Max residual of
///   D<D1,D2;w> - <nn_D D1, D2; w> - (-1)^{|D||D1|} <D1, nn_D D2; w>
/// over all basic triples, split by the kinds of (D, D1, D2).
struct CompatibilityFunctionalReport {
  double max = 0.0;
  // Index: 4*[D is i] + 2*[D1 is i] + [D2 is i].
  std::array<double, 8> by_pattern{};

  static std::string pattern_name(int p) {
    std::string s;
    for (int bit = 2; bit >= 0; --bit) s += (p >> bit) & 1 ? 'i' : 'n';
    return s;
  }
};

inline CompatibilityFunctionalReport compatibility_functional(const Superconnection& sc, const SuperTwoForm& omega) {
  const SuperTwoForm w = project(omega, sc.space());
  const auto& calc = sc.calculus();
  CompatibilityFunctionalReport r;
  const auto basics = basic_derivations(sc.dim());
  for (const Basic d : basics)
    for (const Basic d1 : basics)
      for (const Basic d2 : basics) {
        FormField v = calc.apply(d, w.on(d1, d2));
        v -= w.pair(sc.basic_action(d, d1), sc.basic_derivation(d2));
        v -= koszul_sign(d.degree(), d1.degree()) * w.pair(sc.basic_derivation(d1), sc.basic_action(d, d2));
        const double e = v.value().max_abs();
        const int p = 4 * d.odd() + 2 * d1.odd() + d2.odd();
        r.by_pattern[p] = std::max(r.by_pattern[p], e);
        r.max = std::max(r.max, e);
      }
  return r;
}

inline CompatibilityFunctionalReport compatibility_functional(const ConnectionTensors& t, const SuperTwoForm& omega,
                                                              const PointFrame& frame) {
  return compatibility_functional(Superconnection(frame, t), omega);
}

}  // namespace supergeom
