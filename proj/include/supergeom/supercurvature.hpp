#pragma once

#include <array>
#include <string>
#include <vector>

#include "supergeom/superconnection.hpp"
#include "supergeom/supermatrix.hpp"

namespace supergeom {

/// <D1, D2, D3 ; Curv> for basic inputs.
inline Derivation graded_curvature(const ConnectionTensors& t, Basic a, Basic b, Basic c, const PointFrame& frame) {
  return Superconnection(frame, t).curvature(a, b, c);
}

// Basic derivations are numbered 0..n-1 for nabla_j and n..2n-1 for i_j.
inline Basic basic_from_index(int n, int k) { return k < n ? nabla_(k) : insert_(k - n); }
inline int basic_index(int n, Basic b) { return b.kind == BasicKind::nabla ? b.index : n + b.index; }

/// Vector-valued exterior tensor T(x,y,z)^p stored at idx4(n, x, y, z, p).
using ExteriorTensor = std::vector<ExteriorElement>;

/// <D1, D2, D3, D4 ; R^w> = << D1, D2, D3 ; Curv >, D4 ; w > over all basic
/// quadruples, with the named tensors extracted from their defining rows:
///
///   <n_X, n_Y, n_Z, n_T> =  H(T, B1(X,Y,Z))     <n_X, i_Y, n_Z, n_T> =  H(T, B3(X,Y,Z))
///   <n_X, n_Y, n_Z, i_T> = -H(A1(X,Y,Z), T)     <n_X, n_Y, i_Z, i_T> = -H(A2(X,Y,Z), T)
///   <n_X, i_Y, n_Z, i_T> = -H(A3(X,Y,Z), T)     <n_X, i_Y, i_Z, i_T> = -H(A4(X,Y,Z), T)
///   <i_X, i_Y, n_Z, i_T> = -H(A5(X,Y,Z), T)
struct CurvatureTable {
  int n = 0;
  std::vector<ExteriorElement> entries;  // (2n)^4, row-major over basic indices
  ExteriorTensor a1, a2, a3, a4, a5, b1, b3;

  const ExteriorElement& at(Basic d1, Basic d2, Basic d3, Basic d4) const {
    const int m = 2 * n;
    return entries[((basic_index(n, d1) * m + basic_index(n, d2)) * m + basic_index(n, d3)) * m + basic_index(n, d4)];
  }
  static constexpr std::array<const char*, 7> names() { return {"A1", "A2", "A3", "A4", "A5", "B1", "B3"}; }
  std::array<const ExteriorTensor*, 7> tensors() const { return {&a1, &a2, &a3, &a4, &a5, &b1, &b3}; }
};

inline double max_abs(const ExteriorTensor& t) {
  double r = 0.0;
  for (const auto& e : t) r = std::max(r, e.max_abs());
  return r;
}

inline double max_diff(const ExteriorTensor& a, const ExteriorTensor& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, (a[i] - b[i]).max_abs());
  return r;
}

// Stricter than the frame check: extraction divides table entries by H.
inline constexpr double kExtractionConditionLimit = 1e8;

/// Fills the table on the frame of a superconnection and extracts the
/// named tensors by inverting the H-pairings.
inline CurvatureTable pair_curvature_with_omega(const Superconnection& sc, const SuperTwoForm& omega) {
  const int n = sc.dim();
  const PointFrame& f = sc.frame();
  const SuperTwoForm w = project(omega, sc.space());
  const Matrix h = f.h_matrix();
  const double cond = condition_number(h);
  if (!(cond <= kExtractionConditionLimit)) {
    throw ExtractionAmbiguous("H-pairing is ill-conditioned (condition number " + std::to_string(cond) + ")");
  }
  const Matrix hinv = h.inverse();
  const int m = 2 * n;
  CurvatureTable t;
  t.n = n;
  t.entries.assign(static_cast<std::size_t>(m * m * m * m), ExteriorElement(n));
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2)
      for (int i3 = 0; i3 < m; ++i3) {
        const Derivation c = sc.curvature(basic_from_index(n, i1), basic_from_index(n, i2), basic_from_index(n, i3));
        for (int i4 = 0; i4 < m; ++i4) {
          t.entries[((i1 * m + i2) * m + i3) * m + i4] =
              w.pair(c, Derivation::basic(sc.space(), basic_from_index(n, i4))).value();
        }
      }
  const std::size_t n4 = static_cast<std::size_t>(n * n * n * n);
  for (ExteriorTensor* p : {&t.a1, &t.a2, &t.a3, &t.a4, &t.a5, &t.b1, &t.b3}) p->assign(n4, ExteriorElement(n));
  // A-rows: -H(A, T) = E_T  =>  A^p = -sum_T E_T (H^{-1})_{Tp}.
  // B-rows:  H(T, B) = E_T  =>  B^p =  sum_T (H^{-1})_{pT} E_T.
  auto extract = [&](ExteriorTensor& out, bool a_row, auto kinds) {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z)
          for (int p = 0; p < n; ++p) {
            ExteriorElement v(n);
            for (int tt = 0; tt < n; ++tt) {
              const auto& e = t.at(kinds[0](x), kinds[1](y), kinds[2](z), kinds[3](tt));
              v += a_row ? (-hinv(tt, p)) * e : hinv(p, tt) * e;
            }
            out[idx4(n, x, y, z, p)] = std::move(v);
          }
  };
  using K = Basic (*)(int);
  const K N = nabla_, I = insert_;
  extract(t.b1, false, std::array<K, 4>{N, N, N, N});
  extract(t.a1, true, std::array<K, 4>{N, N, N, I});
  extract(t.b3, false, std::array<K, 4>{N, I, N, N});
  extract(t.a2, true, std::array<K, 4>{N, N, I, I});
  extract(t.a3, true, std::array<K, 4>{N, I, N, I});
  extract(t.a4, true, std::array<K, 4>{N, I, I, I});
  extract(t.a5, true, std::array<K, 4>{I, I, N, I});
  return t;
}

inline CurvatureTable pair_curvature_with_omega(const ConnectionTensors& t, const SuperTwoForm& omega,
                                                const PointFrame& frame) {
  return pair_curvature_with_omega(Superconnection(frame, t), omega);
}

/// Residuals of the equalities and negations displayed with the table, the
/// two vanishing patterns, and the round trip of the extracted tensors.
struct TableRelationReport {
  std::vector<std::pair<std::string, double>> relations;
  double max() const {
    double r = 0.0;
    for (const auto& [name, v] : relations) r = std::max(r, v);
    return r;
  }
};

inline TableRelationReport table_relations(const CurvatureTable& t, const PointFrame& f) {
  const int n = t.n;
  const Matrix h = f.h_matrix();
  TableRelationReport r;
  auto rel = [&](const std::string& name, auto lhs, auto rhs) {
    double e = 0.0;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z)
          for (int tt = 0; tt < n; ++tt) e = std::max(e, (lhs(x, y, z, tt) - rhs(x, y, z, tt)).max_abs());
    r.relations.emplace_back(name, e);
  };
  auto at = [&](Basic a, Basic b, Basic c, Basic d) { return t.at(a, b, c, d); };
  auto N = nabla_;
  auto I = insert_;
  rel("nnni=nnin", [&](int x, int y, int z, int w) { return at(N(x), N(y), N(z), I(w)); },
      [&](int x, int y, int z, int w) { return at(N(x), N(y), I(w), N(z)); });
  rel("ninn=-innn", [&](int x, int y, int z, int w) { return at(N(x), I(y), N(z), N(w)); },
      [&](int x, int y, int z, int w) { return -1.0 * at(I(y), N(x), N(z), N(w)); });
  rel("nini=niin", [&](int x, int y, int z, int w) { return at(N(x), I(y), N(z), I(w)); },
      [&](int x, int y, int z, int w) { return at(N(x), I(y), I(w), N(z)); });
  rel("nini=-inni", [&](int x, int y, int z, int w) { return at(N(x), I(y), N(z), I(w)); },
      [&](int x, int y, int z, int w) { return -1.0 * at(I(y), N(x), N(z), I(w)); });
  rel("nini=-inin", [&](int x, int y, int z, int w) { return at(N(x), I(y), N(z), I(w)); },
      [&](int x, int y, int z, int w) { return -1.0 * at(I(y), N(x), I(w), N(z)); });
  rel("niii=-inii", [&](int x, int y, int z, int w) { return at(N(x), I(y), I(z), I(w)); },
      [&](int x, int y, int z, int w) { return -1.0 * at(I(y), N(x), I(z), I(w)); });
  rel("iini=iiin", [&](int x, int y, int z, int w) { return at(I(x), I(y), N(z), I(w)); },
      [&](int x, int y, int z, int w) { return at(I(x), I(y), I(w), N(z)); });
  const ExteriorElement zero(n);
  auto vanish = [&](const std::string& name, auto entry) { rel(name, entry, [&](int, int, int, int) { return zero; }); };
  vanish("iinn=0", [&](int x, int y, int z, int w) { return at(I(x), I(y), N(z), N(w)); });
  vanish("iiii=0", [&](int x, int y, int z, int w) { return at(I(x), I(y), I(z), I(w)); });

  // Round trip: re-pair the extracted tensors with H.
  auto hpair_a = [&](const ExteriorTensor& a, int x, int y, int z, int w) {
    ExteriorElement v(n);
    for (int p = 0; p < n; ++p) v += (-h(p, w)) * a[idx4(n, x, y, z, p)];
    return v;
  };
  auto hpair_b = [&](const ExteriorTensor& b, int x, int y, int z, int w) {
    ExteriorElement v(n);
    for (int p = 0; p < n; ++p) v += h(w, p) * b[idx4(n, x, y, z, p)];
    return v;
  };
  rel("roundtrip B1", [&](int x, int y, int z, int w) { return hpair_b(t.b1, x, y, z, w); },
      [&](int x, int y, int z, int w) { return at(N(x), N(y), N(z), N(w)); });
  rel("roundtrip B3", [&](int x, int y, int z, int w) { return hpair_b(t.b3, x, y, z, w); },
      [&](int x, int y, int z, int w) { return at(N(x), I(y), N(z), N(w)); });
  rel("roundtrip A1", [&](int x, int y, int z, int w) { return hpair_a(t.a1, x, y, z, w); },
      [&](int x, int y, int z, int w) { return at(N(x), N(y), N(z), I(w)); });
  rel("roundtrip A2", [&](int x, int y, int z, int w) { return hpair_a(t.a2, x, y, z, w); },
      [&](int x, int y, int z, int w) { return at(N(x), N(y), I(z), I(w)); });
  rel("roundtrip A3", [&](int x, int y, int z, int w) { return hpair_a(t.a3, x, y, z, w); },
      [&](int x, int y, int z, int w) { return at(N(x), I(y), N(z), I(w)); });
  rel("roundtrip A4", [&](int x, int y, int z, int w) { return hpair_a(t.a4, x, y, z, w); },
      [&](int x, int y, int z, int w) { return at(N(x), I(y), I(z), I(w)); });
  rel("roundtrip A5", [&](int x, int y, int z, int w) { return hpair_a(t.a5, x, y, z, w); },
      [&](int x, int y, int z, int w) { return at(I(x), I(y), N(z), I(w)); });
  return r;
}

/// A2(X,Y,Z). = -K3(Curv(X,Y)., Z) and A3(X,Y,Z). = -K3(Y, L0(X,Z).),
/// as vector-valued 1-forms in the form slot ".".
inline std::pair<ExteriorTensor, ExteriorTensor> closed_form_A2_A3(const ConnectionTensors& t, const PointFrame& f) {
  t.validate(f.dim());
  const int n = f.dim();
  const std::size_t n4 = static_cast<std::size_t>(n * n * n * n);
  ExteriorTensor a2(n4, ExteriorElement(n)), a3(n4, ExteriorElement(n));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int p = 0; p < n; ++p) {
          ExteriorElement& v2 = a2[idx4(n, x, y, z, p)];
          ExteriorElement& v3 = a3[idx4(n, x, y, z, p)];
          for (int k = 0; k < n; ++k) {
            double s2 = 0.0, s3 = 0.0;
            for (int m = 0; m < n; ++m) {
              s2 -= f.curvature(x, y, k, m) * t.k(t.k3, m, z, p);
              s3 -= t.k(t.k3, y, m, p) * t.L0(x, z, k, m);
            }
            v2.at(Mask{1} << k) = s2;
            v3.at(Mask{1} << k) = s3;
          }
        }
  return {a2, a3};
}

struct PropositionReport {
  std::array<double, 3> identity{};
  double max() const { return std::max({identity[0], identity[1], identity[2]}); }
};

///   1. A3(X,Y,Z) = A3(Z,Y,X) - A2(X,Z,Y)
///   2. H(A3(X,Y,Z),T) = H(A3(Z,Y,X),T) - H(A2(Z,X,T),Y)
///   3. H(A3(Y,Z,X),T) = -H(A3(Y,T,X),Z)
inline PropositionReport proposition_identities(const CurvatureTable& t, const PointFrame& f) {
  const int n = t.n;
  const Matrix h = f.h_matrix();
  auto A2 = [&](int x, int y, int z, int p) -> const ExteriorElement& { return t.a2[idx4(n, x, y, z, p)]; };
  auto A3 = [&](int x, int y, int z, int p) -> const ExteriorElement& { return t.a3[idx4(n, x, y, z, p)]; };
  // H(A(x,y,z), w) = sum_p A^p H_pw
  auto HA = [&](auto&& a, int x, int y, int z, int w) {
    ExteriorElement v(n);
    for (int p = 0; p < n; ++p) v += h(p, w) * a(x, y, z, p);
    return v;
  };
  PropositionReport r;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int w = 0; w < n; ++w) {
          // w doubles as the vector component in identity 1.
          r.identity[0] = std::max(r.identity[0], (A3(x, y, z, w) - A3(z, y, x, w) + A2(x, z, y, w)).max_abs());
          r.identity[1] = std::max(
              r.identity[1], (HA(A3, x, y, z, w) - HA(A3, z, y, x, w) + HA(A2, z, x, w, y)).max_abs());
          r.identity[2] = std::max(r.identity[2], (HA(A3, y, z, x, w) + HA(A3, y, w, x, z)).max_abs());
        }
  return r;
}

// ---------------------------------------------------------------------------
// Ricci and scalar curvature
// ---------------------------------------------------------------------------

/// A graded Ricci contraction convention:
///   Ric(D1, D2) = eta^{|D1|} ( sum_j [nabla_j-coefficient of E(nabla_j)]
///                              + eps * sum_j [i_j-coefficient of E(i_j)] ),
/// with E(D) = Curv(D1, D) D2 (slot 2) or Curv(D, D1) D2 (slot 1).
struct RicciConvention {
  int slot = 2;
  int eps = -1;
  int eta = 1;
  std::string to_string() const {
    return "slot=" + std::to_string(slot) + ",eps=" + std::to_string(eps) + ",eta=" + std::to_string(eta);
  }
  friend bool operator==(const RicciConvention&, const RicciConvention&) = default;
};

inline std::vector<RicciConvention> ricci_candidates() {
  std::vector<RicciConvention> out;
  for (int slot : {2, 1})
    for (int eps : {-1, 1})
      for (int eta : {1, -1}) out.push_back({slot, eps, eta});
  return out;
}

/// Trace over the second slot, supertrace sign on the odd basis, no twist.
inline constexpr RicciConvention kRicciConvention{2, -1, 1};

/// Partial traces of the curvature endomorphisms, recovered from the table
/// by inverting the H-pairings. Indexed [slot-1][k1 * 2n + k2].
struct RicciTraces {
  int n = 0;
  std::array<std::vector<ExteriorElement>, 2> even, odd;
};

inline RicciTraces ricci_traces(const CurvatureTable& t, const PointFrame& f) {
  const int n = t.n, m = 2 * n;
  const Matrix hinv = checked_inverse(f.h_matrix(), "H");
  RicciTraces r;
  r.n = n;
  for (int s = 0; s < 2; ++s) {
    r.even[s].assign(static_cast<std::size_t>(m * m), ExteriorElement(n));
    r.odd[s].assign(static_cast<std::size_t>(m * m), ExteriorElement(n));
  }
  for (int k1 = 0; k1 < m; ++k1)
    for (int k2 = 0; k2 < m; ++k2) {
      const Basic d1 = basic_from_index(n, k1), d2 = basic_from_index(n, k2);
      for (int j = 0; j < n; ++j)
        for (int tt = 0; tt < n; ++tt) {
          // nabla_j-coefficient a_j: <E, i_T> = -sum_p a_p H_pT.
          // i_j-coefficient b_j:     <E, n_T> =  sum_p H_Tp b_p.
          r.even[1][k1 * m + k2] += (-hinv(tt, j)) * t.at(d1, nabla_(j), d2, insert_(tt));
          r.odd[1][k1 * m + k2] += hinv(j, tt) * t.at(d1, insert_(j), d2, nabla_(tt));
          r.even[0][k1 * m + k2] += (-hinv(tt, j)) * t.at(nabla_(j), d1, d2, insert_(tt));
          r.odd[0][k1 * m + k2] += hinv(j, tt) * t.at(insert_(j), d1, d2, nabla_(tt));
        }
    }
  return r;
}

struct RicciSuperMatrix {
  SuperMatrix blocks;  // [[A, B], [C, D]], even, degree-0 parts
  RicciConvention convention;
  double higher_degree = 0.0;  // largest dropped component of positive form degree
  double antisymmetry() const { return (blocks.c() + blocks.b().transpose()).cwiseAbs().maxCoeff(); }
};

inline RicciSuperMatrix assemble_ricci(const RicciTraces& r, RicciConvention c) {
  const int n = r.n, m = 2 * n;
  const int s = c.slot == 2 ? 1 : 0;
  Matrix blk[4] = {Matrix(n, n), Matrix(n, n), Matrix(n, n), Matrix(n, n)};
  double higher = 0.0;
  for (int k1 = 0; k1 < m; ++k1)
    for (int k2 = 0; k2 < m; ++k2) {
      ExteriorElement v = r.even[s][k1 * m + k2] + static_cast<double>(c.eps) * r.odd[s][k1 * m + k2];
      if (k1 >= n) v *= c.eta;
      blk[2 * (k1 >= n) + (k2 >= n)](k1 % n, k2 % n) = v.at(0);
      v.at(0) = 0.0;
      higher = std::max(higher, v.max_abs());
    }
  return {SuperMatrix(blk[0], blk[1], blk[2], blk[3], Parity::even), c, higher};
}

inline RicciSuperMatrix graded_ricci(const CurvatureTable& t, const PointFrame& f,
                                     RicciConvention c = kRicciConvention) {
  return assemble_ricci(ricci_traces(t, f), c);
}

/// Candidates whose C block equals -B^t within tol.
inline std::vector<RicciConvention> conventions_satisfying_pin(const RicciTraces& r, double tol = 1e-9) {
  std::vector<RicciConvention> out;
  for (const auto& c : ricci_candidates())
    if (assemble_ricci(r, c).antisymmetry() < tol) out.push_back(c);
  return out;
}

struct ScalarCurvature {
  double value = 0.0;
  double term_c = 0.0;  // -Tr(C^t H^{-1})
  double term_b = 0.0;  // Tr(-B^t H^{-t})
  double consistency = 0.0;  // |value - (term_c + term_b)|
};

/// Scal = STr((w^flat)^{-1} o (Ric)^flat) with w^flat = [[0, H], [-H^t, 0]].
inline ScalarCurvature graded_scalar(const RicciSuperMatrix& ric, const PointFrame& f) {
  const int n = f.dim();
  const Matrix h = f.h_matrix();
  const SuperMatrix wflat(Matrix::Zero(n, n), h, -h.transpose(), Matrix::Zero(n, n), Parity::odd);
  ScalarCurvature s;
  s.value = supertrace(superinverse(wflat) * supertranspose(ric.blocks));
  const Matrix hinv = checked_inverse(h, "H");
  s.term_c = -(ric.blocks.c().transpose() * hinv).trace();
  s.term_b = (-ric.blocks.b().transpose() * hinv.transpose()).trace();
  s.consistency = std::abs(s.value - (s.term_c + s.term_b));
  return s;
}

}  // namespace supergeom
