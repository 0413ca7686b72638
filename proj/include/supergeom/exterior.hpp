#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "supergeom/errors.hpp"

namespace supergeom {

// A multi-index {i1 < i2 < ... < ip} of generators, stored as a bitmask.
using Mask = std::uint32_t;

inline constexpr int kMaxGenerators = 6;

inline int mask_degree(Mask m) { return std::popcount(m); }

// Sign of e_a ^ e_b relative to e_(a|b); zero when the index sets overlap.
inline int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  // Count inversions: pairs (i in a, j in b) with i > j.
  int swaps = 0;
  for (Mask rest = b; rest; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    swaps += std::popcount(a >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

// Sign produced by contracting generator i out of e_m (i must be in m).
inline int contraction_sign(Mask m, int i) {
  const Mask below = m & ((Mask{1} << i) - 1);
  return (std::popcount(below) & 1) ? -1 : 1;
}

inline void check_generators(int n) {
  if (n < 1 || n > kMaxGenerators) {
    throw DimensionMismatch("number of generators must be in [1, 6], got " + std::to_string(n));
  }
}

/// Element of the exterior algebra on n generators, stored densely as the
/// 2^n coefficients indexed by multi-index bitmask.
class ExteriorElement {
 public:
  ExteriorElement() = default;
  explicit ExteriorElement(int n) : n_(n) {
    check_generators(n);
    coeffs_.assign(std::size_t{1} << n, 0.0);
  }

  static ExteriorElement scalar(int n, double value) {
    ExteriorElement e(n);
    e.coeffs_[0] = value;
    return e;
  }

  static ExteriorElement basis(int n, Mask m, double value = 1.0) {
    ExteriorElement e(n);
    e.at(m) = value;
    return e;
  }

  // 0-based generator index.
  static ExteriorElement generator(int n, int i) { return basis(n, Mask{1} << i); }

  int generators() const { return n_; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }

  double operator[](Mask m) const { return coeffs_[m]; }
  double& at(Mask m) {
    if (m >= coeffs_.size()) throw DimensionMismatch("multi-index out of range");
    return coeffs_[m];
  }
  double at(Mask m) const {
    if (m >= coeffs_.size()) throw DimensionMismatch("multi-index out of range");
    return coeffs_[m];
  }

  const std::vector<double>& coefficients() const { return coeffs_; }

  // Part of form degree p.
  ExteriorElement component(int p) const {
    ExteriorElement out(n_);
    for (Mask m = 0; m < coeffs_.size(); ++m) {
      if (mask_degree(m) == p) out.coeffs_[m] = coeffs_[m];
    }
    return out;
  }

  // Highest degree carrying a coefficient above tol, or -1 for zero.
  int degree(double tol = 0.0) const {
    int d = -1;
    for (Mask m = 0; m < coeffs_.size(); ++m) {
      if (std::abs(coeffs_[m]) > tol) d = std::max(d, mask_degree(m));
    }
    return d;
  }

  bool is_homogeneous(double tol = 0.0) const {
    int d = -1;
    for (Mask m = 0; m < coeffs_.size(); ++m) {
      if (std::abs(coeffs_[m]) <= tol) continue;
      if (d >= 0 && mask_degree(m) != d) return false;
      d = mask_degree(m);
    }
    return true;
  }

  double max_abs() const {
    double r = 0.0;
    for (double c : coeffs_) r = std::max(r, std::abs(c));
    return r;
  }

  ExteriorElement& operator+=(const ExteriorElement& o) {
    require_same(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
  }
  ExteriorElement& operator-=(const ExteriorElement& o) {
    require_same(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
  }
  ExteriorElement& operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
  }

  friend ExteriorElement operator+(ExteriorElement a, const ExteriorElement& b) { return a += b; }
  friend ExteriorElement operator-(ExteriorElement a, const ExteriorElement& b) { return a -= b; }
  friend ExteriorElement operator*(ExteriorElement a, double s) { return a *= s; }
  friend ExteriorElement operator*(double s, ExteriorElement a) { return a *= s; }
  friend ExteriorElement operator-(ExteriorElement a) { return a *= -1.0; }

  std::string to_string() const {
    std::ostringstream os;
    bool first = true;
    for (Mask m = 0; m < coeffs_.size(); ++m) {
      if (coeffs_[m] == 0.0) continue;
      if (!first) os << " + ";
      first = false;
      os << coeffs_[m];
      if (m) {
        os << "*e";
        for (int i = 0; i < n_; ++i)
          if (m & (Mask{1} << i)) os << (i + 1);
      }
    }
    if (first) os << "0";
    return os.str();
  }

  void require_same(const ExteriorElement& o) const {
    if (n_ != o.n_) {
      throw DimensionMismatch("exterior elements over " + std::to_string(n_) + " and " +
                              std::to_string(o.n_) + " generators");
    }
  }

 private:
  int n_ = 0;
  std::vector<double> coeffs_;
};

inline ExteriorElement wedge(const ExteriorElement& a, const ExteriorElement& b) {
  a.require_same(b);
  ExteriorElement out(a.generators());
  const Mask count = static_cast<Mask>(a.size());
  for (Mask ma = 0; ma < count; ++ma) {
    const double ca = a[ma];
    if (ca == 0.0) continue;
    for (Mask mb = 0; mb < count; ++mb) {
      const double cb = b[mb];
      if (cb == 0.0) continue;
      const int s = wedge_sign(ma, mb);
      if (s != 0) out.at(ma | mb) += s * ca * cb;
    }
  }
  return out;
}

// Interior product with the i-th dual basis vector (0-based).
inline ExteriorElement contract(const ExteriorElement& a, int i) {
  ExteriorElement out(a.generators());
  const Mask bit = Mask{1} << i;
  for (Mask m = 0; m < a.size(); ++m) {
    if ((m & bit) && a[m] != 0.0) out.at(m & ~bit) += contraction_sign(m, i) * a[m];
  }
  return out;
}

// Main involution: multiplies the degree-p part by (-1)^p.
inline ExteriorElement parity_twist(const ExteriorElement& a) {
  ExteriorElement out = a;
  for (Mask m = 0; m < a.size(); ++m) {
    if (mask_degree(m) & 1) out.at(m) = -a[m];
  }
  return out;
}

}  // namespace supergeom
