#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "supergeom/errors.hpp"
#include "supergeom/exterior.hpp"

namespace supergeom {

/// Truncated polynomial algebra R[y_1..y_n] / (deg > order), where y are
/// chart coordinates centred at the evaluation point. Fields are carried
/// as jets so that derivatives at the point are exact.
class JetSpace {
 public:
  using Exponent = std::array<std::uint8_t, kMaxGenerators>;

  JetSpace(int n, int order) : n_(n), order_(order) {
    check_generators(n);
    if (order < 0 || order > 8) throw DimensionMismatch("jet order must be in [0, 8]");
    Exponent e{};
    enumerate(0, order, e);
    const std::size_t m = monomials_.size();
    mul_.assign(m * m, -1);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        Exponent s{};
        int total = 0;
        for (int k = 0; k < n_; ++k) {
          s[k] = static_cast<std::uint8_t>(monomials_[a][k] + monomials_[b][k]);
          total += s[k];
        }
        if (total <= order_) mul_[a * m + b] = index_of(s);
      }
    }
    deriv_target_.assign(static_cast<std::size_t>(n_) * m, -1);
    deriv_factor_.assign(static_cast<std::size_t>(n_) * m, 0.0);
    for (int k = 0; k < n_; ++k) {
      for (std::size_t a = 0; a < m; ++a) {
        if (monomials_[a][k] == 0) continue;
        Exponent s = monomials_[a];
        s[k] -= 1;
        deriv_target_[k * m + a] = index_of(s);
        deriv_factor_[k * m + a] = monomials_[a][k];
      }
    }
  }

  int dim() const { return n_; }
  int order() const { return order_; }
  std::size_t size() const { return monomials_.size(); }
  const Exponent& monomial(std::size_t i) const { return monomials_[i]; }
  int total_degree(std::size_t i) const {
    int t = 0;
    for (int k = 0; k < n_; ++k) t += monomials_[i][k];
    return t;
  }

  int index_of(const Exponent& e) const {
    auto it = lookup_.find(encode(e));
    return it == lookup_.end() ? -1 : it->second;
  }

  int product_index(std::size_t a, std::size_t b) const { return mul_[a * size() + b]; }
  int derivative_target(int k, std::size_t a) const { return deriv_target_[k * size() + a]; }
  double derivative_factor(int k, std::size_t a) const { return deriv_factor_[k * size() + a]; }

  // out += s * a * b (truncated)
  void mul_add(const double* a, const double* b, double s, double* out) const {
    const std::size_t m = size();
    for (std::size_t i = 0; i < m; ++i) {
      if (a[i] == 0.0) continue;
      const double ai = s * a[i];
      const int* row = &mul_[i * m];
      for (std::size_t j = 0; j < m; ++j) {
        if (b[j] == 0.0 || row[j] < 0) continue;
        out[row[j]] += ai * b[j];
      }
    }
  }

 private:
  void enumerate(int k, int remaining, Exponent& e) {
    if (k == n_) {
      lookup_.emplace(encode(e), static_cast<int>(monomials_.size()));
      monomials_.push_back(e);
      return;
    }
    for (int p = 0; p <= remaining; ++p) {
      e[k] = static_cast<std::uint8_t>(p);
      enumerate(k + 1, remaining - p, e);
    }
    e[k] = 0;
  }

  std::uint64_t encode(const Exponent& e) const {
    std::uint64_t code = 0;
    for (int k = 0; k < kMaxGenerators; ++k) code = code * 32 + e[k];
    return code;
  }

  int n_;
  int order_;
  std::vector<Exponent> monomials_;
  std::unordered_map<std::uint64_t, int> lookup_;
  std::vector<int> mul_;
  std::vector<int> deriv_target_;
  std::vector<double> deriv_factor_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

inline JetSpacePtr make_jet_space(int n, int order) { return std::make_shared<const JetSpace>(n, order); }

inline void require_same_space(const JetSpacePtr& a, const JetSpacePtr& b) {
  if (a.get() != b.get() && (a->dim() != b->dim() || a->order() != b->order())) {
    throw DimensionMismatch("jets live in different jet spaces");
  }
}

/// Scalar field truncated at the space's order.
class Jet {
 public:
  Jet() = default;
  explicit Jet(JetSpacePtr space) : space_(std::move(space)), c_(space_->size(), 0.0) {}

  static Jet constant(const JetSpacePtr& space, double v) {
    Jet j(space);
    j.c_[0] = v;
    return j;
  }
  // The centred coordinate y_k.
  static Jet coordinate(const JetSpacePtr& space, int k) {
    Jet j(space);
    JetSpace::Exponent e{};
    e[k] = 1;
    const int idx = space->index_of(e);
    if (idx >= 0) j.c_[idx] = 1.0;
    return j;
  }

  const JetSpacePtr& space() const { return space_; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }
  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }

  // Coefficient of y_k (first derivative at the point).
  double linear(int k) const {
    JetSpace::Exponent e{};
    e[k] = 1;
    const int idx = space_->index_of(e);
    return idx < 0 ? 0.0 : c_[idx];
  }

  double max_abs() const {
    double r = 0.0;
    for (double v : c_) r = std::max(r, std::abs(v));
    return r;
  }

  Jet derivative(int k) const {
    Jet out(space_);
    for (std::size_t a = 0; a < c_.size(); ++a) {
      const int t = space_->derivative_target(k, a);
      if (t >= 0) out.c_[t] += space_->derivative_factor(k, a) * c_[a];
    }
    return out;
  }

  Jet& operator+=(const Jet& o) {
    require_same_space(space_, o.space_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    require_same_space(space_, o.space_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    require_same_space(a.space_, b.space_);
    Jet out(a.space_);
    a.space_->mul_add(a.c_.data(), b.c_.data(), 1.0, out.c_.data());
    return out;
  }

  // Re-express in another space (same dimension), dropping higher orders.
  Jet project(const JetSpacePtr& target) const {
    if (target->dim() != space_->dim()) throw DimensionMismatch("jet projection across dimensions");
    Jet out(target);
    for (std::size_t a = 0; a < c_.size(); ++a) {
      if (c_[a] == 0.0) continue;
      const int idx = target->index_of(space_->monomial(a));
      if (idx >= 0) out.c_[idx] = c_[a];
    }
    return out;
  }

 private:
  JetSpacePtr space_;
  std::vector<double> c_;
};

// 1/f as a truncated geometric series about f(0).
inline Jet reciprocal(const Jet& f) {
  const double f0 = f.value();
  if (f0 == 0.0) throw SingularBlock("reciprocal of a jet vanishing at the point");
  Jet nil = f - Jet::constant(f.space(), f0);
  nil *= -1.0 / f0;
  Jet term = Jet::constant(f.space(), 1.0 / f0);
  Jet sum = term;
  for (int k = 0; k < f.space()->order(); ++k) {
    term = term * nil;
    sum += term;
  }
  return sum;
}

/// Differential-form-valued field: one scalar jet per multi-index. Empty
/// component vectors stand for zero.
class FormField {
 public:
  FormField() = default;
  explicit FormField(JetSpacePtr space)
      : space_(std::move(space)), comps_(std::size_t{1} << space_->dim()) {}

  static FormField scalar(const Jet& f) {
    FormField out(f.space());
    out.comps_[0] = f.coeffs();
    return out;
  }
  static FormField constant(const JetSpacePtr& space, const ExteriorElement& e) {
    FormField out(space);
    for (Mask m = 0; m < e.size(); ++m) {
      if (e[m] != 0.0) out.mutable_component(m)[0] = e[m];
    }
    return out;
  }
  static FormField generator(const JetSpacePtr& space, int k) {
    return constant(space, ExteriorElement::generator(space->dim(), k));
  }
  // f * e_mask
  static FormField term(const Jet& f, Mask m) {
    FormField out(f.space());
    out.comps_[m] = f.coeffs();
    return out;
  }

  const JetSpacePtr& space() const { return space_; }
  int generators() const { return space_->dim(); }
  std::size_t mask_count() const { return comps_.size(); }
  bool has(Mask m) const { return !comps_[m].empty(); }
  const std::vector<double>& raw(Mask m) const { return comps_[m]; }

  Jet component_jet(Mask m) const {
    Jet j(space_);
    if (has(m)) j.coeffs() = comps_[m];
    return j;
  }

  std::vector<double>& mutable_component(Mask m) {
    if (comps_[m].empty()) comps_[m].assign(space_->size(), 0.0);
    return comps_[m];
  }

  bool is_zero() const {
    for (const auto& c : comps_) {
      for (double v : c)
        if (v != 0.0) return false;
    }
    return true;
  }

  ExteriorElement value() const {
    ExteriorElement e(generators());
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (has(m)) e.at(m) = comps_[m][0];
    }
    return e;
  }

  // Max over all jet coefficients.
  double max_abs() const {
    double r = 0.0;
    for (const auto& c : comps_)
      for (double v : c) r = std::max(r, std::abs(v));
    return r;
  }

  FormField degree_part(int p) const {
    FormField out(space_);
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (mask_degree(m) == p && has(m)) out.comps_[m] = comps_[m];
    }
    return out;
  }

  // Form degrees present (nonzero components), ascending.
  std::vector<int> degrees() const {
    std::vector<int> out;
    std::array<bool, kMaxGenerators + 1> seen{};
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (!has(m)) continue;
      bool nz = false;
      for (double v : comps_[m])
        if (v != 0.0) {
          nz = true;
          break;
        }
      if (nz) seen[mask_degree(m)] = true;
    }
    for (int p = 0; p <= kMaxGenerators; ++p)
      if (seen[p]) out.push_back(p);
    return out;
  }

  FormField& operator+=(const FormField& o) {
    require_same_space(space_, o.space_);
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (!o.has(m)) continue;
      auto& dst = mutable_component(m);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += o.comps_[m][i];
    }
    return *this;
  }
  FormField& operator-=(const FormField& o) {
    require_same_space(space_, o.space_);
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (!o.has(m)) continue;
      auto& dst = mutable_component(m);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= o.comps_[m][i];
    }
    return *this;
  }
  FormField& operator*=(double s) {
    for (auto& c : comps_)
      for (double& v : c) v *= s;
    return *this;
  }
  friend FormField operator+(FormField a, const FormField& b) { return a += b; }
  friend FormField operator-(FormField a, const FormField& b) { return a -= b; }
  friend FormField operator*(FormField a, double s) { return a *= s; }
  friend FormField operator*(double s, FormField a) { return a *= s; }
  friend FormField operator-(FormField a) { return a *= -1.0; }

  // out += s * a ^ b
  static void wedge_add(const FormField& a, const FormField& b, double s, FormField& out) {
    require_same_space(a.space_, b.space_);
    const JetSpace& sp = *a.space_;
    const Mask count = static_cast<Mask>(a.comps_.size());
    for (Mask ma = 0; ma < count; ++ma) {
      if (!a.has(ma)) continue;
      for (Mask mb = 0; mb < count; ++mb) {
        if (!b.has(mb)) continue;
        const int sg = wedge_sign(ma, mb);
        if (sg == 0) continue;
        sp.mul_add(a.comps_[ma].data(), b.comps_[mb].data(), s * sg,
                   out.mutable_component(ma | mb).data());
      }
    }
  }

  friend FormField wedge(const FormField& a, const FormField& b) {
    FormField out(a.space_);
    wedge_add(a, b, 1.0, out);
    return out;
  }

  friend FormField operator*(const Jet& f, const FormField& a) {
    require_same_space(f.space(), a.space_);
    FormField out(a.space_);
    for (Mask m = 0; m < a.comps_.size(); ++m) {
      if (!a.has(m)) continue;
      a.space_->mul_add(f.coeffs().data(), a.comps_[m].data(), 1.0, out.mutable_component(m).data());
    }
    return out;
  }

  // Componentwise partial derivative d/dy_k of the coefficient jets.
  FormField partial(int k) const {
    FormField out(space_);
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (!has(m)) continue;
      auto& dst = out.mutable_component(m);
      const auto& src = comps_[m];
      for (std::size_t a = 0; a < src.size(); ++a) {
        const int t = space_->derivative_target(k, a);
        if (t >= 0) dst[t] += space_->derivative_factor(k, a) * src[a];
      }
    }
    return out;
  }

  // Insertion of the k-th coordinate vector field.
  FormField contract(int k) const {
    FormField out(space_);
    const Mask bit = Mask{1} << k;
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (!(m & bit) || !has(m)) continue;
      const double s = contraction_sign(m, k);
      auto& dst = out.mutable_component(m & ~bit);
      for (std::size_t a = 0; a < dst.size(); ++a) dst[a] += s * comps_[m][a];
    }
    return out;
  }

  FormField parity_twist() const {
    FormField out = *this;
    for (Mask m = 0; m < comps_.size(); ++m) {
      if ((mask_degree(m) & 1) && out.has(m))
        for (double& v : out.comps_[m]) v = -v;
    }
    return out;
  }

  FormField project(const JetSpacePtr& target) const {
    FormField out(target);
    for (Mask m = 0; m < comps_.size(); ++m) {
      if (has(m)) out.comps_[m] = component_jet(m).project(target).coeffs();
    }
    return out;
  }

 private:
  JetSpacePtr space_;
  std::vector<std::vector<double>> comps_;
};

}  // namespace supergeom
