#pragma once

#include <string>

#include "supergeom/errors.hpp"
#include "supergeom/linalg.hpp"

namespace supergeom {

enum class Parity { even = 0, odd = 1 };

inline Parity operator+(Parity a, Parity b) {
  return static_cast<Parity>((static_cast<int>(a) + static_cast<int>(b)) & 1);
}
inline int sign_of(Parity p) { return p == Parity::even ? 1 : -1; }

/// 2x2-block matrix [[A, B], [C, D]] with n x n real blocks and a declared
/// parity. The parity selects the sign rules of transpose and trace.
class SuperMatrix {
 public:
  SuperMatrix() = default;
  SuperMatrix(Matrix a, Matrix b, Matrix c, Matrix d, Parity parity = Parity::even)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), parity_(parity) {
    const auto n = a_.rows();
    auto ok = [n](const Matrix& m) { return m.rows() == n && m.cols() == n; };
    if (!(ok(a_) && ok(b_) && ok(c_) && ok(d_))) {
      throw DimensionMismatch("supermatrix blocks must all be square of the same size");
    }
  }

  static SuperMatrix identity(int n) {
    return {Matrix::Identity(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Identity(n, n)};
  }

  static SuperMatrix from_full(const Matrix& m, Parity parity = Parity::even) {
    if (m.rows() != m.cols() || m.rows() % 2) throw DimensionMismatch("full matrix must be 2n x 2n");
    const auto n = m.rows() / 2;
    return {m.topLeftCorner(n, n), m.topRightCorner(n, n), m.bottomLeftCorner(n, n),
            m.bottomRightCorner(n, n), parity};
  }

  int block_size() const { return static_cast<int>(a_.rows()); }
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }
  const Matrix& d() const { return d_; }
  Parity parity() const { return parity_; }

  Matrix full() const {
    const auto n = a_.rows();
    Matrix m(2 * n, 2 * n);
    m << a_, b_, c_, d_;
    return m;
  }

  double max_abs() const {
    if (a_.size() == 0) return 0.0;
    return std::max({a_.cwiseAbs().maxCoeff(), b_.cwiseAbs().maxCoeff(), c_.cwiseAbs().maxCoeff(),
                     d_.cwiseAbs().maxCoeff()});
  }

  friend SuperMatrix operator*(const SuperMatrix& x, const SuperMatrix& y) {
    if (x.block_size() != y.block_size()) throw DimensionMismatch("supermatrix block sizes differ");
    return {x.a_ * y.a_ + x.b_ * y.c_, x.a_ * y.b_ + x.b_ * y.d_, x.c_ * y.a_ + x.d_ * y.c_,
            x.c_ * y.b_ + x.d_ * y.d_, x.parity_ + y.parity_};
  }

  friend SuperMatrix operator-(const SuperMatrix& x, const SuperMatrix& y) {
    if (x.block_size() != y.block_size()) throw DimensionMismatch("supermatrix block sizes differ");
    return {x.a_ - y.a_, x.b_ - y.b_, x.c_ - y.c_, x.d_ - y.d_, x.parity_};
  }

 private:
  Matrix a_, b_, c_, d_;
  Parity parity_ = Parity::even;
};

// [[A,B],[C,D]]^t = [[A^t, -(-1)^p C^t], [(-1)^p B^t, D^t]].
// For p = 0 this is [[A^t, -C^t], [B^t, D^t]].
inline SuperMatrix supertranspose(const SuperMatrix& m) {
  const double s = sign_of(m.parity());
  return {m.a().transpose(), -s * m.c().transpose(), s * m.b().transpose(), m.d().transpose(),
          m.parity()};
}

// Two-sided inverse under block multiplication; the result keeps the parity.
inline SuperMatrix superinverse(const SuperMatrix& m) {
  const auto n = m.block_size();
  const bool off_diagonal = m.a().isZero(0.0) && m.d().isZero(0.0);
  const bool diagonal = m.b().isZero(0.0) && m.c().isZero(0.0);
  if (off_diagonal) {
    // [[0,B],[C,0]]^{-1} = [[0, C^{-1}], [B^{-1}, 0]]
    const Matrix ci = checked_inverse(m.c(), "block C");
    const Matrix bi = checked_inverse(m.b(), "block B");
    return {Matrix::Zero(n, n), ci, bi, Matrix::Zero(n, n), m.parity()};
  }
  if (diagonal) {
    return {checked_inverse(m.a(), "block A"), Matrix::Zero(n, n), Matrix::Zero(n, n),
            checked_inverse(m.d(), "block D"), m.parity()};
  }
  return SuperMatrix::from_full(checked_inverse(m.full(), "supermatrix"), m.parity());
}

// STr = Tr(A) - (-1)^p Tr(D): Tr(A) - Tr(D) for even, Tr(A) + Tr(D) for odd.
inline double supertrace(const SuperMatrix& m) {
  return m.a().trace() - sign_of(m.parity()) * m.d().trace();
}

}  // namespace supergeom
