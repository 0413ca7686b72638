#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <string>

#include "supergeom/errors.hpp"

namespace supergeom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kConditionLimit = 1e12;

inline double condition_number(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

/// Inverse via full-pivot elimination. Throws SingularBlock when the
/// condition number exceeds kConditionLimit.
inline Matrix checked_inverse(const Matrix& m, const std::string& what = "matrix") {
  if (m.rows() != m.cols()) throw DimensionMismatch(what + " is not square");
  const double cond = condition_number(m);
  if (!(cond <= kConditionLimit)) {
    throw SingularBlock(what + " is singular (condition number " + std::to_string(cond) + ")");
  }
  return m.fullPivLu().inverse();
}

// Orthonormal basis of the kernel and a minimum-norm particular solution of
// A x = b, from one SVD. Singular values below rel_tol * s_max count as zero.
struct LinearSolution {
  Vector particular;
  Matrix kernel;  // columns span ker(A)
  double residual = 0.0;  // max |A x_p - b|
  Eigen::Index rank = 0;
};

namespace detail {

struct Svd {
  Matrix u, v;
  Vector s;
};

// BDCSVD, checked by reconstruction. Eigen 3.4.0 BDCSVD returns inaccurate
// factors for some rank-deficient inputs; those fall back to JacobiSVD.
inline Svd checked_svd(const Matrix& a) {
  Svd out;
  {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    out.u = svd.matrixU();
    out.v = svd.matrixV();
    out.s = svd.singularValues();
  }
  const Eigen::Index k = out.s.size();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double err = (out.u * out.s.asDiagonal() * out.v.leftCols(k).transpose() - a).cwiseAbs().maxCoeff();
  if (err <= 1e-11 * scale) return out;
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.s = svd.singularValues();
  return out;
}

}  // namespace detail

/// One SVD of A reused for several right-hand sides.
class KernelSolver {
 public:
  explicit KernelSolver(const Matrix& a, double rel_tol = 1e-10) : a_(a) {
    const Eigen::Index cols = a.cols();
    if (a.rows() == 0) {
      kernel_ = Matrix::Identity(cols, cols);
      return;
    }
    svd_ = detail::checked_svd(a);
    const auto& s = svd_.s;
    const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s(k) > cutoff && s(k) > 0.0) ++rank_;
    }
    kernel_ = svd_.v.rightCols(cols - rank_);
  }

  Eigen::Index rank() const { return rank_; }
  Eigen::Index unknowns() const { return a_.cols(); }
  const Matrix& kernel() const { return kernel_; }

  LinearSolution solve(const Vector& b) const {
    LinearSolution out;
    out.rank = rank_;
    out.kernel = kernel_;
    out.particular = Vector::Zero(a_.cols());
    if (a_.rows() > 0 && rank_ > 0 && b.size() > 0) {
      const Vector ub = svd_.u.leftCols(rank_).transpose() * b;
      out.particular = svd_.v.leftCols(rank_) * (ub.array() / svd_.s.head(rank_).array()).matrix();
    }
    out.residual = b.size() > 0 ? (a_ * out.particular - b).cwiseAbs().maxCoeff() : 0.0;
    return out;
  }

 private:
  Matrix a_;
  detail::Svd svd_;
  Eigen::Index rank_ = 0;
  Matrix kernel_;
};

inline LinearSolution solve_with_kernel(const Matrix& a, const Vector& b, double rel_tol = 1e-10) {
  return KernelSolver(a, rel_tol).solve(b);
}

inline Matrix kernel_basis(const Matrix& a, double rel_tol = 1e-10) {
  return solve_with_kernel(a, Vector::Zero(a.rows()), rel_tol).kernel;
}

}  // namespace supergeom
