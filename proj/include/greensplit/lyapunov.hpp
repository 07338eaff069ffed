#pragma once

// Dense Lyapunov machinery: spectral abscissa, a complex-Schur
// Bartels-Stewart solver that reuses one decomposition across real shifts,
// the rank-one Gramian and the output-weighted trace cost.

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "greensplit/errors.hpp"

namespace greensplit {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LyapunovSolution {
  DenseMatrix<Scalar> x;
  Scalar residual_norm = 0;
};

/// Relative residual tolerance that solutions are expected to meet.
inline constexpr double kLyapunovTolerance = 1e-9;

/// max Re(lambda) over the spectrum of a.
template <typename Derived>
typename Derived::Scalar spectral_abscissa(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw DimensionError("spectral abscissa of a non-square matrix");
  if (a.rows() == 0) return -std::numeric_limits<Scalar>::infinity();
  if (!a.allFinite()) throw EigenFailure("spectral abscissa: matrix has non-finite entries");
  Eigen::EigenSolver<DenseMatrix<Scalar>> es(a.eval(), false);
  if (es.info() != Eigen::Success) throw EigenFailure("eigenvalue iteration did not converge");
  return es.eigenvalues().real().maxCoeff();
}

namespace detail {

/// Solves (T - sI) Y + Y (T - sI)^H + F = 0 in place (F -> Y) for upper
/// triangular T, one column at a time from the right.
template <typename Complex, typename Real>
void solve_triangular_lyapunov(const DenseMatrix<Complex>& t, Real shift, DenseMatrix<Complex>& y) {
  const Eigen::Index n = t.rows();
  DenseVector<Complex> rhs(n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const Eigen::Index tail = n - k - 1;
    rhs = -y.col(k);
    if (tail > 0) rhs.noalias() -= y.rightCols(tail) * t.row(k).tail(tail).adjoint();
    const Complex partner = std::conj(t(k, k)) - Complex(2 * shift);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      Complex acc = rhs(i);
      const Eigen::Index len = n - i - 1;
      if (len > 0) acc -= (t.row(i).segment(i + 1, len) * y.col(k).segment(i + 1, len)).value();
      y(i, k) = acc / (t(i, i) + partner);
    }
  }
}

}  // namespace detail

/// Lyapunov solver bound to one matrix A. The complex Schur form A = U T U^H
/// is computed once; shifted equations with A - sI only shift T.
template <typename Scalar>
class ShiftedLyapunov {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = DenseMatrix<Scalar>;
  using ComplexMatrix = DenseMatrix<Complex>;

  ShiftedLyapunov() = default;

  template <typename Derived>
  explicit ShiftedLyapunov(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) throw DimensionError("Lyapunov matrix must be square");
    if (!a.allFinite()) throw SolveFailure("Lyapunov matrix has non-finite entries");
    Eigen::ComplexSchur<Matrix> schur(a.eval(), true);
    if (schur.info() != Eigen::Success) throw EigenFailure("Schur decomposition did not converge");
    t_ = schur.matrixT();
    u_ = schur.matrixU();
    t_adjoint_reversed_ = t_.adjoint().reverse();
    abscissa_ = a.rows() ? t_.diagonal().real().maxCoeff() : -std::numeric_limits<Scalar>::infinity();
  }

  Eigen::Index size() const { return t_.rows(); }
  /// Spectral abscissa read off the Schur diagonal.
  Scalar abscissa() const { return abscissa_; }
  const ComplexMatrix& schur_t() const { return t_; }
  const ComplexMatrix& schur_u() const { return u_; }

  /// X with (A - sI) X + X (A - sI)^T + D = 0.
  template <typename Derived>
  Matrix solve(const Eigen::MatrixBase<Derived>& d, Scalar shift = 0) const {
    return back_transform(solve_transformed(to_schur_basis(d), shift));
  }

  /// X with (A - sI)^T X + X (A - sI) + D = 0.
  template <typename Derived>
  Matrix solve_adjoint(const Eigen::MatrixBase<Derived>& d, Scalar shift = 0) const {
    return back_transform(solve_adjoint_transformed(to_schur_basis(d), shift));
  }

  /// Works in the Schur basis: F = U^H D U.
  template <typename Derived>
  ComplexMatrix to_schur_basis(const Eigen::MatrixBase<Derived>& d) const {
    check_shape(d);
    return u_.adjoint() * d.template cast<Complex>() * u_;
  }

  ComplexMatrix solve_transformed(ComplexMatrix f, Scalar shift) const {
    check_shift(shift);
    detail::solve_triangular_lyapunov(t_, shift, f);
    return f;
  }

  ComplexMatrix solve_adjoint_transformed(const ComplexMatrix& f, Scalar shift) const {
    check_shift(shift);
    // With R the index reversal, R T^H R is upper triangular and
    // R (T^H Y + Y T + F) R = 0 has the same form as the forward equation.
    ComplexMatrix y = f.reverse();
    detail::solve_triangular_lyapunov(t_adjoint_reversed_, shift, y);
    return y.reverse();
  }

  Matrix back_transform(const ComplexMatrix& y) const {
    Matrix x = (u_ * y * u_.adjoint()).real();
    return (x + x.transpose()) / Scalar(2);
  }

 private:
  template <typename Derived>
  void check_shape(const Eigen::MatrixBase<Derived>& d) const {
    if (d.rows() != size() || d.cols() != size()) throw DimensionError("Lyapunov right-hand side has the wrong shape");
  }
  void check_shift(Scalar shift) const {
    if (!(shift > abscissa_)) {
      throw UnstableMatrix("Lyapunov matrix is not Hurwitz (spectral abscissa " + std::to_string(double(abscissa_ - shift)) + ")");
    }
  }

  ComplexMatrix t_;
  ComplexMatrix u_;
  ComplexMatrix t_adjoint_reversed_;
  Scalar abscissa_ = 0;
};

/// Frobenius norm of L X + X L^T + D.
template <typename DerivedL, typename DerivedX, typename DerivedD>
typename DerivedL::Scalar lyapunov_residual(const Eigen::MatrixBase<DerivedL>& lambda, const Eigen::MatrixBase<DerivedX>& x,
                                            const Eigen::MatrixBase<DerivedD>& d) {
  return (lambda * x + x * lambda.transpose() + d).norm();
}

/// Unique X with Lambda X + X Lambda^T + D = 0 for Hurwitz Lambda.
/// Throws UnstableMatrix when Lambda is not Hurwitz and SolveFailure when the
/// result is not finite or misses the residual bound.
template <typename DerivedL, typename DerivedD>
LyapunovSolution<typename DerivedL::Scalar> solve_lyapunov(const Eigen::MatrixBase<DerivedL>& lambda,
                                                           const Eigen::MatrixBase<DerivedD>& d) {
  using Scalar = typename DerivedL::Scalar;
  const ShiftedLyapunov<Scalar> solver(lambda);
  LyapunovSolution<Scalar> out;
  out.x = solver.solve(d);
  if (!out.x.allFinite()) throw SolveFailure("Lyapunov solution has non-finite entries");
  out.residual_norm = lyapunov_residual(lambda, out.x, d);
  // Backward-error style bound: scale by the size of the terms being cancelled.
  const Scalar scale = Scalar(1) + d.norm() + Scalar(2) * lambda.norm() * out.x.norm();
  if (out.residual_norm > Scalar(1e-6) * scale) {
    throw SolveFailure("Lyapunov residual " + std::to_string(double(out.residual_norm)) + " too large");
  }
  return out;
}

/// Infinite-horizon Gramian int_0^inf e^{At} x0 x0^T e^{A^T t} dt.
template <typename DerivedA, typename DerivedX>
DenseMatrix<typename DerivedA::Scalar> gramian(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedX>& x0) {
  if (x0.size() != a.rows()) throw DimensionError("initial state has the wrong length");
  const auto v = x0.derived().template cast<typename DerivedA::Scalar>().eval();
  return solve_lyapunov(a, v * v.transpose()).x;
}

/// trace(C W(A, x0) C^T), the integral of |C e^{At} x0|^2. Returns +inf when
/// A is not Hurwitz.
template <typename DerivedA, typename DerivedC, typename DerivedX>
typename DerivedA::Scalar congestion_cost(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedC>& c,
                                          const Eigen::MatrixBase<DerivedX>& x0) {
  using Scalar = typename DerivedA::Scalar;
  if (c.cols() != a.rows()) throw DimensionError("output map has the wrong width");
  if (spectral_abscissa(a) >= 0) return std::numeric_limits<Scalar>::infinity();
  const DenseMatrix<Scalar> w = gramian(a, x0);
  return (c * w * c.transpose()).trace();
}

}  // namespace greensplit
