#pragma once

// Quadratic-form utilities: symmetric partitioned matrices, Schur
// complements, and the two quadratic minimization kernels used by the
// backward gain recursion (pointwise over a vector, and in expectation
// over a zero-mean deviation map).

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <limits>
#include <string>
#include <utility>

#include "dlqg/errors.hpp"
#include "dlqg/types.hpp"

namespace dlqg {

/// x^T G x.
template <typename DerivedG, typename DerivedX>
typename DerivedG::Scalar quad_form(const Eigen::MatrixBase<DerivedG>& G,
                                    const Eigen::MatrixBase<DerivedX>& x) {
  if (G.rows() != G.cols() || G.cols() != x.size()) {
    throw DimensionMismatch("quad_form: G is " + std::to_string(G.rows()) + "x" +
                            std::to_string(G.cols()) + " but x has size " +
                            std::to_string(x.size()));
  }
  return (x.transpose() * G * x).value();
}

/// (M + M^T)/2.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& M) {
  return (M + M.transpose()) / typename Derived::Scalar(2);
}

/// Smallest eigenvalue of a symmetric matrix; +inf for the empty matrix.
template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  if (M.rows() == 0) return std::numeric_limits<Scalar>::infinity();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(M.derived(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Symmetric PSD square root, with negative round-off eigenvalues clamped
/// to zero. Used to draw correlated samples from a covariance.
template <typename Derived>
MatrixX<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(symmetrized(M));
  VectorX<Scalar> d = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

/// Stack column vectors on top of each other.
template <typename Scalar>
VectorX<Scalar> concat(const VectorX<Scalar>& a, const VectorX<Scalar>& b) {
  VectorX<Scalar> out(a.size() + b.size());
  out << a, b;
  return out;
}

template <typename Scalar>
VectorX<Scalar> concat(const VectorX<Scalar>& a, const VectorX<Scalar>& b,
                       const VectorX<Scalar>& c) {
  VectorX<Scalar> out(a.size() + b.size() + c.size());
  out << a, b, c;
  return out;
}

/// A symmetric positive definite matrix partitioned into a leading block of
/// size `head` and a trailing block that gets minimized over. Construction
/// checks shapes only; positive definiteness is the caller's precondition
/// and surfaces as SingularBlock if violated.
template <typename Scalar>
struct PartitionedPD {
  MatrixX<Scalar> full;
  Index head = 0;

  PartitionedPD(MatrixX<Scalar> G, Index head_size) : full(std::move(G)), head(head_size) {
    if (full.rows() != full.cols()) {
      throw DimensionMismatch("PartitionedPD: matrix is not square");
    }
    if (head < 0 || head > full.rows()) {
      throw DimensionMismatch("PartitionedPD: split index " + std::to_string(head) +
                              " outside [0, " + std::to_string(full.rows()) + "]");
    }
  }

  Index dim() const { return full.rows(); }
  Index tail() const { return full.rows() - head; }

  auto xx() const { return full.topLeftCorner(head, head); }
  auto xu() const { return full.topRightCorner(head, tail()); }
  auto ux() const { return full.bottomLeftCorner(tail(), head); }
  auto uu() const { return full.bottomRightCorner(tail(), tail()); }
};

namespace detail {
template <typename Scalar>
Eigen::LLT<MatrixX<Scalar>> tail_block_llt(const PartitionedPD<Scalar>& pg) {
  Eigen::LLT<MatrixX<Scalar>> llt(MatrixX<Scalar>(pg.uu()));
  if (llt.info() != Eigen::Success) {
    throw SingularBlock("PartitionedPD: trailing block is not positive definite");
  }
  return llt;
}
}  // namespace detail

/// -(G^UU)^{-1} G^UX: the linear map sending the leading-block argument to
/// the minimizing trailing-block argument. Solved by Cholesky, never an
/// explicit inverse.
template <typename Scalar>
MatrixX<Scalar> minimizer_gain(const PartitionedPD<Scalar>& pg) {
  if (pg.tail() == 0) return MatrixX<Scalar>::Zero(0, pg.head);
  return -detail::tail_block_llt(pg).solve(MatrixX<Scalar>(pg.ux()));
}

/// Schur complement of the trailing block: G^XX - G^XU (G^UU)^{-1} G^UX,
/// symmetrized. With an empty trailing block this is G itself.
template <typename Scalar>
MatrixX<Scalar> schur_complement(const PartitionedPD<Scalar>& pg) {
  if (pg.tail() == 0) return pg.full;
  MatrixX<Scalar> s = pg.xx() + pg.xu() * minimizer_gain(pg);
  return symmetrized(s);
}

template <typename Scalar>
struct VectorMinimum {
  VectorX<Scalar> arg;
  Scalar value;
};

/// min over u of quad_form(G, (x; u)). The minimizer is u* = gain * x and
/// the minimum equals quad_form(schur_complement(pg), x).
template <typename Scalar>
VectorMinimum<Scalar> min_vector(const PartitionedPD<Scalar>& pg, const VectorX<Scalar>& x) {
  if (x.size() != pg.head) {
    throw DimensionMismatch("min_vector: x has size " + std::to_string(x.size()) +
                            ", expected " + std::to_string(pg.head));
  }
  if (pg.tail() == 0) return {VectorX<Scalar>(0), quad_form(pg.full, x)};
  MatrixX<Scalar> gain = minimizer_gain(pg);
  MatrixX<Scalar> schur = symmetrized(pg.xx() + pg.xu() * gain);
  return {gain * x, quad_form(schur, x)};
}

template <typename Scalar>
struct FunctionalMinimum {
  MatrixX<Scalar> gain;
  Scalar value;
};

/// min over zero-mean measurable maps q of E[quad_form(G, (X - mu; q(X)))]
/// with cov(X) = cov_x. The optimum is the linear map x -> gain * (x - mu)
/// and the minimum is tr(schur_complement(pg) * cov_x).
template <typename Scalar>
FunctionalMinimum<Scalar> min_functional(const PartitionedPD<Scalar>& pg,
                                         const MatrixX<Scalar>& cov_x) {
  if (cov_x.rows() != pg.head || cov_x.cols() != pg.head) {
    throw DimensionMismatch("min_functional: cov is " + std::to_string(cov_x.rows()) + "x" +
                            std::to_string(cov_x.cols()) + ", expected " +
                            std::to_string(pg.head) + "x" + std::to_string(pg.head));
  }
  MatrixX<Scalar> gain = minimizer_gain(pg);
  MatrixX<Scalar> schur = pg.tail() == 0
                              ? pg.full
                              : MatrixX<Scalar>(symmetrized(pg.xx() + pg.xu() * gain));
  return {std::move(gain), (schur * cov_x).trace()};
}

}  // namespace dlqg
