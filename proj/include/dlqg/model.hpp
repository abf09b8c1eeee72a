#pragma once

// Problem instance: linear plant driven by a local and a remote controller,
// quadratic stage costs, and a Bernoulli packet-drop channel between them.

#include <string>
#include <utility>
#include <vector>

#include "dlqg/errors.hpp"
#include "dlqg/quadform.hpp"
#include "dlqg/types.hpp"

namespace dlqg {

// Minimum eigenvalue (after symmetrization) for a cost matrix to count as
// positive definite. Loose enough to absorb round-off from file parsing.
inline constexpr double pd_tol = 1e-9;

enum class NoiseKind {
  gaussian,
  rademacher_scaled,  // independent +/-1 factors scaled to the requested covariance
};

/// Plant x' = A x + B_L u_L + B_R u_R + w over t = 0..horizon, stage cost
/// (x; u_L; u_R)^T R_t (x; u_L; u_R), initial state (x0_mean, x0_cov),
/// zero-mean noise with per-step covariance, and drop probability p.
template <typename Scalar>
struct SystemModel {
  Index horizon = 0;
  MatrixX<Scalar> A;
  MatrixX<Scalar> B_L;
  MatrixX<Scalar> B_R;
  std::vector<MatrixX<Scalar>> R;  // horizon + 1 entries
  VectorX<Scalar> x0_mean;
  MatrixX<Scalar> x0_cov;
  std::vector<MatrixX<Scalar>> noise_cov;  // horizon + 1 entries
  NoiseKind noise_kind = NoiseKind::gaussian;
  Scalar p = 0;

  Index n_x() const { return A.rows(); }
  Index n_l() const { return B_L.cols(); }
  Index n_r() const { return B_R.cols(); }
  /// Length of the stacked stage vector (x; u_L; u_R).
  Index n_s() const { return n_x() + n_l() + n_r(); }
};

using SystemModeld = SystemModel<double>;

/// A SystemModel that passed validate(): shapes consistent, R_t symmetric PD,
/// covariances symmetric PSD, p in [0,1]. Stored matrices are symmetrized.
/// Immutable; safe to share across threads.
template <typename Scalar>
class ValidatedModel {
 public:
  static ValidatedModel validate(SystemModel<Scalar> m);

  const SystemModel<Scalar>& model() const { return m_; }

  Index horizon() const { return m_.horizon; }
  const MatrixX<Scalar>& A() const { return m_.A; }
  const MatrixX<Scalar>& B_L() const { return m_.B_L; }
  const MatrixX<Scalar>& B_R() const { return m_.B_R; }
  const MatrixX<Scalar>& R(Index t) const { return m_.R[static_cast<std::size_t>(t)]; }
  const VectorX<Scalar>& x0_mean() const { return m_.x0_mean; }
  const MatrixX<Scalar>& x0_cov() const { return m_.x0_cov; }
  const MatrixX<Scalar>& noise_cov(Index t) const {
    return m_.noise_cov[static_cast<std::size_t>(t)];
  }
  NoiseKind noise_kind() const { return m_.noise_kind; }
  Scalar p() const { return m_.p; }
  Index n_x() const { return m_.n_x(); }
  Index n_l() const { return m_.n_l(); }
  Index n_r() const { return m_.n_r(); }
  Index n_s() const { return m_.n_s(); }

 private:
  explicit ValidatedModel(SystemModel<Scalar> m) : m_(std::move(m)) {}
  SystemModel<Scalar> m_;
};

using ValidatedModeld = ValidatedModel<double>;

template <typename Scalar>
ValidatedModel<Scalar> ValidatedModel<Scalar>::validate(SystemModel<Scalar> m) {
  const Index T = m.horizon;
  if (T < 0) throw DimensionMismatch("horizon must be >= 0");
  const Index nx = m.A.rows();
  if (m.A.cols() != nx) {
    throw DimensionMismatch("A must be square, got " + std::to_string(m.A.rows()) + "x" +
                            std::to_string(m.A.cols()));
  }
  if (m.B_L.rows() != nx) {
    throw DimensionMismatch("B_L has " + std::to_string(m.B_L.rows()) + " rows, expected " +
                            std::to_string(nx));
  }
  if (m.B_R.rows() != nx) {
    throw DimensionMismatch("B_R has " + std::to_string(m.B_R.rows()) + " rows, expected " +
                            std::to_string(nx));
  }
  const Index ns = m.n_s();
  if (static_cast<Index>(m.R.size()) != T + 1) {
    throw DimensionMismatch("R must have horizon+1 = " + std::to_string(T + 1) +
                            " entries, got " + std::to_string(m.R.size()));
  }
  if (static_cast<Index>(m.noise_cov.size()) != T + 1) {
    throw DimensionMismatch("noise_cov must have horizon+1 = " + std::to_string(T + 1) +
                            " entries, got " + std::to_string(m.noise_cov.size()));
  }
  if (m.x0_mean.size() != nx) {
    throw DimensionMismatch("x0_mean has size " + std::to_string(m.x0_mean.size()) +
                            ", expected " + std::to_string(nx));
  }
  if (m.x0_cov.rows() != nx || m.x0_cov.cols() != nx) {
    throw DimensionMismatch("x0_cov must be " + std::to_string(nx) + "x" + std::to_string(nx));
  }
  if (!(m.p >= Scalar(0) && m.p <= Scalar(1))) {
    throw BadProbability("p must lie in [0, 1]");
  }

  // Symmetry is enforced, not merely checked: average with the transpose
  // before the eigenvalue tests, and store the symmetrized matrices.
  for (Index t = 0; t <= T; ++t) {
    auto& Rt = m.R[static_cast<std::size_t>(t)];
    if (Rt.rows() != ns || Rt.cols() != ns) {
      throw DimensionMismatch("R[" + std::to_string(t) + "] must be " + std::to_string(ns) +
                              "x" + std::to_string(ns));
    }
    Rt = symmetrized(Rt);
    if (!(min_eigenvalue(Rt) > Scalar(pd_tol))) {
      throw NotPositiveDefinite("R[" + std::to_string(t) + "] is not positive definite");
    }
  }
  m.x0_cov = symmetrized(m.x0_cov);
  if (!(min_eigenvalue(m.x0_cov) >= Scalar(-pd_tol))) {
    throw NotPSD("x0_cov is not positive semidefinite");
  }
  for (Index t = 0; t <= T; ++t) {
    auto& W = m.noise_cov[static_cast<std::size_t>(t)];
    if (W.rows() != nx || W.cols() != nx) {
      throw DimensionMismatch("noise_cov[" + std::to_string(t) + "] must be " +
                              std::to_string(nx) + "x" + std::to_string(nx));
    }
    W = symmetrized(W);
    if (!(min_eigenvalue(W) >= Scalar(-pd_tol))) {
      throw NotPSD("noise_cov[" + std::to_string(t) + "] is not positive semidefinite");
    }
  }
  return ValidatedModel(std::move(m));
}

template <typename Scalar>
ValidatedModel<Scalar> validate(SystemModel<Scalar> m) {
  return ValidatedModel<Scalar>::validate(std::move(m));
}

}  // namespace dlqg
