#pragma once

// Backward recursion for the optimal decentralized gains and the quadratic
// value function of the packet-drop control problem.
//
// Two coupled families of cost-to-go matrices are produced: P_t governs the
// quadratic in the commonly-known state estimate, P_tilde_t governs the
// trace term in the estimation-error covariance. Both descend from the PD
// stage matrices G_t = R_t + H_t and G_tilde_t = R_t + (1-p) H_t +
// p H_tilde_t via Schur complements; the joint gain K_t acts on the
// estimate, the deviation gain K_tilde_t on the local controller's
// estimation error.

#include <string>
#include <vector>

#include "dlqg/errors.hpp"
#include "dlqg/model.hpp"
#include "dlqg/quadform.hpp"
#include "dlqg/types.hpp"

namespace dlqg {

template <typename Scalar>
struct RiccatiSolution {
  // Cost-to-go matrices, horizon+2 entries each; index horizon+1 is zero.
  std::vector<MatrixX<Scalar>> P;
  std::vector<MatrixX<Scalar>> P_tilde;
  // Stage matrices, horizon+1 entries each, all n_s x n_s.
  std::vector<MatrixX<Scalar>> G;
  std::vector<MatrixX<Scalar>> G_tilde;
  std::vector<MatrixX<Scalar>> H;
  std::vector<MatrixX<Scalar>> H_tilde;
  // K[t] maps the common estimate to the stacked (u_L_bar, u_R) pair;
  // K_tilde[t] maps the local estimation error to the deviation action.
  std::vector<MatrixX<Scalar>> K;
  std::vector<MatrixX<Scalar>> K_tilde;
  // Accumulated noise cost, horizon+2 entries; e[horizon+1] = 0.
  std::vector<Scalar> e;

  Index horizon() const { return static_cast<Index>(G.size()) - 1; }
  Index n_x() const { return P.empty() ? 0 : P.front().rows(); }
};

using RiccatiSolutiond = RiccatiSolution<double>;

template <typename Scalar>
RiccatiSolution<Scalar> solve_backward(const ValidatedModel<Scalar>& vm) {
  const Index T = vm.horizon();
  const Index nx = vm.n_x(), nl = vm.n_l(), ns = vm.n_s();
  const Scalar p = vm.p();

  MatrixX<Scalar> stacked(nx, ns);  // [A, B_L, B_R]
  stacked << vm.A(), vm.B_L(), vm.B_R();

  RiccatiSolution<Scalar> sol;
  sol.P.assign(T + 2, MatrixX<Scalar>::Zero(nx, nx));
  sol.P_tilde.assign(T + 2, MatrixX<Scalar>::Zero(nx, nx));
  sol.G.resize(T + 1);
  sol.G_tilde.resize(T + 1);
  sol.H.resize(T + 1);
  sol.H_tilde.resize(T + 1);
  sol.K.resize(T + 1);
  sol.K_tilde.resize(T + 1);
  sol.e.assign(T + 2, Scalar(0));

  auto require_pd = [](const MatrixX<Scalar>& M, const std::string& name, Index t) {
    Eigen::LLT<MatrixX<Scalar>> llt(M);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite(name + "[" + std::to_string(t) +
                                "] lost positive definiteness in the backward recursion");
    }
  };

  for (Index t = T; t >= 0; --t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    sol.H[ti] = symmetrized(stacked.transpose() * sol.P[ti + 1] * stacked);
    sol.H_tilde[ti] = symmetrized(stacked.transpose() * sol.P_tilde[ti + 1] * stacked);
    sol.G[ti] = symmetrized(vm.R(t) + sol.H[ti]);
    sol.G_tilde[ti] =
        symmetrized(vm.R(t) + (Scalar(1) - p) * sol.H[ti] + p * sol.H_tilde[ti]);
    require_pd(sol.G[ti], "G", t);
    require_pd(sol.G_tilde[ti], "G_tilde", t);

    // Joint minimization over both controllers' common actions: Schur
    // complement of the stacked (L,R) block, one PD solve.
    PartitionedPD<Scalar> pg(sol.G[ti], nx);
    sol.P[ti] = schur_complement(pg);
    sol.K[ti] = minimizer_gain(pg);

    // Deviation minimization sees only the local block of G_tilde.
    PartitionedPD<Scalar> pg_dev(sol.G_tilde[ti].topLeftCorner(nx + nl, nx + nl), nx);
    sol.P_tilde[ti] = schur_complement(pg_dev);
    sol.K_tilde[ti] = minimizer_gain(pg_dev);

    sol.e[ti] = sol.e[ti + 1] +
                (((Scalar(1) - p) * sol.P[ti + 1] + p * sol.P_tilde[ti + 1]) * vm.noise_cov(t))
                    .trace();
  }
  return sol;
}

/// Quadratic value of a belief (mean, cov) at time t: it costs
/// quad_form(P_t, mean) + tr(P_tilde_t cov) + e_t, and 0 at t = horizon+1.
template <typename Scalar>
Scalar value_function(const RiccatiSolution<Scalar>& sol, Index t, const VectorX<Scalar>& mean,
                      const MatrixX<Scalar>& cov) {
  if (t < 0 || t > sol.horizon() + 1) {
    throw IndexOutOfRange("value_function: t = " + std::to_string(t) + " outside [0, " +
                          std::to_string(sol.horizon() + 1) + "]");
  }
  if (mean.size() != sol.n_x() || cov.rows() != sol.n_x() || cov.cols() != sol.n_x()) {
    throw DimensionMismatch("value_function: belief dimensions do not match the solution");
  }
  const std::size_t ti = static_cast<std::size_t>(t);
  return quad_form(sol.P[ti], mean) + (sol.P_tilde[ti] * cov).trace() + sol.e[ti];
}

/// Expected optimal cost before the first channel use: the time-0 value
/// averaged over the received/dropped outcomes of the initial transmission.
template <typename Scalar>
Scalar optimal_expected_cost(const RiccatiSolution<Scalar>& sol,
                             const ValidatedModel<Scalar>& vm) {
  if (vm.n_x() != sol.n_x()) {
    throw DimensionMismatch("optimal_expected_cost: model and solution disagree on n_x");
  }
  const Scalar p = vm.p();
  return quad_form(sol.P[0], vm.x0_mean()) +
         (((Scalar(1) - p) * sol.P[0] + p * sol.P_tilde[0]) * vm.x0_cov()).trace() + sol.e[0];
}

}  // namespace dlqg
