#pragma once

// Common-information state estimate shared by both controllers, carried as
// the first two moments of the common belief. A received packet collapses
// the belief to a point mass; on a drop the mean advances through the plant
// under the commonly-known action components, and the covariance through the
// deviation-closed loop plus process noise.

#include <string>
#include <utility>

#include "dlqg/channel.hpp"
#include "dlqg/errors.hpp"
#include "dlqg/model.hpp"
#include "dlqg/quadform.hpp"
#include "dlqg/riccati.hpp"
#include "dlqg/types.hpp"

namespace dlqg {

template <typename Scalar>
struct BeliefState {
  VectorX<Scalar> mean;
  MatrixX<Scalar> cov;  // exactly zero at any time the last channel use succeeded
  Index t = 0;
};

using BeliefStated = BeliefState<double>;

template <typename Scalar>
BeliefState<Scalar> init_belief(const ValidatedModel<Scalar>& vm,
                                const ChannelOutput<Scalar>& z0) {
  if (z0.is_received()) {
    if (z0.value().size() != vm.n_x()) {
      throw DimensionMismatch("init_belief: received state has size " +
                              std::to_string(z0.value().size()) + ", expected " +
                              std::to_string(vm.n_x()));
    }
    return {z0.value(), MatrixX<Scalar>::Zero(vm.n_x(), vm.n_x()), 0};
  }
  return {vm.x0_mean(), vm.x0_cov(), 0};
}

/// Belief update with an explicit deviation gain: baseline policies supply
/// their own gain on (x - mean) here; the covariance recursion is exact only
/// for deviation strategies linear in that error.
template <typename Scalar>
BeliefState<Scalar> step_belief(const BeliefState<Scalar>& belief,
                                const ValidatedModel<Scalar>& vm,
                                const MatrixX<Scalar>& deviation_gain,
                                const VectorX<Scalar>& u_bar_L, const VectorX<Scalar>& u_R,
                                const ChannelOutput<Scalar>& z_next) {
  const Index nx = vm.n_x();
  if (belief.t < 0 || belief.t > vm.horizon() - 1) {
    throw IndexOutOfRange("step_belief: no transition from t = " + std::to_string(belief.t));
  }
  if (belief.mean.size() != nx || u_bar_L.size() != vm.n_l() || u_R.size() != vm.n_r() ||
      deviation_gain.rows() != vm.n_l() || deviation_gain.cols() != nx) {
    throw DimensionMismatch("step_belief: argument dimensions do not match the model");
  }
  if (z_next.is_received()) {
    if (z_next.value().size() != nx) {
      throw DimensionMismatch("step_belief: received state has wrong size");
    }
    return {z_next.value(), MatrixX<Scalar>::Zero(nx, nx), belief.t + 1};
  }
  VectorX<Scalar> mean = vm.A() * belief.mean + vm.B_L() * u_bar_L + vm.B_R() * u_R;
  MatrixX<Scalar> closed = vm.A() + vm.B_L() * deviation_gain;
  MatrixX<Scalar> cov =
      symmetrized(closed * belief.cov * closed.transpose()) + vm.noise_cov(belief.t);
  return {std::move(mean), std::move(cov), belief.t + 1};
}

/// Belief update under the optimal deviation strategy stored in the solution.
template <typename Scalar>
BeliefState<Scalar> step_belief(const BeliefState<Scalar>& belief,
                                const RiccatiSolution<Scalar>& sol,
                                const ValidatedModel<Scalar>& vm,
                                const VectorX<Scalar>& u_bar_L, const VectorX<Scalar>& u_R,
                                const ChannelOutput<Scalar>& z_next) {
  if (belief.t < 0 || belief.t > sol.horizon()) {
    throw IndexOutOfRange("step_belief: t = " + std::to_string(belief.t) +
                          " has no stored deviation gain");
  }
  return step_belief(belief, vm, sol.K_tilde[static_cast<std::size_t>(belief.t)], u_bar_L, u_R,
                     z_next);
}

template <typename Scalar>
Scalar value_function(const RiccatiSolution<Scalar>& sol, Index t,
                      const BeliefState<Scalar>& belief) {
  return value_function(sol, t, belief.mean, belief.cov);
}

}  // namespace dlqg
