#pragma once

// Strategy objects. Every policy here is linear in (estimate, estimation
// error): the local action is F_L * x_hat + F_dev * (x - x_hat), the remote
// action F_R * x_hat. The optimal pair slices the solved gains; baselines
// cover certainty equivalence, a remote-only design, and random gain
// perturbations for dominance checks.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dlqg/errors.hpp"
#include "dlqg/model.hpp"
#include "dlqg/riccati.hpp"
#include "dlqg/types.hpp"

namespace dlqg {

template <typename Scalar>
struct LinearPolicy {
  std::vector<MatrixX<Scalar>> F_L;    // n_l x n_x, horizon+1 entries
  std::vector<MatrixX<Scalar>> F_dev;  // n_l x n_x
  std::vector<MatrixX<Scalar>> F_R;    // n_r x n_x

  Index horizon() const { return static_cast<Index>(F_L.size()) - 1; }
};

using LinearPolicyd = LinearPolicy<double>;

template <typename Scalar>
LinearPolicy<Scalar> optimal_policy(const RiccatiSolution<Scalar>& sol) {
  LinearPolicy<Scalar> policy;
  const Index T = sol.horizon();
  policy.F_L.reserve(T + 1);
  policy.F_dev.reserve(T + 1);
  policy.F_R.reserve(T + 1);
  for (Index t = 0; t <= T; ++t) {
    const auto& K = sol.K[static_cast<std::size_t>(t)];
    const Index nl = sol.K_tilde[static_cast<std::size_t>(t)].rows();
    policy.F_L.push_back(K.topRows(nl));
    policy.F_R.push_back(K.bottomRows(K.rows() - nl));
    policy.F_dev.push_back(sol.K_tilde[static_cast<std::size_t>(t)]);
  }
  return policy;
}

template <typename Scalar>
VectorX<Scalar> remote_action(const LinearPolicy<Scalar>& policy, Index t,
                              const VectorX<Scalar>& x_hat) {
  if (t < 0 || t > policy.horizon()) {
    throw IndexOutOfRange("remote_action: t = " + std::to_string(t));
  }
  const auto& F = policy.F_R[static_cast<std::size_t>(t)];
  if (F.cols() != x_hat.size()) {
    throw DimensionMismatch("remote_action: x_hat has size " + std::to_string(x_hat.size()) +
                            ", expected " + std::to_string(F.cols()));
  }
  return F * x_hat;
}

template <typename Scalar>
VectorX<Scalar> local_action(const LinearPolicy<Scalar>& policy, Index t,
                             const VectorX<Scalar>& x, const VectorX<Scalar>& x_hat) {
  if (t < 0 || t > policy.horizon()) {
    throw IndexOutOfRange("local_action: t = " + std::to_string(t));
  }
  const auto& F_L = policy.F_L[static_cast<std::size_t>(t)];
  const auto& F_dev = policy.F_dev[static_cast<std::size_t>(t)];
  if (F_L.cols() != x_hat.size() || F_dev.cols() != x.size()) {
    throw DimensionMismatch("local_action: state sizes do not match the policy");
  }
  return F_L * x_hat + F_dev * (x - x_hat);
}

/// The given policy with independent +/-epsilon perturbations added to every
/// gain entry. epsilon = 0 reproduces the input exactly.
template <typename Scalar>
LinearPolicy<Scalar> perturbed_policy(const LinearPolicy<Scalar>& base, Scalar epsilon,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto flip = [&rng, epsilon](MatrixX<Scalar> M) {
    for (Index i = 0; i < M.rows(); ++i) {
      for (Index j = 0; j < M.cols(); ++j) {
        M(i, j) += (rng() & 1u) ? epsilon : -epsilon;
      }
    }
    return M;
  };
  LinearPolicy<Scalar> out;
  for (std::size_t t = 0; t < base.F_L.size(); ++t) {
    out.F_L.push_back(flip(base.F_L[t]));
    out.F_dev.push_back(flip(base.F_dev[t]));
    out.F_R.push_back(flip(base.F_R[t]));
  }
  return out;
}

namespace detail {

// Model with the local controller deleted: no B_L columns, no L rows/cols in
// the stage costs. Principal submatrices of PD matrices stay PD.
template <typename Scalar>
SystemModel<Scalar> drop_local_controller(const SystemModel<Scalar>& m) {
  SystemModel<Scalar> reduced = m;
  reduced.B_L = MatrixX<Scalar>(m.n_x(), 0);
  reduced.R.clear();
  const Index nx = m.n_x(), nr = m.n_r();
  for (const auto& R : m.R) {
    MatrixX<Scalar> Rr(nx + nr, nx + nr);
    Rr.topLeftCorner(nx, nx) = R.topLeftCorner(nx, nx);
    Rr.topRightCorner(nx, nr) = R.topRightCorner(nx, nr);
    Rr.bottomLeftCorner(nr, nx) = R.bottomLeftCorner(nr, nx);
    Rr.bottomRightCorner(nr, nr) = R.bottomRightCorner(nr, nr);
    reduced.R.push_back(std::move(Rr));
  }
  return reduced;
}

}  // namespace detail

/// Certainty equivalence: gains from the perfect-channel (p = 0) design,
/// applied to the estimate, with the local controller acting on the true
/// state (deviation gain equal to its common gain).
template <typename Scalar>
LinearPolicy<Scalar> certainty_equivalent_policy(const ValidatedModel<Scalar>& vm) {
  SystemModel<Scalar> centralized = vm.model();
  centralized.p = Scalar(0);
  auto sol = solve_backward(validate(std::move(centralized)));
  LinearPolicy<Scalar> policy = optimal_policy(sol);
  policy.F_dev = policy.F_L;
  return policy;
}

/// Remote-only design: the local controller is switched off and the remote
/// gain comes from re-solving the model without it.
template <typename Scalar>
LinearPolicy<Scalar> no_local_policy(const ValidatedModel<Scalar>& vm) {
  auto reduced = validate(detail::drop_local_controller(vm.model()));
  auto sol = solve_backward(reduced);
  LinearPolicy<Scalar> policy;
  for (Index t = 0; t <= vm.horizon(); ++t) {
    policy.F_L.push_back(MatrixX<Scalar>::Zero(vm.n_l(), vm.n_x()));
    policy.F_dev.push_back(MatrixX<Scalar>::Zero(vm.n_l(), vm.n_x()));
    policy.F_R.push_back(sol.K[static_cast<std::size_t>(t)]);
  }
  return policy;
}

/// The comparison set used by the optimality tests and the sweep command.
template <typename Scalar>
std::map<std::string, LinearPolicy<Scalar>> baseline_policies(const ValidatedModel<Scalar>& vm,
                                                              const RiccatiSolution<Scalar>& sol,
                                                              Scalar perturb_epsilon = Scalar(0.1),
                                                              std::uint64_t perturb_seed = 0) {
  std::map<std::string, LinearPolicy<Scalar>> out;
  out.emplace("certainty-equivalent", certainty_equivalent_policy(vm));
  out.emplace("no-local", no_local_policy(vm));
  out.emplace("perturbed", perturbed_policy(optimal_policy(sol), perturb_epsilon, perturb_seed));
  return out;
}

}  // namespace dlqg
