#pragma once

// Closed-loop simulation and policy evaluation.
//
// run_episode draws one trajectory of the plant/channel/controller loop.
// monte_carlo_cost averages independent episodes (optionally across
// threads; episode index, not thread identity, selects the substreams, so
// results are identical for any thread count). evaluate_linear_policy is
// the exact counterpart: it propagates the joint first and second moments
// of (state, estimate) through the two affine channel branches and sums the
// expected stage costs in closed form, giving an oracle-grade expected cost
// for any linear policy.

#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "dlqg/channel.hpp"
#include "dlqg/control.hpp"
#include "dlqg/errors.hpp"
#include "dlqg/estimator.hpp"
#include "dlqg/model.hpp"
#include "dlqg/quadform.hpp"
#include "dlqg/riccati.hpp"
#include "dlqg/types.hpp"

namespace dlqg {

template <typename Scalar>
struct EpisodeTrace {
  std::vector<VectorX<Scalar>> x;
  std::vector<VectorX<Scalar>> x_hat;
  std::vector<int> gamma;
  std::vector<VectorX<Scalar>> u_L;
  std::vector<VectorX<Scalar>> u_R;
  std::vector<Scalar> stage_cost;
  Scalar total_cost = 0;
};

using EpisodeTraced = EpisodeTrace<double>;

/// Covariance square-root factors, computed once and shared across episodes.
template <typename Scalar>
struct SamplingCache {
  MatrixX<Scalar> sqrt_x0_cov;
  std::vector<MatrixX<Scalar>> sqrt_noise_cov;

  explicit SamplingCache(const ValidatedModel<Scalar>& vm)
      : sqrt_x0_cov(psd_sqrt(vm.x0_cov())) {
    sqrt_noise_cov.reserve(vm.horizon() + 1);
    for (Index t = 0; t <= vm.horizon(); ++t) sqrt_noise_cov.push_back(psd_sqrt(vm.noise_cov(t)));
  }
};

namespace detail {

template <typename Scalar>
void check_policy_shape(const ValidatedModel<Scalar>& vm, const LinearPolicy<Scalar>& policy) {
  if (policy.horizon() != vm.horizon()) {
    throw DimensionMismatch("policy has " + std::to_string(policy.horizon() + 1) +
                            " stages, model needs " + std::to_string(vm.horizon() + 1));
  }
  for (std::size_t t = 0; t < policy.F_L.size(); ++t) {
    if (policy.F_L[t].rows() != vm.n_l() || policy.F_L[t].cols() != vm.n_x() ||
        policy.F_dev[t].rows() != vm.n_l() || policy.F_dev[t].cols() != vm.n_x() ||
        policy.F_R[t].rows() != vm.n_r() || policy.F_R[t].cols() != vm.n_x()) {
      throw DimensionMismatch("policy gain shapes do not match the model at t = " +
                              std::to_string(t));
    }
  }
}

template <typename Scalar>
void check_solution_shape(const ValidatedModel<Scalar>& vm, const RiccatiSolution<Scalar>& sol) {
  if (sol.horizon() != vm.horizon() || sol.n_x() != vm.n_x()) {
    throw DimensionMismatch("solution does not match the model");
  }
}

// gamma_pattern == nullptr draws link bits from the episode's channel
// substream; otherwise the given bits are replayed.
template <typename Scalar>
EpisodeTrace<Scalar> run_episode_impl(const ValidatedModel<Scalar>& vm,
                                      const LinearPolicy<Scalar>& policy,
                                      const SamplingCache<Scalar>& cache,
                                      const std::vector<int>* gamma_pattern,
                                      std::uint64_t master_seed, std::uint64_t episode) {
  const Index T = vm.horizon();
  EpisodeStreams streams = make_episode_streams(master_seed, episode);

  EpisodeTrace<Scalar> trace;
  trace.x.reserve(T + 1);
  trace.x_hat.reserve(T + 1);
  trace.gamma.reserve(T + 1);
  trace.u_L.reserve(T + 1);
  trace.u_R.reserve(T + 1);
  trace.stage_cost.reserve(T + 1);

  VectorX<Scalar> x =
      vm.x0_mean() + sample_zero_mean(streams.init, cache.sqrt_x0_cov, vm.noise_kind());
  BeliefState<Scalar> belief;
  VectorX<Scalar> u_bar_L_prev, u_R_prev;

  for (Index t = 0; t <= T; ++t) {
    const int gamma = gamma_pattern ? (*gamma_pattern)[static_cast<std::size_t>(t)]
                                    : sample_gamma(streams.gamma, static_cast<double>(vm.p()));
    ChannelOutput<Scalar> z = transmit(x, gamma);
    belief = (t == 0)
                 ? init_belief(vm, z)
                 : step_belief(belief, vm, policy.F_dev[static_cast<std::size_t>(t - 1)],
                               u_bar_L_prev, u_R_prev, z);

    VectorX<Scalar> u_R = remote_action(policy, t, belief.mean);
    VectorX<Scalar> u_L = local_action(policy, t, x, belief.mean);
    Scalar cost = quad_form(vm.R(t), concat(x, u_L, u_R));

    trace.x.push_back(x);
    trace.x_hat.push_back(belief.mean);
    trace.gamma.push_back(gamma);
    trace.u_L.push_back(u_L);
    trace.u_R.push_back(u_R);
    trace.stage_cost.push_back(cost);
    trace.total_cost += cost;

    if (t < T) {
      u_bar_L_prev = policy.F_L[static_cast<std::size_t>(t)] * belief.mean;
      u_R_prev = u_R;
      VectorX<Scalar> w =
          sample_zero_mean(streams.noise, cache.sqrt_noise_cov[static_cast<std::size_t>(t)],
                           vm.noise_kind());
      x = vm.A() * x + vm.B_L() * u_L + vm.B_R() * u_R + w;
    }
  }
  return trace;
}

}  // namespace detail

/// One closed-loop episode, deterministic in (master_seed, episode).
template <typename Scalar>
EpisodeTrace<Scalar> run_episode(const ValidatedModel<Scalar>& vm,
                                 const LinearPolicy<Scalar>& policy,
                                 const RiccatiSolution<Scalar>& sol, std::uint64_t master_seed,
                                 std::uint64_t episode = 0) {
  detail::check_policy_shape(vm, policy);
  detail::check_solution_shape(vm, sol);
  SamplingCache<Scalar> cache(vm);
  return detail::run_episode_impl(vm, policy, cache, nullptr, master_seed, episode);
}

/// Episode with the link bits replayed from a fixed pattern instead of the
/// channel substream; noise and initial-state draws still vary with the
/// episode index.
template <typename Scalar>
EpisodeTrace<Scalar> run_episode(const ValidatedModel<Scalar>& vm,
                                 const LinearPolicy<Scalar>& policy,
                                 const RiccatiSolution<Scalar>& sol,
                                 const std::vector<int>& gamma_pattern,
                                 std::uint64_t master_seed, std::uint64_t episode = 0) {
  detail::check_policy_shape(vm, policy);
  detail::check_solution_shape(vm, sol);
  if (static_cast<Index>(gamma_pattern.size()) != vm.horizon() + 1) {
    throw DimensionMismatch("gamma pattern must have horizon+1 entries");
  }
  SamplingCache<Scalar> cache(vm);
  return detail::run_episode_impl(vm, policy, cache, &gamma_pattern, master_seed, episode);
}

template <typename Scalar>
struct MonteCarloEstimate {
  Scalar mean = 0;
  Scalar std_err = 0;
};

/// Sample mean and standard error of the episode cost over independent
/// episodes. `threads` = 0 picks the hardware count; any value yields
/// bit-identical results.
template <typename Scalar>
MonteCarloEstimate<Scalar> monte_carlo_cost(const ValidatedModel<Scalar>& vm,
                                            const LinearPolicy<Scalar>& policy,
                                            const RiccatiSolution<Scalar>& sol,
                                            std::int64_t episodes, std::uint64_t master_seed,
                                            unsigned threads = 0) {
  if (episodes < 2) throw Error("monte_carlo_cost: need at least 2 episodes");
  detail::check_policy_shape(vm, policy);
  detail::check_solution_shape(vm, sol);
  const SamplingCache<Scalar> cache(vm);

  std::vector<Scalar> costs(static_cast<std::size_t>(episodes));
  auto worker = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      costs[static_cast<std::size_t>(i)] =
          detail::run_episode_impl(vm, policy, cache, nullptr, master_seed,
                                   static_cast<std::uint64_t>(i))
              .total_cost;
    }
  };

  unsigned n_threads = threads != 0 ? threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, 64));
  if (n_threads == 1 || episodes < 256) {
    worker(0, episodes);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (episodes + n_threads - 1) / n_threads;
    for (unsigned k = 0; k < n_threads; ++k) {
      const std::int64_t begin = k * chunk;
      const std::int64_t end = std::min<std::int64_t>(episodes, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // Compensated sums: a degenerate model makes every episode cost equal,
  // and naive accumulation would report that round-off as spread.
  auto kahan_sum = [](const std::vector<Scalar>& xs, auto&& f) {
    Scalar sum = 0, comp = 0;
    for (const Scalar x : xs) {
      Scalar y = f(x) - comp;
      Scalar t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return sum;
  };
  const Scalar mean = kahan_sum(costs, [](Scalar c) { return c; }) / Scalar(episodes);
  const Scalar ss = kahan_sum(costs, [mean](Scalar c) { return (c - mean) * (c - mean); });
  Scalar std_err = std::sqrt(ss / Scalar(episodes - 1) / Scalar(episodes));
  return {mean, std_err};
}

/// Exact expected cost of a linear policy under the model's distributions.
/// Maintains the mean and second moment of the stacked (state, estimate)
/// pair; each step mixes the received branch (estimate jumps to the next
/// state) and the dropped branch (estimate advances through the
/// commonly-known loop) with weights (1-p, p).
template <typename Scalar>
Scalar evaluate_linear_policy(const ValidatedModel<Scalar>& vm, const LinearPolicy<Scalar>& policy,
                              const RiccatiSolution<Scalar>& sol) {
  detail::check_policy_shape(vm, policy);
  detail::check_solution_shape(vm, sol);
  const Index nx = vm.n_x(), nl = vm.n_l(), nr = vm.n_r(), ns = vm.n_s();
  const Index T = vm.horizon();
  const Scalar p = vm.p();
  const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(nx, nx);

  // Second moment of (x; x_hat) at t = 0, mixing the two outcomes of the
  // initial transmission.
  const MatrixX<Scalar> S0 = vm.x0_cov() + vm.x0_mean() * vm.x0_mean().transpose();
  const MatrixX<Scalar> mu2 = vm.x0_mean() * vm.x0_mean().transpose();
  const MatrixX<Scalar> mix0 = (Scalar(1) - p) * S0 + p * mu2;
  MatrixX<Scalar> M(2 * nx, 2 * nx);
  M << S0, mix0, mix0, mix0;
  VectorX<Scalar> mean(2 * nx);
  mean << vm.x0_mean(), vm.x0_mean();

  Scalar total = 0;
  for (Index t = 0; t <= T; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    const auto& F_L = policy.F_L[ti];
    const auto& F_dev = policy.F_dev[ti];
    const auto& F_R = policy.F_R[ti];

    // Stacked stage vector (x; u_L; u_R) as a linear image of (x; x_hat).
    MatrixX<Scalar> C = MatrixX<Scalar>::Zero(ns, 2 * nx);
    C.topLeftCorner(nx, nx) = I;
    C.block(nx, 0, nl, nx) = F_dev;
    C.block(nx, nx, nl, nx) = F_L - F_dev;
    C.block(nx + nl, nx, nr, nx) = F_R;
    total += (vm.R(t) * (C * M * C.transpose())).trace();

    if (t == T) break;

    const MatrixX<Scalar> Dx = vm.A() + vm.B_L() * F_dev;
    const MatrixX<Scalar> Dh = vm.B_L() * (F_L - F_dev) + vm.B_R() * F_R;
    const MatrixX<Scalar> E = vm.A() + vm.B_L() * F_L + vm.B_R() * F_R;

    MatrixX<Scalar> phi_r(2 * nx, 2 * nx), phi_d(2 * nx, 2 * nx);
    phi_r << Dx, Dh, Dx, Dh;
    phi_d << Dx, Dh, MatrixX<Scalar>::Zero(nx, nx), E;

    const MatrixX<Scalar>& W = vm.noise_cov(t);
    MatrixX<Scalar> noise_r(2 * nx, 2 * nx), noise_d(2 * nx, 2 * nx);
    noise_r << W, W, W, W;
    noise_d << W, MatrixX<Scalar>::Zero(nx, nx), MatrixX<Scalar>::Zero(nx, nx),
        MatrixX<Scalar>::Zero(nx, nx);

    M = ((Scalar(1) - p) * (phi_r * M * phi_r.transpose() + noise_r) +
         p * (phi_d * M * phi_d.transpose() + noise_d))
            .eval();
    M = symmetrized(M);
    mean = ((Scalar(1) - p) * phi_r + p * phi_d) * mean;
  }
  return total;
}

}  // namespace dlqg
