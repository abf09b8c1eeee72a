#pragma once

// Test-only oracles: independent re-derivations of quantities the library
// computes, used to cross-check it. Everything here deliberately avoids the
// library's own code paths (Cholesky block solves, the backward gain
// recursion) in favor of explicit inverses, gradient descent, and textbook
// formulas.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "dlqg/model.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Entrywise max of |a - b|, zero for empty matrices (empty-controller
// blocks show up as 0-row gains).
inline double max_abs_diff(const MatrixXd& a, const MatrixXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

inline double quad_form_loops(const MatrixXd& G, const VectorXd& x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = 0; j < G.cols(); ++j) acc += G(i, j) * x(i) * x(j);
  return acc;
}

// Block elimination with an explicit inverse of the trailing block.
inline MatrixXd schur_explicit_inverse(const MatrixXd& G, Eigen::Index head) {
  const Eigen::Index tail = G.rows() - head;
  if (tail == 0) return G;
  MatrixXd uu_inv = G.bottomRightCorner(tail, tail).inverse();
  return G.topLeftCorner(head, head) -
         G.topRightCorner(head, tail) * uu_inv * G.bottomLeftCorner(tail, head);
}

struct QuadMin {
  VectorXd arg;
  double value = 0.0;
};

// Steepest descent with exact line search on u -> quad_form(G, (x; u)).
inline QuadMin minimize_quadratic_gd(const MatrixXd& G, Eigen::Index head, const VectorXd& x) {
  const Eigen::Index m = G.rows() - head;
  const MatrixXd Guu = G.bottomRightCorner(m, m);
  const MatrixXd Gux = G.bottomLeftCorner(m, head);
  VectorXd u = VectorXd::Zero(m);
  for (int it = 0; it < 200000; ++it) {
    VectorXd g = 2.0 * (Gux * x + Guu * u);
    double gnorm = g.norm();
    if (gnorm < 1e-13 * (1.0 + x.norm())) break;
    double step = g.squaredNorm() / (2.0 * g.dot(Guu * g));
    u -= step * g;
  }
  VectorXd s(G.rows());
  s << x, u;
  return {u, quad_form_loops(G, s)};
}

struct GainMin {
  MatrixXd gain;
  double value = 0.0;
};

// Steepest descent over a gain matrix K for K -> tr([I;K]^T G [I;K] cov).
inline GainMin minimize_gain_gd(const MatrixXd& G, Eigen::Index head, const MatrixXd& cov) {
  const Eigen::Index m = G.rows() - head;
  const MatrixXd Gxx = G.topLeftCorner(head, head);
  const MatrixXd Gxu = G.topRightCorner(head, m);
  const MatrixXd Gux = G.bottomLeftCorner(m, head);
  const MatrixXd Guu = G.bottomRightCorner(m, m);
  MatrixXd K = MatrixXd::Zero(m, head);
  auto value_at = [&](const MatrixXd& k) {
    MatrixXd inner = Gxx + Gxu * k + k.transpose() * Gux + k.transpose() * Guu * k;
    return (inner * cov).trace();
  };
  for (int it = 0; it < 200000; ++it) {
    MatrixXd grad = 2.0 * (Gux + Guu * K) * cov;
    if (grad.norm() < 1e-13 * (1.0 + cov.norm())) break;
    double denom = 2.0 * (grad.transpose() * Guu * grad * cov).trace();
    if (denom <= 0.0) break;
    double step = grad.squaredNorm() / denom;
    K -= step * grad;
  }
  return {K, value_at(K)};
}

struct LqrSolution {
  std::vector<MatrixXd> S;  // T+2 cost-to-go matrices, S[T+1] = 0
  std::vector<MatrixXd> K;  // T+1 gains, u* = K[t] x
};

// Finite-horizon discrete LQR with state/input cross terms. Stage cost is
// (x;u)^T R_t (x;u) with R_t partitioned at n_x; dynamics x' = A x + B u + w.
inline LqrSolution lqr_backward(const MatrixXd& A, const MatrixXd& B,
                                const std::vector<MatrixXd>& R_full, Eigen::Index n_x) {
  const Eigen::Index m = B.cols();
  const int T = static_cast<int>(R_full.size()) - 1;
  LqrSolution out;
  out.S.assign(T + 2, MatrixXd::Zero(n_x, n_x));
  out.K.assign(T + 1, MatrixXd::Zero(m, n_x));
  for (int t = T; t >= 0; --t) {
    const MatrixXd Q = R_full[t].topLeftCorner(n_x, n_x);
    const MatrixXd N = R_full[t].topRightCorner(n_x, m);
    const MatrixXd U = R_full[t].bottomRightCorner(m, m);
    const MatrixXd& Sn = out.S[t + 1];
    MatrixXd theta = U + B.transpose() * Sn * B;
    MatrixXd psi = N + A.transpose() * Sn * B;
    out.K[t] = -(theta.ldlt().solve(psi.transpose()));
    MatrixXd S = Q + A.transpose() * Sn * A + psi * out.K[t];
    out.S[t] = 0.5 * (S + S.transpose());
  }
  return out;
}

// Hand-solvable scalar instance: A = 1, B_L = 1, B_R = 0 (one remote input
// with no authority), identity stage costs, horizon 1. Worked through the
// backward recursion by hand:
//   G_0 = [[2,1,0],[1,2,0],[0,0,1]], K_0 = (-1/2, 0), K_tilde_0 = -1/2,
//   P_0 = P_tilde_0 = 3/2, e_1 = 0, e_0 = sigma2 (independent of p).
inline dlqg::SystemModel<double> scalar_example_model(double p, double sigma2,
                                                      double x0_mean = 1.0,
                                                      double x0_var = 0.0) {
  dlqg::SystemModel<double> m;
  m.horizon = 1;
  m.A = MatrixXd::Identity(1, 1);
  m.B_L = MatrixXd::Identity(1, 1);
  m.B_R = MatrixXd::Zero(1, 1);
  m.R.assign(2, MatrixXd::Identity(3, 3));
  m.x0_mean = VectorXd::Constant(1, x0_mean);
  m.x0_cov = MatrixXd::Constant(1, 1, x0_var);
  m.noise_cov.assign(2, MatrixXd::Constant(1, 1, sigma2));
  m.p = p;
  return m;
}

// ---------------------------------------------------------------------------
// Random problem instances.

inline MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                              double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = u(rng);
  return M;
}

inline MatrixXd random_pd(std::mt19937_64& rng, Eigen::Index n, double diag_min = 0.3) {
  std::uniform_real_distribution<double> d(diag_min, 1.0);
  MatrixXd X = random_matrix(rng, n, n);
  return X.transpose() * X + d(rng) * MatrixXd::Identity(n, n);
}

inline MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_int_distribution<Eigen::Index> rank(1, n);
  MatrixXd Y = random_matrix(rng, rank(rng), n);
  return Y.transpose() * Y;
}

struct ModelOptions {
  Eigen::Index max_nx = 3;
  Eigen::Index max_nl = 2;
  Eigen::Index max_nr = 2;
  int max_horizon = 8;
  bool allow_empty_controllers = true;
  std::vector<double> p_choices = {0.0, 0.3, 0.7, 1.0};
};

inline dlqg::SystemModel<double> random_model(std::mt19937_64& rng,
                                              const ModelOptions& opt = {}) {
  std::uniform_int_distribution<Eigen::Index> nx_d(1, opt.max_nx);
  std::uniform_int_distribution<Eigen::Index> nl_d(opt.allow_empty_controllers ? 0 : 1,
                                                   opt.max_nl);
  std::uniform_int_distribution<Eigen::Index> nr_d(opt.allow_empty_controllers ? 0 : 1,
                                                   opt.max_nr);
  std::uniform_int_distribution<int> T_d(0, opt.max_horizon);
  std::uniform_int_distribution<std::size_t> p_d(0, opt.p_choices.size() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  dlqg::SystemModel<double> m;
  const Eigen::Index nx = nx_d(rng), nl = nl_d(rng), nr = nr_d(rng);
  m.horizon = T_d(rng);
  m.A = random_matrix(rng, nx, nx);
  m.B_L = random_matrix(rng, nx, nl);
  m.B_R = random_matrix(rng, nx, nr);
  for (int t = 0; t <= m.horizon; ++t) m.R.push_back(random_pd(rng, nx + nl + nr));
  m.x0_mean = random_matrix(rng, nx, 1);
  m.x0_cov = u01(rng) < 0.15 ? MatrixXd::Zero(nx, nx).eval() : random_psd(rng, nx);
  for (int t = 0; t <= m.horizon; ++t) {
    m.noise_cov.push_back(u01(rng) < 0.15 ? MatrixXd::Zero(nx, nx).eval()
                                          : random_psd(rng, nx));
  }
  m.noise_kind = u01(rng) < 0.5 ? dlqg::NoiseKind::gaussian : dlqg::NoiseKind::rademacher_scaled;
  m.p = opt.p_choices[p_d(rng)];
  return m;
}

}  // namespace oracle
