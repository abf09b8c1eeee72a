#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "dlqg/io.hpp"
#include "dlqg/model.hpp"
#include "dlqg/sim.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

dlqg::SystemModel<double> scalar_raw() {
  dlqg::SystemModel<double> m;
  m.horizon = 1;
  m.A = MatrixXd::Identity(1, 1);
  m.B_L = MatrixXd::Identity(1, 1);
  m.B_R = MatrixXd::Identity(1, 1);
  m.R.assign(2, MatrixXd::Identity(3, 3));
  m.x0_mean = VectorXd::Zero(1);
  m.x0_cov = MatrixXd::Zero(1, 1);
  m.noise_cov.assign(2, MatrixXd::Identity(1, 1));
  m.p = 0.5;
  return m;
}

const char* kScalarConfig = R"json({
  "horizon": 1,
  "A": [[1.0]],
  "B_L": [[1.0]],
  "B_R": [[0.0]],
  "R": [[1,0,0],[0,1,0],[0,0,1]],
  "x0_mean": [1.0],
  "x0_cov": [[0.0]],
  "noise_cov": [[1.0]],
  "noise_kind": "gaussian",
  "p": 0.5
})json";

}  // namespace

TEST_CASE("validate accepts the scalar instance and enforces each invariant") {
  CHECK_NOTHROW(dlqg::validate(scalar_raw()));

  SUBCASE("zero cost matrix is rejected") {
    auto m = scalar_raw();
    m.R[0].setZero();
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::NotPositiveDefinite);
  }
  SUBCASE("inconsistent input shape is rejected") {
    auto m = scalar_raw();
    m.B_L = MatrixXd::Ones(2, 1);
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::DimensionMismatch);
  }
  SUBCASE("wrong cost dimension is rejected") {
    auto m = scalar_raw();
    m.R.assign(2, MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::DimensionMismatch);
  }
  SUBCASE("wrong sequence length is rejected") {
    auto m = scalar_raw();
    m.noise_cov.resize(1);
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::DimensionMismatch);
  }
  SUBCASE("probabilities outside the unit interval are rejected") {
    auto m = scalar_raw();
    m.p = 1.5;
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::BadProbability);
    m.p = -0.1;
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::BadProbability);
  }
  SUBCASE("indefinite covariance is rejected") {
    auto m = scalar_raw();
    m.x0_cov = MatrixXd::Constant(1, 1, -0.5);
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::NotPSD);
    m = scalar_raw();
    m.noise_cov[1] = MatrixXd::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(dlqg::validate(m), dlqg::NotPSD);
  }
}

TEST_CASE("validate symmetrizes and is idempotent") {
  auto m = scalar_raw();
  m.horizon = 0;
  m.R.resize(1);
  m.noise_cov.resize(1);
  m.R[0] << 1.0, 0.2, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;  // asymmetric input
  auto once = dlqg::validate(m);
  CHECK(once.R(0)(0, 1) == doctest::Approx(0.1));
  CHECK(once.R(0)(1, 0) == doctest::Approx(0.1));
  auto twice = dlqg::validate(once.model());
  CHECK(twice.R(0) == once.R(0));
  CHECK(twice.x0_cov() == once.x0_cov());
}

TEST_CASE("validated models never trip dimension checks downstream") {
  std::mt19937_64 rng(2718);
  for (int rep = 0; rep < 15; ++rep) {
    auto vm = dlqg::validate(oracle::random_model(rng));
    auto sol = dlqg::solve_backward(vm);
    auto policy = dlqg::optimal_policy(sol);
    CHECK_NOTHROW(dlqg::run_episode(vm, policy, sol, rep));
    CHECK_NOTHROW(dlqg::evaluate_linear_policy(vm, policy, sol));
    CHECK_NOTHROW(dlqg::optimal_expected_cost(sol, vm));
    for (auto& [name, b] : dlqg::baseline_policies(vm, sol)) {
      CAPTURE(name);
      CHECK_NOTHROW(dlqg::evaluate_linear_policy(vm, b, sol));
    }
  }
}

TEST_CASE("load_model parses the scalar config") {
  auto m = dlqg::load_model(kScalarConfig);
  CHECK(m.horizon == 1);
  CHECK(m.A(0, 0) == 1.0);
  CHECK(m.R.size() == 2);  // single matrix broadcast across stages
  CHECK(m.R[0] == m.R[1]);
  CHECK(m.noise_cov.size() == 2);
  CHECK(m.noise_kind == dlqg::NoiseKind::gaussian);
  CHECK(m.p == 0.5);
  CHECK_NOTHROW(dlqg::validate(m));
}

TEST_CASE("load_model broadcast vs explicit sequences") {
  std::string text = kScalarConfig;
  // Replace the single R with a two-entry sequence with distinct values.
  auto pos = text.find("\"R\": [[1,0,0],[0,1,0],[0,0,1]]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("\"R\": [[1,0,0],[0,1,0],[0,0,1]]").size(),
               "\"R\": [[[1,0,0],[0,1,0],[0,0,1]], [[2,0,0],[0,2,0],[0,0,2]]]");
  auto m = dlqg::load_model(text);
  CHECK(m.R.size() == 2);
  CHECK(m.R[1](0, 0) == 2.0);

  // Wrong sequence length names the field.
  auto bad = text;
  bad.replace(bad.find("\"horizon\": 1"), std::string("\"horizon\": 1").size(),
              "\"horizon\": 3");
  CHECK_THROWS_WITH_AS(dlqg::load_model(bad), doctest::Contains("R"), dlqg::SchemaError);
}

TEST_CASE("load_model at p = 0 yields centralized LQR gains downstream") {
  std::string text = kScalarConfig;
  auto pos = text.find("\"p\": 0.5");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"p\": 0.0");
  auto m = dlqg::load_model(text);
  auto vm = dlqg::validate(m);
  auto sol = dlqg::solve_backward(vm);

  MatrixXd B(1, 2);
  B << m.B_L, m.B_R;
  auto lqr = oracle::lqr_backward(m.A, B, m.R, 1);
  for (dlqg::Index t = 0; t <= m.horizon; ++t) {
    CHECK(oracle::max_abs_diff(sol.K[t], lqr.K[t]) < 1e-12);
  }
}

TEST_CASE("load_model schema errors carry the field path") {
  SUBCASE("missing field") {
    std::string text = kScalarConfig;
    auto pos = text.find("\"A\": [[1.0]],");
    text.erase(pos, std::string("\"A\": [[1.0]],").size());
    CHECK_THROWS_WITH_AS(dlqg::load_model(text), doctest::Contains("A"), dlqg::SchemaError);
  }
  SUBCASE("unknown field") {
    std::string text = kScalarConfig;
    text.insert(text.find("\"A\""), "\"extra\": 1, ");
    CHECK_THROWS_WITH_AS(dlqg::load_model(text), doctest::Contains("extra"),
                         dlqg::SchemaError);
  }
  SUBCASE("ragged matrix") {
    std::string text = kScalarConfig;
    auto pos = text.find("[[1,0,0],[0,1,0],[0,0,1]]");
    text.replace(pos, std::string("[[1,0,0],[0,1,0],[0,0,1]]").size(),
                 "[[1,0,0],[0,1],[0,0,1]]");
    CHECK_THROWS_WITH_AS(dlqg::load_model(text), doctest::Contains("R["),
                         dlqg::SchemaError);
  }
  SUBCASE("bad noise kind") {
    std::string text = kScalarConfig;
    auto pos = text.find("\"gaussian\"");
    text.replace(pos, std::string("\"gaussian\"").size(), "\"uniform\"");
    CHECK_THROWS_WITH_AS(dlqg::load_model(text), doctest::Contains("noise_kind"),
                         dlqg::SchemaError);
  }
  SUBCASE("negative horizon") {
    std::string text = kScalarConfig;
    auto pos = text.find("\"horizon\": 1");
    text.replace(pos, std::string("\"horizon\": 1").size(), "\"horizon\": -2");
    CHECK_THROWS_WITH_AS(dlqg::load_model(text), doctest::Contains("horizon"),
                         dlqg::SchemaError);
  }
  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS(dlqg::load_model("{ not json"), dlqg::ParseError);
  }
}

TEST_CASE("load_model handles empty-controller matrices") {
  std::string text = R"json({
    "horizon": 0,
    "A": [[1.0, 0.0],[0.0, 1.0]],
    "B_L": [[],[]],
    "B_R": [[1.0],[0.5]],
    "R": [[1,0,0],[0,1,0],[0,0,1]],
    "x0_mean": [0.0, 0.0],
    "x0_cov": [[1.0,0.0],[0.0,1.0]],
    "noise_cov": [[0.1,0.0],[0.0,0.1]],
    "noise_kind": "rademacher-scaled",
    "p": 1.0
  })json";
  auto m = dlqg::load_model(text);
  CHECK(m.n_l() == 0);
  CHECK(m.n_r() == 1);
  CHECK(m.noise_kind == dlqg::NoiseKind::rademacher_scaled);
  CHECK_NOTHROW(dlqg::solve_backward(dlqg::validate(m)));
}
