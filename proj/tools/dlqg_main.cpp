// Command-line front end: solve a configured model, simulate policies
// against it, or sweep the drop probability.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dlqg/control.hpp"
#include "dlqg/io.hpp"
#include "dlqg/model.hpp"
#include "dlqg/riccati.hpp"
#include "dlqg/sim.hpp"

namespace {

using dlqg::LinearPolicy;
using dlqg::RiccatiSolution;
using dlqg::ValidatedModel;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// optimal | certainty-equivalent | no-local | perturbed[:eps[:seed]]
LinearPolicy<double> resolve_policy(const std::string& name, const ValidatedModel<double>& vm,
                                    const RiccatiSolution<double>& sol) {
  if (name == "optimal") return dlqg::optimal_policy(sol);
  if (name == "certainty-equivalent") return dlqg::certainty_equivalent_policy(vm);
  if (name == "no-local") return dlqg::no_local_policy(vm);
  if (name.rfind("perturbed", 0) == 0) {
    double eps = 0.1;
    std::uint64_t seed = 0;
    std::string rest = name.substr(std::string("perturbed").size());
    if (!rest.empty()) {
      if (rest[0] != ':') throw dlqg::UnknownPolicy("unknown policy \"" + name + "\"");
      rest.erase(0, 1);
      try {
        std::size_t used = 0;
        eps = std::stod(rest, &used);
        if (used < rest.size()) {
          if (rest[used] != ':') throw dlqg::UnknownPolicy("unknown policy \"" + name + "\"");
          seed = std::stoull(rest.substr(used + 1));
        }
      } catch (const std::logic_error&) {
        throw dlqg::UnknownPolicy("unknown policy \"" + name +
                                  "\" (expected perturbed[:eps[:seed]])");
      }
    }
    return dlqg::perturbed_policy(dlqg::optimal_policy(sol), eps, seed);
  }
  throw dlqg::UnknownPolicy("unknown policy \"" + name +
                            "\" (known: optimal, certainty-equivalent, no-local, "
                            "perturbed[:eps[:seed]])");
}

const char* noise_kind_name(dlqg::NoiseKind kind) {
  return kind == dlqg::NoiseKind::gaussian ? "gaussian" : "rademacher-scaled";
}

nlohmann::json model_summary(const ValidatedModel<double>& vm) {
  return {{"horizon", vm.horizon()}, {"n_x", vm.n_x()},       {"n_l", vm.n_l()},
          {"n_r", vm.n_r()},         {"p", vm.p()},           {"noise_kind",
                                                               noise_kind_name(vm.noise_kind())}};
}

int cmd_solve(const std::string& config_path, const std::string& out_path) {
  auto vm = dlqg::validate(dlqg::load_model_file(config_path));
  auto sol = dlqg::solve_backward(vm);
  dlqg::write_solution_file(out_path, sol);
  std::cout << "J* = " << dlqg::format_sig(dlqg::optimal_expected_cost(sol, vm)) << "\n";
  std::cout << "solution written to " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& policy_name,
                 std::int64_t episodes, std::uint64_t seed, const std::string& trace_path,
                 unsigned threads) {
  auto t0 = std::chrono::steady_clock::now();
  auto vm = dlqg::validate(dlqg::load_model_file(config_path));
  auto sol = dlqg::solve_backward(vm);
  const double solve_s = seconds_since(t0);

  auto policy = resolve_policy(policy_name, vm, sol);
  const double analytic = dlqg::optimal_expected_cost(sol, vm);

  t0 = std::chrono::steady_clock::now();
  const double exact = dlqg::evaluate_linear_policy(vm, policy, sol);
  const double evaluate_s = seconds_since(t0);
  if (analytic > exact + 1e-9) {
    throw std::logic_error("analytic optimal cost exceeds an evaluated policy cost");
  }

  t0 = std::chrono::steady_clock::now();
  nlohmann::json mc_json;
  if (episodes >= 2) {
    auto mc = dlqg::monte_carlo_cost(vm, policy, sol, episodes, seed, threads);
    mc_json = {{"mean", mc.mean}, {"std_err", mc.std_err}};
  } else {
    auto trace = dlqg::run_episode(vm, policy, sol, seed, 0);
    mc_json = {{"mean", trace.total_cost}, {"std_err", nullptr}};
  }
  const double mc_s = seconds_since(t0);

  if (!trace_path.empty()) {
    dlqg::write_trace_csv_file(trace_path, dlqg::run_episode(vm, policy, sol, seed, 0));
  }

  nlohmann::json report = {
      {"model", model_summary(vm)},
      {"analytic_optimal_cost", analytic},
      {"policy",
       {{"name", policy_name},
        {"exact_cost", exact},
        {"mc_mean", mc_json["mean"]},
        {"mc_std_err", mc_json["std_err"]},
        {"episodes", episodes},
        {"seed", seed}}},
      {"timing_seconds",
       {{"solve", solve_s}, {"evaluate", evaluate_s}, {"monte_carlo", mc_s}}}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_path) {
  if (param != "p") {
    throw dlqg::Error("unsupported sweep parameter \"" + param + "\" (only p)");
  }
  auto base = dlqg::load_model_file(config_path);
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw dlqg::BadProbability("sweep value " + dlqg::format_sig(v) + " outside [0, 1]");
    }
  }

  std::ostringstream csv;
  csv << "p,optimal_cost,cost_certainty_equivalent,cost_no_local\n";
  for (double v : values) {
    auto m = base;
    m.p = v;
    auto vm = dlqg::validate(m);
    auto sol = dlqg::solve_backward(vm);
    const double j_star = dlqg::optimal_expected_cost(sol, vm);
    const double j_ce =
        dlqg::evaluate_linear_policy(vm, dlqg::certainty_equivalent_policy(vm), sol);
    const double j_nl = dlqg::evaluate_linear_policy(vm, dlqg::no_local_policy(vm), sol);
    csv << dlqg::format_sig(v) << "," << dlqg::format_sig(j_star) << ","
        << dlqg::format_sig(j_ce) << "," << dlqg::format_sig(j_nl) << "\n";
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw dlqg::Error("cannot open output file: " + out_path);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized LQG control over a packet-drop channel"};
  app.require_subcommand(1);

  std::string config_path, out_path = "solution.json";
  auto* solve = app.add_subcommand("solve", "solve the backward recursion and print J*");
  solve->add_option("config", config_path, "model config (JSON)")->required();
  solve->add_option("--out", out_path, "solution output path")->capture_default_str();

  std::string sim_config, policy_name = "optimal", trace_path;
  std::int64_t episodes = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo + exact policy evaluation");
  simulate->add_option("config", sim_config, "model config (JSON)")->required();
  simulate->add_option("--policy", policy_name,
                       "optimal | certainty-equivalent | no-local | perturbed[:eps[:seed]]")
      ->capture_default_str();
  simulate->add_option("--episodes", episodes, "number of episodes")->capture_default_str();
  simulate->add_option("--seed", seed, "master seed")->capture_default_str();
  simulate->add_option("--trace", trace_path, "write episode 0 as CSV to this path");
  simulate->add_option("--threads", threads, "0 = hardware default")->capture_default_str();

  std::string sweep_config, sweep_param = "p", sweep_out;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "tabulate costs over channel parameters");
  sweep->add_option("config", sweep_config, "model config (JSON)")->required();
  sweep->add_option("--param", sweep_param, "swept parameter (p)")->capture_default_str();
  sweep->add_option("--values", sweep_values, "parameter values")->required()->delimiter(',');
  sweep->add_option("--out", sweep_out, "CSV output path (default: stdout)");

  try {
    app.parse(argc, argv);
    if (solve->parsed()) return cmd_solve(config_path, out_path);
    if (simulate->parsed()) {
      return cmd_simulate(sim_config, policy_name, episodes, seed, trace_path, threads);
    }
    return cmd_sweep(sweep_config, sweep_param, sweep_values, sweep_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const dlqg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
