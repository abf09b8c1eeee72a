#include "dlqg/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

namespace dlqg {

using nlohmann::json;

std::string format_sig(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

namespace {

Eigen::MatrixXd parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected a matrix (array of rows)");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Eigen::MatrixXd M;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array()) {
      throw SchemaError(path + "[" + std::to_string(i) + "]: expected an array of numbers");
    }
    if (i == 0) {
      cols = row.size();
      M.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      throw SchemaError(path + "[" + std::to_string(i) + "]: ragged row (expected " +
                        std::to_string(cols) + " entries, got " + std::to_string(row.size()) +
                        ")");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number()) {
        throw SchemaError(path + "[" + std::to_string(i) + "][" + std::to_string(k) +
                          "]: expected a number");
      }
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
  }
  return M;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw SchemaError(path + "[" + std::to_string(i) + "]: expected a number");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

// A single matrix broadcasts to all horizon+1 stages; an array of matrices
// must match that length exactly.
std::vector<Eigen::MatrixXd> parse_matrix_sequence(const json& j, const std::string& path,
                                                   Eigen::Index count) {
  if (!j.is_array() || j.empty()) {
    throw SchemaError(path + ": expected a matrix or an array of matrices");
  }
  const bool is_sequence = j[0].is_array() && !j[0].empty() && j[0][0].is_array();
  if (!is_sequence) {
    return std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(count), parse_matrix(j, path));
  }
  if (static_cast<Eigen::Index>(j.size()) != count) {
    throw SchemaError(path + ": expected horizon+1 = " + std::to_string(count) +
                      " matrices, got " + std::to_string(j.size()));
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(j.size());
  for (std::size_t t = 0; t < j.size(); ++t) {
    out.push_back(parse_matrix(j[t], path + "[" + std::to_string(t) + "]"));
  }
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json matrix_sequence_to_json(const std::vector<Eigen::MatrixXd>& seq) {
  json out = json::array();
  for (const auto& M : seq) out.push_back(matrix_to_json(M));
  return out;
}

}  // namespace

SystemModel<double> load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config root must be an object");

  static const std::set<std::string> known = {"horizon", "A",      "B_L",       "B_R",
                                              "R",       "x0_mean", "x0_cov",   "noise_cov",
                                              "noise_kind", "p"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw SchemaError("unknown field \"" + key + "\"");
  }
  for (const auto& key : known) {
    if (!doc.contains(key)) throw SchemaError("missing field \"" + key + "\"");
  }

  SystemModel<double> m;
  if (!doc["horizon"].is_number_integer() || doc["horizon"].get<long long>() < 0) {
    throw SchemaError("horizon: expected a non-negative integer");
  }
  m.horizon = doc["horizon"].get<Eigen::Index>();
  m.A = parse_matrix(doc["A"], "A");
  m.B_L = parse_matrix(doc["B_L"], "B_L");
  m.B_R = parse_matrix(doc["B_R"], "B_R");
  m.R = parse_matrix_sequence(doc["R"], "R", m.horizon + 1);
  m.x0_mean = parse_vector(doc["x0_mean"], "x0_mean");
  m.x0_cov = parse_matrix(doc["x0_cov"], "x0_cov");
  m.noise_cov = parse_matrix_sequence(doc["noise_cov"], "noise_cov", m.horizon + 1);

  const json& kind = doc["noise_kind"];
  if (kind.is_string() && kind.get<std::string>() == "gaussian") {
    m.noise_kind = NoiseKind::gaussian;
  } else if (kind.is_string() && kind.get<std::string>() == "rademacher-scaled") {
    m.noise_kind = NoiseKind::rademacher_scaled;
  } else {
    throw SchemaError("noise_kind: expected \"gaussian\" or \"rademacher-scaled\"");
  }

  if (!doc["p"].is_number()) throw SchemaError("p: expected a number");
  m.p = doc["p"].get<double>();
  return m;
}

SystemModel<double> load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

std::string solution_to_json(const RiccatiSolution<double>& sol) {
  json doc;
  doc["horizon"] = sol.horizon();
  doc["n_x"] = sol.n_x();
  doc["n_l"] = sol.K_tilde.empty() ? 0 : sol.K_tilde.front().rows();
  doc["n_r"] = sol.K.empty() ? 0 : sol.K.front().rows() - doc["n_l"].get<Eigen::Index>();
  doc["P"] = matrix_sequence_to_json(sol.P);
  doc["P_tilde"] = matrix_sequence_to_json(sol.P_tilde);
  doc["G"] = matrix_sequence_to_json(sol.G);
  doc["G_tilde"] = matrix_sequence_to_json(sol.G_tilde);
  doc["H"] = matrix_sequence_to_json(sol.H);
  doc["H_tilde"] = matrix_sequence_to_json(sol.H_tilde);
  doc["K"] = matrix_sequence_to_json(sol.K);
  doc["K_tilde"] = matrix_sequence_to_json(sol.K_tilde);
  doc["e"] = sol.e;
  return doc.dump(2);
}

void write_solution_file(const std::string& path, const RiccatiSolution<double>& sol) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  out << solution_to_json(sol) << "\n";
}

void write_trace_csv(std::ostream& os, const EpisodeTrace<double>& trace) {
  const Eigen::Index nx = trace.x.empty() ? 0 : trace.x.front().size();
  const Eigen::Index nl = trace.u_L.empty() ? 0 : trace.u_L.front().size();
  const Eigen::Index nr = trace.u_R.empty() ? 0 : trace.u_R.front().size();
  os << "t,gamma";
  for (Eigen::Index i = 0; i < nx; ++i) os << ",x" << i;
  for (Eigen::Index i = 0; i < nx; ++i) os << ",x_hat" << i;
  for (Eigen::Index i = 0; i < nl; ++i) os << ",u_L" << i;
  for (Eigen::Index i = 0; i < nr; ++i) os << ",u_R" << i;
  os << ",stage_cost\n";
  for (std::size_t t = 0; t < trace.x.size(); ++t) {
    os << t << "," << trace.gamma[t];
    for (Eigen::Index i = 0; i < nx; ++i) os << "," << format_sig(trace.x[t](i));
    for (Eigen::Index i = 0; i < nx; ++i) os << "," << format_sig(trace.x_hat[t](i));
    for (Eigen::Index i = 0; i < nl; ++i) os << "," << format_sig(trace.u_L[t](i));
    for (Eigen::Index i = 0; i < nr; ++i) os << "," << format_sig(trace.u_R[t](i));
    os << "," << format_sig(trace.stage_cost[t]) << "\n";
  }
}

void write_trace_csv_file(const std::string& path, const EpisodeTrace<double>& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open trace file: " + path);
  write_trace_csv(out, trace);
}

}  // namespace dlqg
