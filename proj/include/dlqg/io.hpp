#pragma once

// File formats: JSON model configs (strict schema, single matrices broadcast
// across time), JSON solution export, and CSV episode traces.

#include <iosfwd>
#include <string>

#include "dlqg/model.hpp"
#include "dlqg/riccati.hpp"
#include "dlqg/sim.hpp"

namespace dlqg {

/// Render a double with the given number of significant digits (%g).
std::string format_sig(double value, int digits = 12);

/// Parse a model config from JSON text. Ill-formed JSON raises ParseError;
/// a missing/unknown/badly-typed field raises SchemaError naming the field.
SystemModel<double> load_model(const std::string& text);
SystemModel<double> load_model_file(const std::string& path);

/// Serialize a solved recursion with per-time matrices in the same row-major
/// nested-array convention as the model input.
std::string solution_to_json(const RiccatiSolution<double>& sol);
void write_solution_file(const std::string& path, const RiccatiSolution<double>& sol);

/// Columns: t, gamma, x[*], x_hat[*], u_L[*], u_R[*], stage_cost.
void write_trace_csv(std::ostream& os, const EpisodeTrace<double>& trace);
void write_trace_csv_file(const std::string& path, const EpisodeTrace<double>& trace);

}  // namespace dlqg
