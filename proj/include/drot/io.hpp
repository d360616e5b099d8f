#pragma once

#include "drot/core.hpp"
#include "drot/diagnostics.hpp"

#include <string>

namespace drot::io {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

/// Problem files are JSON: {"a": [...], "b": [...], "cost": ...} where cost
/// is {"dense": [[...], ...]} or {"sqeuclidean": {"x": [[...]], "y": [[...]]}}.
/// Parse errors carry the byte offset; validation errors name the field.
ProblemInstance read_problem(const std::string& path);
ProblemInstance parse_problem(const std::string& text);
void write_problem(const std::string& path, const ProblemInstance& problem);

/// Plan files: header "i,j,value", one 0-indexed line per nonzero, values in
/// shortest round-trip decimal. Reading reproduces the plan exactly.
void write_plan_csv(const std::string& path, const TransportPlan& plan);
TransportPlan read_plan_csv(const std::string& path, Index rows, Index cols);

struct Summary {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double feasibility_error = 0.0;
  long sweeps = 0;
  Index nnz = 0;
  double mass_created = 0.0;
  double mass_destroyed = 0.0;
};

Summary make_summary(const ProblemInstance& problem, const SolveResult& result);
void write_summary_json(const std::string& path, const Summary& summary);

void write_potentials_json(const std::string& path, const DualPotentials& potentials);
DualPotentials read_potentials_json(const std::string& path);

std::string diagnostics_to_json(const DiagnosticsReport& report);

}  // namespace drot::io
