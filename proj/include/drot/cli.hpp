#pragma once

#include "drot/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Command implementations behind the drot executable. They are ordinary
// functions so the exit-code contract (0 success, 1 input error, 2 solver
// non-convergence, 3 verification failure) is testable in-process.
namespace drot::cli {

struct SolveArgs {
  std::string problem;
  std::string phi = "quadratic";
  std::string varphi = "quadratic";
  double gamma = 1.0;
  double tol = 1e-8;
  long max_sweeps = 100000;
  double cost_shift = 0.0;
  std::string out = "plan.csv";
};
int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);

struct VerifyArgs {
  std::string problem;
  std::string plan;
  std::string potentials;
  std::string phi = "quadratic";
  std::string varphi = "quadratic";
  double gamma = 1.0;
  double tol = 1e-8;
  double cost_shift = 0.0;
  bool with_exact = false;
};
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

struct ExperimentArgs {
  std::string kind;  // sparsity | rate | mass | timing
  std::uint64_t seed = 0;
  Index size = 100;                // atoms per side for sparsity/mass
  std::vector<double> gammas;      // per-kind default grid when empty
  std::vector<Index> gauss_sizes;  // timing grid, default {101, 501}
  std::string out_dir = ".";
  std::string phi = "quadratic";   // rate/timing regularizer
  std::string varphi = "quadratic";
  double tol = 1e-8;
  long max_sweeps = 100000;
  double cost_shift = 1e-3;  // applied to entropic runs
};
int cmd_experiment(const ExperimentArgs& args, std::ostream& out, std::ostream& err);

struct ColorTransferArgs {
  std::string source;
  std::string target;
  Index k = 64;
  std::string phi = "quadratic";
  std::string varphi = "quadratic";
  double gamma = 1e4;
  double tol = 1e-8;
  long max_sweeps = 100000;
  double cost_shift = 0.0;  // entropy defaults to 1e-3 inside the pipeline
  std::uint64_t seed = 42;
  std::string out = "transfer.png";
};
int cmd_color_transfer(const ColorTransferArgs& args, std::ostream& out, std::ostream& err);

}  // namespace drot::cli
