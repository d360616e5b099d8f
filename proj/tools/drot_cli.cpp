#include "drot/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_regularizer_flags(CLI::App* cmd, std::string& phi, std::string& varphi) {
  cmd->add_option("--phi", phi, "Row regularizer: quadratic | entropy | exponential");
  cmd->add_option("--varphi", varphi, "Column regularizer: quadratic | entropy | exponential");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-regularized optimal transport solver and experiment harness"};
  app.require_subcommand(1);

  drot::cli::SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem file and write the plan");
  solve->add_option("--problem", solve_args.problem, "Problem JSON file")->required();
  add_regularizer_flags(solve, solve_args.phi, solve_args.varphi);
  solve->add_option("--gamma", solve_args.gamma, "Regularization weight")->required();
  solve->add_option("--tol", solve_args.tol, "Feasibility tolerance");
  solve->add_option("--max-sweeps", solve_args.max_sweeps, "Sweep budget");
  solve->add_option("--cost-shift", solve_args.cost_shift, "Additive cost shift (entropy)");
  solve->add_option("--out", solve_args.out, "Plan CSV path (sidecars derive from it)");

  drot::cli::VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "Check a solution against the optimality "
                                                  "conditions");
  verify->add_option("--problem", verify_args.problem, "Problem JSON file")->required();
  verify->add_option("--plan", verify_args.plan, "Plan CSV file")->required();
  verify->add_option("--potentials", verify_args.potentials, "Potentials JSON file")->required();
  add_regularizer_flags(verify, verify_args.phi, verify_args.varphi);
  verify->add_option("--gamma", verify_args.gamma, "Regularization weight")->required();
  verify->add_option("--tol", verify_args.tol, "Feasibility tolerance");
  verify->add_option("--cost-shift", verify_args.cost_shift, "Additive cost shift (entropy)");
  verify->add_flag("--exact", verify_args.with_exact,
                   "Also solve exact OT and check the approximation bounds");

  drot::cli::ExperimentArgs experiment_args;
  CLI::App* experiment = app.add_subcommand("experiment",
                                            "Regenerate sweep data (CSV/JSON artifacts)");
  experiment->add_option("kind", experiment_args.kind, "sparsity | rate | mass | timing")
      ->required();
  experiment->add_option("--seed", experiment_args.seed, "Instance seed");
  experiment->add_option("--size", experiment_args.size, "Atoms per side / grid points");
  experiment->add_option("--gammas", experiment_args.gammas, "Gamma grid");
  experiment->add_option("--gauss-sizes", experiment_args.gauss_sizes, "Timing grid sizes");
  experiment->add_option("--out-dir", experiment_args.out_dir, "Output directory");
  add_regularizer_flags(experiment, experiment_args.phi, experiment_args.varphi);
  experiment->add_option("--tol", experiment_args.tol, "Feasibility tolerance");
  experiment->add_option("--max-sweeps", experiment_args.max_sweeps, "Sweep budget");
  experiment->add_option("--cost-shift", experiment_args.cost_shift,
                         "Additive cost shift for entropic runs");

  drot::cli::ColorTransferArgs transfer_args;
  CLI::App* transfer = app.add_subcommand("color-transfer",
                                          "Transfer the target palette onto the source image");
  transfer->add_option("--source", transfer_args.source, "Source image")->required();
  transfer->add_option("--target", transfer_args.target, "Target image")->required();
  transfer->add_option("--k", transfer_args.k, "Color clusters per image");
  add_regularizer_flags(transfer, transfer_args.phi, transfer_args.varphi);
  transfer->add_option("--gamma", transfer_args.gamma, "Regularization weight");
  transfer->add_option("--tol", transfer_args.tol, "Feasibility tolerance");
  transfer->add_option("--max-sweeps", transfer_args.max_sweeps, "Sweep budget");
  transfer->add_option("--cost-shift", transfer_args.cost_shift, "Additive cost shift (entropy)");
  transfer->add_option("--seed", transfer_args.seed, "k-means seed");
  transfer->add_option("--out", transfer_args.out, "Output image path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& parse_error) {
    app.exit(parse_error);
    return 1;
  }

  if (solve->parsed()) return drot::cli::cmd_solve(solve_args, std::cout, std::cerr);
  if (verify->parsed()) return drot::cli::cmd_verify(verify_args, std::cout, std::cerr);
  if (experiment->parsed()) {
    return drot::cli::cmd_experiment(experiment_args, std::cout, std::cerr);
  }
  if (transfer->parsed()) {
    return drot::cli::cmd_color_transfer(transfer_args, std::cout, std::cerr);
  }
  return 1;
}
