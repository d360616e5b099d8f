#include "drot/cli.hpp"

#include "drot/diagnostics.hpp"
#include "drot/exact_ot.hpp"
#include "drot/io.hpp"
#include "drot/pnf_solver.hpp"
#include "drot/regularizers.hpp"
#include "drot/rng.hpp"
#include "drot/transfer.hpp"

#include <json.hpp>

#include <chrono>
#include <optional>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

namespace drot::cli {

namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kSolverFailure = 2;
constexpr int kVerificationFailure = 3;

std::string sidecar_path(const std::string& base, const std::string& suffix) {
  std::filesystem::path path(base);
  path.replace_extension(suffix);
  return path.string();
}

SolverConfig build_config(const std::string& phi, const std::string& varphi, double gamma,
                          double tol, long max_sweeps, double cost_shift) {
  SolverConfig config;
  config.phi = regularizer_from_string(phi);
  config.varphi = regularizer_from_string(varphi);
  config.gamma = gamma;
  config.feasibility_tol = tol;
  config.max_sweeps = max_sweeps;
  config.cost_shift = cost_shift;
  return config;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream output(path, std::ios::binary);
  if (!output) throw InvalidProblem("cannot write file: " + path);
  output << content;
}

Index support_count(const TransportPlan& plan) {
  Index count = 0;
  for (const auto& e : plan.entries()) {
    if (e.value > kSupportTol) ++count;
  }
  return count;
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Maps bad inputs (unreadable files, malformed JSON, invalid shapes or
// configuration) to exit code 1.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InvalidProblem& bad_input) {
    err << "input error: " << bad_input.what() << "\n";
    return kInputError;
  } catch (const DomainError& bad_input) {
    err << "input error: " << bad_input.what() << "\n";
    return kInputError;
  }
}

}  // namespace

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
  ProblemInstance problem = io::read_problem(args.problem);
  SolveResult result;
  try {
    const SolverConfig config = build_config(args.phi, args.varphi, args.gamma, args.tol,
                                             args.max_sweeps, args.cost_shift);
    validate_config(problem, config);
    result = solve(problem, config);
  } catch (const SolverError& failure) {
    err << "solver failure: " << failure.what() << "\n";
    return kSolverFailure;
  }

  io::write_plan_csv(args.out, result.plan);
  io::write_summary_json(sidecar_path(args.out, ".summary.json"),
                         io::make_summary(problem, result));
  io::write_potentials_json(sidecar_path(args.out, ".potentials.json"), result.potentials);

  out << (result.converged ? "converged" : "NOT converged") << " after " << result.sweeps
      << " sweeps, feasibility error " << io::format_double(result.feasibility_error)
      << ", objective " << io::format_double(result.primal_objective) << "\n";
  return result.converged ? kOk : kSolverFailure;
  });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
  const ProblemInstance problem = io::read_problem(args.problem);
  const SolverConfig config = build_config(args.phi, args.varphi, args.gamma, args.tol, 1,
                                           args.cost_shift);
  SolveResult result;
  result.plan = io::read_plan_csv(args.plan, problem.a.size(), problem.b.size());
  result.potentials = io::read_potentials_json(args.potentials);
  if (result.potentials.f.size() != problem.a.size() ||
      result.potentials.g.size() != problem.b.size()) {
    throw InvalidProblem("potentials shape does not match the problem");
  }
  result.primal_objective = primal_objective_of(problem, config, result.potentials);
  result.dual_objective = dual_objective_of(problem, config, result.plan);

  const DiagnosticsReport report = kkt_report(problem, config, result);

  std::vector<std::string> failures;
  const auto check = [&](const std::string& name, double residual, double bound) {
    if (!(residual <= bound)) {
      failures.push_back(name + " = " + io::format_double(residual) + " exceeds " +
                         io::format_double(bound));
    }
  };
  check("kkt_stationarity_f", report.kkt_stationarity_f, 1e-6 * config.gamma);
  check("kkt_stationarity_g", report.kkt_stationarity_g, 1e-6 * config.gamma);
  check("complementary_slackness", report.complementary_slackness, 1e-6);
  check("duality_gap", report.duality_gap,
        1e-6 * (1.0 + std::abs(result.primal_objective)));
  check("feasibility_error", report.feasibility_error, config.feasibility_tol);

  OrderedJson root = OrderedJson::parse(io::diagnostics_to_json(report));
  if (args.with_exact) {
    const ProblemInstance shifted{problem.a, problem.b, effective_cost(problem, config)};
    const ExactOTResult exact = solve_exact_ot(shifted);
    const Prop2Report prop2 = check_prop2_bounds(problem, config, exact, result);
    OrderedJson node;
    node["slack"] = prop2.slack;
    node["exact_side_defined"] = prop2.exact_side_defined;
    node["part1_lower_margin"] = prop2.part1_lower_margin;
    node["part1_upper_margin"] = prop2.part1_upper_margin;
    node["part2_margin"] = prop2.part2_margin;
    node["part3_margin"] = prop2.part3_margin;
    node["pass"] = prop2.pass;
    root["prop2"] = node;
    if (!prop2.pass) failures.push_back("approximation bounds violated");
  }
  out << root.dump(2) << "\n";

  if (!failures.empty()) {
    for (const std::string& f : failures) err << "verification failed: " << f << "\n";
    return kVerificationFailure;
  }
  return kOk;
  });
}

namespace {

struct CsvWriter {
  std::string content;

  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const std::string& cell : cells) {
      if (!first) content += ',';
      content += cell;
      first = false;
    }
    content += '\n';
  }
};

OrderedJson experiment_meta(const ExperimentArgs& args, const std::vector<double>& gammas) {
  OrderedJson meta;
  meta["kind"] = args.kind;
  meta["seed"] = args.seed;
  meta["generator"] = Rng::kAlgorithm;
  meta["size"] = args.size;
  meta["gammas"] = gammas;
  meta["tol"] = args.tol;
  meta["cost_shift"] = args.cost_shift;
  return meta;
}

SolverConfig experiment_config(const ExperimentArgs& args, Regularizer reg, double gamma) {
  SolverConfig config;
  config.phi = reg;
  config.varphi = reg;
  config.gamma = gamma;
  config.feasibility_tol = args.tol;
  config.max_sweeps = args.max_sweeps;
  config.cost_shift = reg == Regularizer::entropy ? args.cost_shift : 0.0;
  return config;
}

int run_sparsity(const ExperimentArgs& args, std::ostream& out) {
  const std::vector<double> gammas =
      args.gammas.empty() ? std::vector<double>{1e0, 1e1, 1e2, 1e3, 1e4} : args.gammas;
  Rng rng(args.seed);
  const Vector a = rng.simplex(args.size);
  const Vector b = rng.simplex(args.size);
  const Matrix costs = rng.uniform_matrix(args.size, args.size, 0.0, 1.0);
  const ProblemInstance problem = make_problem(Measure(a), Measure(b), CostMatrix(costs));
  const ExactOTResult exact = solve_exact_ot(problem);
  const Index exact_nnz = support_count(exact.plan);

  CsvWriter csv;
  csv.row({"regularizer", "gamma", "nnz", "exact_nnz", "converged", "sweeps",
           "feasibility_error"});
  for (const Regularizer reg :
       {Regularizer::quadratic, Regularizer::entropy, Regularizer::exponential}) {
    for (const double gamma : gammas) {
      const SolveResult result = solve(problem, experiment_config(args, reg, gamma));
      csv.row({to_string(reg), io::format_double(gamma), std::to_string(support_count(result.plan)),
               std::to_string(exact_nnz), result.converged ? "1" : "0",
               std::to_string(result.sweeps), io::format_double(result.feasibility_error)});
    }
  }
  const std::string csv_path = (std::filesystem::path(args.out_dir) / "sparsity.csv").string();
  write_text(csv_path, csv.content);
  OrderedJson meta = experiment_meta(args, gammas);
  meta["exact_nnz"] = exact_nnz;
  write_text((std::filesystem::path(args.out_dir) / "sparsity.meta.json").string(),
             meta.dump(2) + "\n");
  out << "wrote " << csv_path << "\n";
  return kOk;
}

int run_rate(const ExperimentArgs& args, std::ostream& out) {
  const std::vector<double> gammas =
      args.gammas.empty() ? std::vector<double>{1e1, 1e2, 1e3, 1e4} : args.gammas;
  const Index n = args.size == 100 ? 101 : args.size;  // grid points
  const ProblemInstance gaussians = gaussian_instance(n, -15.0, 15.0, 10.0, -20.0, 20.0);
  // The paper's rate experiment fixes every cost entry at 1.
  const ProblemInstance problem = make_problem(
      gaussians.a, gaussians.b, CostMatrix(Matrix::Ones(n, n)));
  const ExactOTResult exact = solve_exact_ot(problem);

  const Regularizer phi = regularizer_from_string(args.phi);
  const Regularizer varphi = regularizer_from_string(args.varphi);

  CsvWriter csv;
  csv.row({"gamma", "ot_minus_drot", "abs_cost_gap", "conjugate_gap", "marginal_err_a",
           "marginal_err_b", "sweeps", "converged"});
  std::vector<double> ot_gaps, cost_gaps, marg_errors;
  for (const double gamma : gammas) {
    SolverConfig config = experiment_config(args, phi, gamma);
    config.varphi = varphi;
    const SolveResult result = solve(problem, config);
    const CostMatrix cost = effective_cost(problem, config);
    const double ot_minus_drot = exact.cost - result.primal_objective;
    const double abs_cost_gap = std::abs(exact.cost - result.plan.dot(cost));
    const double conjugate_gap = result.dual_objective - result.plan.dot(cost);
    const double marg_a = (problem.a.weights() - result.plan.row_sums()).norm();
    const double marg_b = (problem.b.weights() - result.plan.col_sums()).norm();
    csv.row({io::format_double(gamma), io::format_double(ot_minus_drot),
             io::format_double(abs_cost_gap), io::format_double(conjugate_gap),
             io::format_double(marg_a), io::format_double(marg_b),
             std::to_string(result.sweeps), result.converged ? "1" : "0"});
    ot_gaps.push_back(ot_minus_drot);
    cost_gaps.push_back(abs_cost_gap);
    marg_errors.push_back(marg_a);
  }
  const std::string csv_path = (std::filesystem::path(args.out_dir) / "rate.csv").string();
  write_text(csv_path, csv.content);

  OrderedJson meta = experiment_meta(args, gammas);
  meta["grid_points"] = n;
  const auto safe_slope = [&](const std::vector<double>& errors) -> OrderedJson {
    for (const double e : errors) {
      if (!(e > 0.0)) return nullptr;
    }
    return rate_fit(gammas, errors);
  };
  meta["slope_ot_minus_drot"] = safe_slope(ot_gaps);
  meta["slope_abs_cost_gap"] = safe_slope(cost_gaps);
  meta["slope_marginal_err"] = safe_slope(marg_errors);
  write_text((std::filesystem::path(args.out_dir) / "rate.meta.json").string(),
             meta.dump(2) + "\n");
  out << "wrote " << csv_path << "\n";
  return kOk;
}

int run_mass(const ExperimentArgs& args, std::ostream& out) {
  const std::vector<double> gammas =
      args.gammas.empty() ? std::vector<double>{1e0, 1e1, 1e2} : args.gammas;
  Rng rng(args.seed);
  const Vector a = rng.simplex(args.size);
  const Vector b = rng.simplex(args.size);
  const Matrix costs = rng.uniform_matrix(args.size, args.size, 0.0, 1.0);
  const ProblemInstance problem = make_problem(Measure(a), Measure(b), CostMatrix(costs));

  CsvWriter csv;
  csv.row({"regularizer", "gamma", "side", "index", "weight", "marginal", "deviation"});
  for (const Regularizer reg :
       {Regularizer::quadratic, Regularizer::exponential, Regularizer::entropy}) {
    for (const double gamma : gammas) {
      const SolveResult result = solve(problem, experiment_config(args, reg, gamma));
      const Vector row_mass = result.plan.row_sums();
      const Vector col_mass = result.plan.col_sums();
      for (Index i = 0; i < problem.a.size(); ++i) {
        csv.row({to_string(reg), io::format_double(gamma), "a", std::to_string(i),
                 io::format_double(problem.a[i]), io::format_double(row_mass[i]),
                 io::format_double(problem.a[i] - row_mass[i])});
      }
      for (Index j = 0; j < problem.b.size(); ++j) {
        csv.row({to_string(reg), io::format_double(gamma), "b", std::to_string(j),
                 io::format_double(problem.b[j]), io::format_double(col_mass[j]),
                 io::format_double(problem.b[j] - col_mass[j])});
      }
    }
  }
  const std::string csv_path = (std::filesystem::path(args.out_dir) / "mass.csv").string();
  write_text(csv_path, csv.content);
  write_text((std::filesystem::path(args.out_dir) / "mass.meta.json").string(),
             experiment_meta(args, gammas).dump(2) + "\n");
  out << "wrote " << csv_path << "\n";
  return kOk;
}

int run_timing(const ExperimentArgs& args, std::ostream& out) {
  const std::vector<Index> sizes =
      args.gauss_sizes.empty() ? std::vector<Index>{101, 501} : args.gauss_sizes;
  const double gamma = args.gammas.empty() ? 1e3 : args.gammas.front();
  const Regularizer phi = regularizer_from_string(args.phi);

  CsvWriter csv;
  csv.row({"n", "gamma", "regularizer", "seconds", "sweeps", "feasibility_error", "converged"});
  for (const Index n : sizes) {
    const ProblemInstance problem = gaussian_instance(n, -15.0, 15.0, 10.0, -20.0, 20.0);
    SolverConfig config = experiment_config(args, phi, gamma);
    config.varphi = regularizer_from_string(args.varphi);
    const auto started = std::chrono::steady_clock::now();
    const SolveResult result = solve(problem, config);
    const double seconds = elapsed_seconds(started);
    csv.row({std::to_string(n), io::format_double(gamma), to_string(phi),
             io::format_double(seconds), std::to_string(result.sweeps),
             io::format_double(result.feasibility_error), result.converged ? "1" : "0"});
  }
  const std::string csv_path = (std::filesystem::path(args.out_dir) / "timing.csv").string();
  write_text(csv_path, csv.content);
  write_text((std::filesystem::path(args.out_dir) / "timing.meta.json").string(),
             experiment_meta(args, {gamma}).dump(2) + "\n");
  out << "wrote " << csv_path << "\n";
  return kOk;
}

}  // namespace

int cmd_experiment(const ExperimentArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    try {
      if (args.kind == "sparsity") return run_sparsity(args, out);
      if (args.kind == "rate") return run_rate(args, out);
      if (args.kind == "mass") return run_mass(args, out);
      if (args.kind == "timing") return run_timing(args, out);
      throw InvalidProblem("unknown experiment '" + args.kind +
                           "' (expected sparsity | rate | mass | timing)");
    } catch (const SolverError& failure) {
      err << "solver failure: " << failure.what() << "\n";
      return kSolverFailure;
    }
  });
}

int cmd_color_transfer(const ColorTransferArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
  const transfer::Image source = transfer::read_image(args.source);
  const transfer::Image target = transfer::read_image(args.target);
  const SolverConfig config = build_config(args.phi, args.varphi, args.gamma, args.tol,
                                           args.max_sweeps, args.cost_shift);

  std::optional<transfer::TransferResult> transferred;
  try {
    transferred = transfer::color_transfer(source, target, args.k, config, args.seed);
  } catch (const SolverError& failure) {
    err << "solver failure: " << failure.what() << "\n";
    return kSolverFailure;
  }
  const transfer::TransferResult& result = *transferred;

  transfer::write_image(args.out, result.output);

  OrderedJson meta;
  meta["k"] = args.k;
  meta["seed"] = args.seed;
  meta["generator"] = Rng::kAlgorithm;
  meta["phi"] = args.phi;
  meta["varphi"] = args.varphi;
  meta["gamma"] = args.gamma;
  meta["cost_shift"] = config.cost_shift;
  meta["tol"] = args.tol;
  meta["converged"] = result.solve.converged;
  meta["sweeps"] = result.solve.sweeps;
  meta["nnz"] = result.solve.plan.nnz();
  meta["feasibility_error"] = result.solve.feasibility_error;
  meta["duality_gap"] = result.diagnostics.duality_gap;
  meta["mass_created"] = result.diagnostics.mass_created;
  meta["mass_destroyed"] = result.diagnostics.mass_destroyed;
  meta["zero_mass_clusters"] = result.zero_rows.size();
  write_text(args.out + ".json", meta.dump(2) + "\n");

  out << "wrote " << args.out << " (" << (result.solve.converged ? "converged" : "NOT converged")
      << ", " << result.solve.sweeps << " sweeps)\n";
  return result.solve.converged ? kOk : kSolverFailure;
  });
}

}  // namespace drot::cli
