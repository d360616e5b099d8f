#include "drot/diagnostics.hpp"

#include "drot/pnf_solver.hpp"
#include "drot/regularizers.hpp"

#include <cmath>

namespace drot {

namespace {

// phi*(gamma dev) with the exponential conjugate's tiny-negative arguments
// (rounding of re-summed marginals) evaluated at zero.
double conjugate_of_scaled(Regularizer kind, const Vector& deviation, double gamma) {
  double total = 0.0;
  for (Index i = 0; i < deviation.size(); ++i) {
    double x = gamma * deviation[i];
    if (kind == Regularizer::exponential && x < 0.0 && x > -1e-9 * std::max(1.0, gamma)) {
      x = 0.0;
    }
    total += conjugate_at(kind, x);
  }
  return total;
}

}  // namespace

DiagnosticsReport kkt_report(const ProblemInstance& problem, const SolverConfig& config,
                             const SolveResult& result) {
  const CostMatrix cost = effective_cost(problem, config);
  const double gamma = config.gamma;
  DiagnosticsReport report;

  report.marginal_dev_a = problem.a.weights() - result.plan.row_sums();
  report.marginal_dev_b = problem.b.weights() - result.plan.col_sums();
  for (Index i = 0; i < report.marginal_dev_a.size(); ++i) {
    report.mass_destroyed += std::max(report.marginal_dev_a[i], 0.0);
    report.mass_created += std::max(-report.marginal_dev_a[i], 0.0);
  }

  const auto stationarity = [&](Regularizer kind, const Vector& potentials,
                                const Vector& deviation, const std::optional<Vector>& mult) {
    double worst = 0.0;
    for (Index i = 0; i < potentials.size(); ++i) {
      const double corrected = deviation[i] - (mult ? (*mult)[i] : 0.0);
      worst = std::max(worst, std::abs(gamma * corrected - grad_at(kind, potentials[i])));
    }
    return worst;
  };
  report.kkt_stationarity_f =
      stationarity(config.phi, result.potentials.f, report.marginal_dev_a, result.potentials.c1);
  report.kkt_stationarity_g =
      stationarity(config.varphi, result.potentials.g, report.marginal_dev_b,
                   result.potentials.c2);

  for (const TransportPlan::Entry& e : result.plan.entries()) {
    // |P (C - f - g)| evaluated with the solver's association so a
    // certificate-stopped run reproduces its own residuals bit-exactly.
    const double slackness =
        e.value * (result.potentials.f[e.i] + result.potentials.g[e.j] - cost(e.i, e.j));
    report.complementary_slackness = std::max(report.complementary_slackness,
                                              std::abs(slackness));
    if (e.value > kSupportTol) ++report.support_size;
  }

  report.duality_gap = std::abs(result.primal_objective - result.dual_objective);
  report.feasibility_error = feasibility_error(result.potentials, cost, gamma);
  return report;
}

double primal_objective_of(const ProblemInstance& problem, const SolverConfig& config,
                           const DualPotentials& potentials) {
  return potentials.f.dot(problem.a.weights()) + potentials.g.dot(problem.b.weights()) -
         (value(config.phi, potentials.f) + value(config.varphi, potentials.g)) / config.gamma;
}

double dual_objective_of(const ProblemInstance& problem, const SolverConfig& config,
                         const TransportPlan& plan) {
  const CostMatrix cost = effective_cost(problem, config);
  const Vector dev_a = problem.a.weights() - plan.row_sums();
  const Vector dev_b = problem.b.weights() - plan.col_sums();
  return plan.dot(cost) + conjugate_of_scaled(config.phi, dev_a, config.gamma) / config.gamma +
         conjugate_of_scaled(config.varphi, dev_b, config.gamma) / config.gamma;
}

Prop2Report check_prop2_bounds(const ProblemInstance& problem, const SolverConfig& config,
                               const ExactOTResult& exact, const SolveResult& drot) {
  const double gamma = config.gamma;
  const CostMatrix cost = effective_cost(problem, config);
  Prop2Report report;
  report.slack = 1e-8 * gamma;

  const double reg_drot_f = value(config.phi, drot.potentials.f);
  const double reg_drot_g = value(config.varphi, drot.potentials.g);
  const double scaled_gap = gamma * (exact.cost - drot.primal_objective);

  const Vector dev_a = problem.a.weights() - drot.plan.row_sums();
  const Vector dev_b = problem.b.weights() - drot.plan.col_sums();
  const double conj_sum = conjugate_of_scaled(config.phi, dev_a, gamma) +
                          conjugate_of_scaled(config.varphi, dev_b, gamma);
  const double cost_gap = gamma * (exact.cost - drot.plan.dot(cost));

  report.part1_lower_margin = scaled_gap - (reg_drot_f + reg_drot_g);
  report.part3_margin = (cost_gap - reg_drot_f - reg_drot_g) - conj_sum;

  double reg_exact = 0.0;
  try {
    reg_exact = value(config.phi, exact.dual_f) + value(config.varphi, exact.dual_g);
  } catch (const DomainError&) {
    report.exact_side_defined = false;
  }
  if (report.exact_side_defined) {
    report.part1_upper_margin = reg_exact - scaled_gap;
    report.part2_margin = (reg_exact + conj_sum) - cost_gap;
  }

  report.pass = report.part1_lower_margin >= -report.slack &&
                report.part3_margin >= -report.slack &&
                (!report.exact_side_defined ||
                 (report.part1_upper_margin >= -report.slack &&
                  report.part2_margin >= -report.slack));
  return report;
}

double rate_fit(const std::vector<double>& gammas, const std::vector<double>& errors) {
  if (gammas.size() != errors.size() || gammas.size() < 3) {
    throw InvalidProblem("rate_fit needs matching inputs of length >= 3");
  }
  std::vector<double> x(gammas.size()), y(errors.size());
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] > 0.0) || !(errors[k] > 0.0)) {
      throw InvalidProblem("rate_fit needs strictly positive inputs");
    }
    x[k] = std::log(gammas[k]);
    y[k] = std::log(errors[k]);
  }
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mean_x += x[k];
    mean_y += y[k];
  }
  mean_x /= static_cast<double>(x.size());
  mean_y /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num += (x[k] - mean_x) * (y[k] - mean_y);
    den += (x[k] - mean_x) * (x[k] - mean_x);
  }
  return num / den;
}

bool support_containment(const TransportPlan& drot_plan, const TransportPlan& exact_plan,
                         double tol) {
  if (drot_plan.rows() != exact_plan.rows() || drot_plan.cols() != exact_plan.cols()) {
    throw InvalidProblem("support_containment needs plans of identical shape");
  }
  for (const TransportPlan::Entry& e : drot_plan.entries()) {
    if (e.value > tol && !(exact_plan.value_at(e.i, e.j) > tol)) {
      return false;
    }
  }
  return true;
}

}  // namespace drot
