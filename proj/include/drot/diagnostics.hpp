#pragma once

#include "drot/core.hpp"
#include "drot/exact_ot.hpp"

#include <vector>

namespace drot {

/// Entries below this value do not count as support.
inline constexpr double kSupportTol = 1e-10;

struct DiagnosticsReport {
  double kkt_stationarity_f = 0.0;     // max |gamma(a - P1 - c1) - grad(phi)(f)|
  double kkt_stationarity_g = 0.0;
  double complementary_slackness = 0.0;  // max |P_ij (C_ij - f_i - g_j)| over stored entries
  double duality_gap = 0.0;
  double feasibility_error = 0.0;
  Vector marginal_dev_a;  // a - P 1 (signed; positive = destroyed mass)
  Vector marginal_dev_b;  // b - P^T 1
  double mass_created = 0.0;
  double mass_destroyed = 0.0;
  Index support_size = 0;
};

DiagnosticsReport kkt_report(const ProblemInstance& problem, const SolverConfig& config,
                             const SolveResult& result);

/// <f, a> + <g, b> - (phi(f) + varphi(g)) / gamma.
double primal_objective_of(const ProblemInstance& problem, const SolverConfig& config,
                           const DualPotentials& potentials);

/// <C, P> + phi*(gamma(a - P1))/gamma + varphi*(gamma(b - P^T 1))/gamma on
/// the effective (possibly shifted) cost.
double dual_objective_of(const ProblemInstance& problem, const SolverConfig& config,
                         const TransportPlan& plan);

/// Margins of the three approximation-bound chains relating the exact and
/// regularized optima. Margins are signed (>= -slack passes) so
/// near-violations stay visible in logs. Chains that require evaluating the
/// regularizer at the exact dual potentials are skipped when those potentials
/// fall outside its domain (exact_side_defined = false).
struct Prop2Report {
  double slack = 0.0;
  bool exact_side_defined = true;
  double part1_lower_margin = 0.0;  // gamma(OT - DROT) - [phi(f*_reg) + varphi(g*_reg)]
  double part1_upper_margin = 0.0;  // [phi(f*) + varphi(g*)] - gamma(OT - DROT)
  double part2_margin = 0.0;
  double part3_margin = 0.0;
  bool pass = false;
};

/// Both solutions must refer to the same cost matrix; with an entropic
/// regularizer, solve the exact problem on the shifted cost.
Prop2Report check_prop2_bounds(const ProblemInstance& problem, const SolverConfig& config,
                               const ExactOTResult& exact, const SolveResult& drot);

/// Least-squares slope of log(error) against log(gamma).
double rate_fit(const std::vector<double>& gammas, const std::vector<double>& errors);

/// True iff every entry of the regularized plan above tol sits on an
/// exact-plan entry above tol.
bool support_containment(const TransportPlan& drot_plan, const TransportPlan& exact_plan,
                         double tol);

}  // namespace drot
