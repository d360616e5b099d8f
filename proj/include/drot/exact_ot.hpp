#pragma once

#include "drot/core.hpp"

namespace drot {

/// Optimal basic solution of the transportation LP together with the dual
/// potentials from the final basis (normalized by f_0 = 0).
struct ExactOTResult {
  TransportPlan plan{0, 0};
  double cost = 0.0;
  Vector dual_f;
  Vector dual_g;
};

/// Network simplex on the bipartite transportation graph. Requires equal
/// total masses (within 1e-12). Desk scale.
ExactOTResult solve_exact_ot(const ProblemInstance& problem);

/// Independent oracle for the regularized problem: projected gradient descent
/// with backtracking line search on the dense dual objective
///   <C, P> + phi*(gamma(a - P 1))/gamma + varphi*(gamma(b - P^T 1))/gamma
/// over P >= 0, run until the gradient-mapping norm drops to 1e-10 or the
/// step budget is exhausted (flagged via converged = false). Potentials are
/// recovered through f = grad(phi*)(gamma(a - P 1)).
SolveResult solve_drot_dense_oracle(const ProblemInstance& problem, const SolverConfig& config,
                                    long step_budget);

}  // namespace drot
