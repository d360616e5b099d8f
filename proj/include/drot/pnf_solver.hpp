#pragma once

#include "drot/core.hpp"

#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace drot {

/// Raised when a solve cannot continue (no real projection multiplier for the
/// exponential pairing); carries the offending constraint and gamma.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-sweep observability of the solve loop. Emitted before the sweep's
/// projections are applied.
struct SweepStats {
  long sweep = 0;
  long violations_found = 0;
  double max_violation = 0.0;  // max f_i + g_j - C_ij over all cells, any sign
  double feasibility_error = 0.0;
  long active_count = 0;
  double primal_objective = 0.0;
};

using SweepObserver = std::function<void(const SweepStats&)>;

/// The solver's working set: plan entries in stable insertion order with
/// constant-time lookup. Entries whose value reaches zero are forgotten.
class ActiveSet {
 public:
  ActiveSet(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  double value_of(Index i, Index j) const;
  void set(Index i, Index j, double value);

  long live_count() const { return live_; }
  /// Insertion-order view; zero-valued tombstones persist until compact().
  const std::vector<TransportPlan::Entry>& entries() const { return entries_; }
  void compact();

  TransportPlan to_plan() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<TransportPlan::Entry> entries_;
  std::unordered_map<unsigned long long, std::size_t> index_;
  long live_ = 0;
};

/// Empty plan and the unconstrained dual optimum: grad(phi)(f0) = gamma a and
/// grad(varphi)(g0) = gamma b.
std::pair<DualPotentials, TransportPlan> initialize(const ProblemInstance& problem,
                                                    const SolverConfig& config);

/// All (i, j) with f_i + g_j - C_ij > tol, in row-major order. Read-only; the
/// scan is partitioned across workers when DROT_THREADS > 1 and results are
/// merged in order.
std::vector<std::pair<Index, Index>> oracle_scan(const ProblemInstance& problem,
                                                 const DualPotentials& potentials, double tol);

/// One Bregman projection with dual correction on constraint (i, j):
/// c = min(P_ij, theta), P_ij -= c, and both potentials take the step c.
void project_constraint(DualPotentials& potentials, ActiveSet& plan, Index i, Index j,
                        double c_ij, const SolverConfig& config);

/// max over (i, j) of (f_i + g_j - C_ij) / (2 gamma), clamped below at zero.
double feasibility_error(const DualPotentials& potentials, const CostMatrix& cost, double gamma);

/// Cyclic Project-and-Forget: sweeps of {scan for violations; project new
/// violations row-major; re-project the retained active set in insertion
/// order; forget zeros} until the feasibility error and the per-sweep
/// potential change both drop below feasibility_tol, or max_sweeps runs out
/// (returned with converged = false).
SolveResult solve(const ProblemInstance& problem, const SolverConfig& config,
                  const SweepObserver& observer = {});

}  // namespace drot
