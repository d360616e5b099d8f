#include "drot/pnf_solver.hpp"

#include "drot/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

namespace drot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

unsigned long long cell_key(Index i, Index j, Index cols) {
  return static_cast<unsigned long long>(i) * static_cast<unsigned long long>(cols) +
         static_cast<unsigned long long>(j);
}

int worker_count(Index rows) {
  const char* env = std::getenv("DROT_THREADS");
  long requested = 1;
  if (env != nullptr) {
    requested = std::strtol(env, nullptr, 10);
    if (requested < 1) requested = 1;
    if (requested > 256) requested = 256;
  }
  return static_cast<int>(std::min<long>(requested, std::max<Index>(rows, 1)));
}

struct ScanResult {
  std::vector<std::pair<Index, Index>> violated;
  double max_gap = -kInf;  // max f_i + g_j - C_ij over all cells
};

// Row pass: max_j (f_i + g_j - C_ij) = f_i + max_j (g_j - C_ij) vectorizes,
// and only rows whose maximum clears the threshold are rescanned per cell.
void scan_rows(const Matrix& cost, const Vector& fv, const Vector& gv, double tol, Index lo,
               Index hi, ScanResult& out) {
  const Index n = cost.cols();
  for (Index i = lo; i < hi; ++i) {
    const double row_gap = fv[i] + (gv.transpose() - cost.row(i)).maxCoeff();
    if (row_gap > out.max_gap || std::isnan(row_gap)) out.max_gap = row_gap;
    if (row_gap > tol) {
      const double fi = fv[i];
      for (Index j = 0; j < n; ++j) {
        if (fi + (gv[j] - cost(i, j)) > tol) out.violated.emplace_back(i, j);
      }
    }
  }
}

ScanResult scan_cells(const Matrix& cost, const Vector& fv, const Vector& gv, double tol) {
  const Index m = cost.rows();
  const int workers = worker_count(m);

  if (workers <= 1) {
    ScanResult out;
    scan_rows(cost, fv, gv, tol, 0, m, out);
    return out;
  }

  std::vector<ScanResult> parts(workers);
  std::vector<std::thread> threads;
  const Index chunk = (m + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      scan_rows(cost, fv, gv, tol, w * chunk, std::min(m, (w + 1) * chunk), parts[w]);
    });
  }
  for (auto& t : threads) t.join();

  ScanResult out;
  for (ScanResult& part : parts) {
    if (part.max_gap > out.max_gap || std::isnan(part.max_gap)) out.max_gap = part.max_gap;
    out.violated.insert(out.violated.end(), part.violated.begin(), part.violated.end());
  }
  return out;
}

// Solver state in raw encoding (see regularizers.hpp): exact additive
// bookkeeping in gradient space, overflow-free entropy potentials.
struct SolverState {
  Regularizer phi;
  Regularizer varphi;
  double gamma;
  Vector raw_f;
  Vector raw_g;

  Vector f_values() const {
    Vector out(raw_f.size());
    for (Index i = 0; i < raw_f.size(); ++i) out[i] = detail::value_from_raw(phi, raw_f[i]);
    return out;
  }
  Vector g_values() const {
    Vector out(raw_g.size());
    for (Index j = 0; j < raw_g.size(); ++j) out[j] = detail::value_from_raw(varphi, raw_g[j]);
    return out;
  }
};

SolverState make_initial_state(const ProblemInstance& problem, const SolverConfig& config) {
  SolverState state;
  state.phi = config.phi;
  state.varphi = config.varphi;
  state.gamma = config.gamma;

  const auto initial_raw = [&](Regularizer kind, double weight, const char* side, Index atom) {
    // Unconstrained optimum grad(phi)(v) = gamma * weight in raw encoding:
    // quadratic raw = f = gamma w / 2, exponential raw = e^f = gamma w,
    // entropy raw = log f = gamma w.
    double raw = 0.0;
    switch (kind) {
      case Regularizer::quadratic: raw = config.gamma * weight / 2.0; break;
      case Regularizer::exponential: raw = config.gamma * weight; break;
      case Regularizer::entropy: raw = config.gamma * weight; break;
    }
    if (!std::isfinite(raw) || (kind == Regularizer::exponential && !(raw > 0.0))) {
      throw DomainError("initialization of " + std::string(side) + "[" + std::to_string(atom) +
                        "]: gamma * weight is outside the inverse-gradient domain");
    }
    return raw;
  };

  state.raw_f.resize(problem.a.size());
  for (Index i = 0; i < problem.a.size(); ++i) {
    state.raw_f[i] = initial_raw(config.phi, problem.a[i], "a", i);
  }
  state.raw_g.resize(problem.b.size());
  for (Index j = 0; j < problem.b.size(); ++j) {
    state.raw_g[j] = initial_raw(config.varphi, problem.b[j], "b", j);
  }
  return state;
}

DualPotentials export_potentials(const SolverState& state) {
  DualPotentials out;
  out.f = state.f_values();
  out.g = state.g_values();
  // The nonnegativity multipliers exist only for entropic sides. The solver's
  // multiplicative entropy updates keep the potentials strictly positive, so
  // those constraints never activate and the multipliers stay at zero.
  if (state.phi == Regularizer::entropy) out.c1 = Vector::Zero(state.raw_f.size());
  if (state.varphi == Regularizer::entropy) out.c2 = Vector::Zero(state.raw_g.size());
  return out;
}

double primal_objective(const SolverState& state, const Measure& a, const Measure& b) {
  const auto side = [&](Regularizer kind, const Vector& raw, const Measure& w) {
    // <f, w> - phi(f)/gamma, evaluated from the raw encoding.
    double inner = 0.0;
    double reg = 0.0;
    for (Index i = 0; i < raw.size(); ++i) {
      switch (kind) {
        case Regularizer::quadratic:
          inner += raw[i] * w[i];
          reg += raw[i] * raw[i];
          break;
        case Regularizer::exponential:
          inner += std::log(raw[i]) * w[i];
          reg += raw[i];
          break;
        case Regularizer::entropy: {
          const double f = std::exp(raw[i]);
          inner += f * w[i];
          reg += f * (raw[i] - 1.0);
          break;
        }
      }
    }
    return inner - reg / state.gamma;
  };
  return side(state.phi, state.raw_f, a) + side(state.varphi, state.raw_g, b);
}

double conjugate_penalty(Regularizer kind, const Vector& deviation, double gamma) {
  // phi*(gamma deviation) / gamma. The exponential conjugate requires
  // nonnegative arguments; marginal deviations computed by re-summing the
  // sparse plan can undershoot zero by rounding, so tiny negatives are
  // evaluated at zero.
  double total = 0.0;
  for (Index i = 0; i < deviation.size(); ++i) {
    double x = gamma * deviation[i];
    if (kind == Regularizer::exponential && x < 0.0 && x > -1e-9 * std::max(1.0, gamma)) {
      x = 0.0;
    }
    total += conjugate_at(kind, x);
  }
  return total / gamma;
}

double dual_objective(const SolverState& state, const ProblemInstance& problem,
                      const CostMatrix& cost, const TransportPlan& plan) {
  const Vector dev_a = problem.a.weights() - plan.row_sums();
  const Vector dev_b = problem.b.weights() - plan.col_sums();
  return plan.dot(cost) + conjugate_penalty(state.phi, dev_a, state.gamma) +
         conjugate_penalty(state.varphi, dev_b, state.gamma);
}

// One projection with dual correction. Accumulates the largest potential
// movement (value domain) into max_change.
void project_cell(SolverState& state, ActiveSet& active, Index i, Index j, double c_ij,
                  double& max_change) {
  detail::PairProjection proj;
  try {
    proj = detail::project_pair_raw(state.phi, state.varphi, state.raw_f[i], state.raw_g[j],
                                    c_ij, state.gamma);
  } catch (const ThetaError& err) {
    throw SolverError("projection failed at constraint (" + std::to_string(i) + "," +
                      std::to_string(j) + ") with gamma=" + std::to_string(state.gamma) + ": " +
                      err.what());
  }
  const double p = active.value_of(i, j);
  const double c = std::min(p, proj.theta);
  const double f_before = detail::value_from_raw(state.phi, state.raw_f[i]);
  const double g_before = detail::value_from_raw(state.varphi, state.raw_g[j]);
  if (c == proj.theta && proj.full_step_ok) {
    state.raw_f[i] = proj.raw_f;
    state.raw_g[j] = proj.raw_g;
  } else {
    state.raw_f[i] = detail::step_raw(state.phi, state.raw_f[i], state.gamma, c);
    state.raw_g[j] = detail::step_raw(state.varphi, state.raw_g[j], state.gamma, c);
  }
  const double f_moved = std::abs(detail::value_from_raw(state.phi, state.raw_f[i]) - f_before);
  const double g_moved =
      std::abs(detail::value_from_raw(state.varphi, state.raw_g[j]) - g_before);
  double moved = std::max(f_moved, g_moved);
  if (std::isnan(moved)) moved = kInf;
  max_change = std::max(max_change, moved);
  active.set(i, j, p - c);
}

// The entropic sides carry f >= 0, g >= 0 as extra constraints. The raw
// encoding makes their violation impossible (potentials are exponentials), so
// this pass only audits the invariant; the associated multipliers stay zero.
void audit_entropy_nonnegativity(const SolverState& state) {
  if (state.phi == Regularizer::entropy) {
    for (Index i = 0; i < state.raw_f.size(); ++i) {
      if (std::isnan(state.raw_f[i])) {
        throw SolverError("entropy potential f[" + std::to_string(i) + "] became invalid");
      }
    }
  }
  if (state.varphi == Regularizer::entropy) {
    for (Index j = 0; j < state.raw_g.size(); ++j) {
      if (std::isnan(state.raw_g[j])) {
        throw SolverError("entropy potential g[" + std::to_string(j) + "] became invalid");
      }
    }
  }
}

}  // namespace

double ActiveSet::value_of(Index i, Index j) const {
  const auto it = index_.find(cell_key(i, j, cols_));
  return it == index_.end() ? 0.0 : entries_[it->second].value;
}

void ActiveSet::set(Index i, Index j, double value) {
  const unsigned long long key = cell_key(i, j, cols_);
  const auto it = index_.find(key);
  if (it == index_.end()) {
    if (value == 0.0) return;
    index_.emplace(key, entries_.size());
    entries_.push_back({i, j, value});
    ++live_;
    return;
  }
  TransportPlan::Entry& entry = entries_[it->second];
  if (entry.value == 0.0 && value != 0.0) ++live_;
  if (entry.value != 0.0 && value == 0.0) --live_;
  entry.value = value;
}

void ActiveSet::compact() {
  if (live_ == static_cast<long>(entries_.size())) return;
  std::vector<TransportPlan::Entry> kept;
  kept.reserve(live_);
  for (const TransportPlan::Entry& e : entries_) {
    if (e.value != 0.0) kept.push_back(e);
  }
  entries_ = std::move(kept);
  index_.clear();
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    index_.emplace(cell_key(entries_[k].i, entries_[k].j, cols_), k);
  }
}

TransportPlan ActiveSet::to_plan() const {
  std::vector<TransportPlan::Entry> kept;
  kept.reserve(live_);
  for (const TransportPlan::Entry& e : entries_) {
    if (e.value != 0.0) kept.push_back(e);
  }
  return TransportPlan::from_triplets(rows_, cols_, std::move(kept));
}

std::pair<DualPotentials, TransportPlan> initialize(const ProblemInstance& problem,
                                                    const SolverConfig& config) {
  validate_config(problem, config);
  const SolverState state = make_initial_state(problem, config);
  return {export_potentials(state), TransportPlan(problem.a.size(), problem.b.size())};
}

std::vector<std::pair<Index, Index>> oracle_scan(const ProblemInstance& problem,
                                                 const DualPotentials& potentials, double tol) {
  return scan_cells(problem.cost.entries(), potentials.f, potentials.g, tol).violated;
}

void project_constraint(DualPotentials& potentials, ActiveSet& plan, Index i, Index j,
                        double c_ij, const SolverConfig& config) {
  if (i < 0 || i >= plan.rows() || j < 0 || j >= plan.cols()) {
    throw InvalidProblem("constraint index out of range");
  }
  SolverState state;
  state.phi = config.phi;
  state.varphi = config.varphi;
  state.gamma = config.gamma;
  state.raw_f = Vector::Constant(1, detail::raw_from_value(config.phi, potentials.f[i]));
  state.raw_g = Vector::Constant(1, detail::raw_from_value(config.varphi, potentials.g[j]));

  ActiveSet single(1, 1);
  single.set(0, 0, plan.value_of(i, j));
  double moved = 0.0;
  project_cell(state, single, 0, 0, c_ij, moved);

  potentials.f[i] = detail::value_from_raw(config.phi, state.raw_f[0]);
  potentials.g[j] = detail::value_from_raw(config.varphi, state.raw_g[0]);
  plan.set(i, j, single.value_of(0, 0));
}

double feasibility_error(const DualPotentials& potentials, const CostMatrix& cost,
                         double gamma) {
  // Associates as f_i + (g_j - C_ij), bit-identical with the solver's scan.
  double worst = 0.0;
  for (Index i = 0; i < cost.rows(); ++i) {
    for (Index j = 0; j < cost.cols(); ++j) {
      worst = std::max(worst, potentials.f[i] + (potentials.g[j] - cost(i, j)));
    }
  }
  return std::max(worst, 0.0) / (2.0 * gamma);
}

SolveResult solve(const ProblemInstance& problem, const SolverConfig& config,
                  const SweepObserver& observer) {
  validate_config(problem, config);
  const CostMatrix cost = effective_cost(problem, config);
  const double tol = config.feasibility_tol;
  // Violations below the stopping scale are left to later sweeps; the
  // threshold stays a factor 10 under the stopping tolerance so convergence
  // is unaffected (2 gamma tol is the raw-violation stopping scale).
  const double violation_tol = std::min(tol, 2.0 * config.gamma * tol) / 10.0;

  SolverState state = make_initial_state(problem, config);
  ActiveSet active(problem.a.size(), problem.b.size());

  double last_sweep_change = kInf;
  double final_feasibility = kInf;
  long sweeps_done = 0;
  bool converged = false;

  // Degenerate active-set cycles can pin the iteration to an exactly
  // periodic float state whose internal movement never drops below the
  // tolerance. The sweep map is deterministic, so a repeated state proves
  // the iteration can make no further progress; a short snapshot ring
  // catches small periods.
  constexpr int kHistory = 6;
  struct StateSnapshot {
    Vector raw_f;
    Vector raw_g;
    std::vector<TransportPlan::Entry> entries;
    bool filled = false;
  };
  StateSnapshot history[kHistory];
  bool stationary = false;
  const auto matches = [&](const StateSnapshot& snap) {
    if (!snap.filled) return false;
    if (snap.raw_f.size() != state.raw_f.size() || snap.raw_g.size() != state.raw_g.size()) {
      return false;
    }
    return std::equal(snap.raw_f.data(), snap.raw_f.data() + snap.raw_f.size(),
                      state.raw_f.data()) &&
           std::equal(snap.raw_g.data(), snap.raw_g.data() + snap.raw_g.size(),
                      state.raw_g.data()) &&
           snap.entries == active.entries();
  };

  for (long sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    const Vector f_before = state.f_values();
    const Vector g_before = state.g_values();
    const ScanResult scan = scan_cells(cost.entries(), f_before, g_before, violation_tol);
    final_feasibility = std::max(scan.max_gap, 0.0) / (2.0 * config.gamma);

    if (observer) {
      SweepStats stats;
      stats.sweep = sweep;
      stats.violations_found = static_cast<long>(scan.violated.size());
      stats.max_violation = scan.max_gap;
      stats.feasibility_error = final_feasibility;
      stats.active_count = active.live_count();
      stats.primal_objective = primal_objective(state, problem.a, problem.b);
      observer(stats);
    }

    if (final_feasibility <= tol && last_sweep_change <= tol) {
      converged = true;
      break;
    }
    // Gradient-space stationarity is exact by construction and P >= 0
    // always, so feasibility plus in-tolerance complementary slackness and
    // duality gap certify an epsilon-KKT point even while degenerate drains
    // keep the duals moving. At the default tolerance the thresholds equal
    // the quality every converged run promises.
    if (config.stop_on_kkt_certificate && final_feasibility <= tol && sweeps_done > 0) {
      double worst_slackness = 0.0;
      double gap = 0.0;
      for (const TransportPlan::Entry& e : active.entries()) {
        if (e.value == 0.0) continue;
        const double term = e.value * (f_before[e.i] + g_before[e.j] - cost(e.i, e.j));
        worst_slackness = std::max(worst_slackness, std::abs(term));
        gap += term;
      }
      const double primal = primal_objective(state, problem.a, problem.b);
      if (worst_slackness <= 100.0 * tol &&
          std::abs(gap) <= 50.0 * tol * (1.0 + std::abs(primal))) {
        converged = true;
        break;
      }
    }
    if (stationary) {
      // The sweep map is deterministic, so a bit-identical state can never
      // improve; report the stall rather than spinning to max_sweeps.
      break;
    }

    double sweep_change = 0.0;
    for (const auto& [i, j] : scan.violated) {
      project_cell(state, active, i, j, cost(i, j), sweep_change);
    }
    const std::size_t current = active.entries().size();
    for (std::size_t k = 0; k < current; ++k) {
      const TransportPlan::Entry entry = active.entries()[k];
      if (entry.value == 0.0) continue;
      project_cell(state, active, entry.i, entry.j, cost(entry.i, entry.j), sweep_change);
    }
    audit_entropy_nonnegativity(state);
    active.compact();

    stationary = false;
    for (const StateSnapshot& snap : history) {
      if (matches(snap)) {
        stationary = true;
        break;
      }
    }
    StateSnapshot& slot = history[sweep % kHistory];
    slot.raw_f = state.raw_f;
    slot.raw_g = state.raw_g;
    slot.entries = active.entries();
    slot.filled = true;

    last_sweep_change = sweep_change;
    sweeps_done = sweep;
  }

  if (!converged) {
    const ScanResult scan = scan_cells(cost.entries(), state.f_values(), state.g_values(),
                                       violation_tol);
    final_feasibility = std::max(scan.max_gap, 0.0) / (2.0 * config.gamma);
  }

  SolveResult result;
  result.potentials = export_potentials(state);
  result.plan = active.to_plan();
  result.primal_objective = primal_objective(state, problem.a, problem.b);
  result.dual_objective = dual_objective(state, problem, cost, result.plan);
  result.feasibility_error = final_feasibility;
  result.sweeps = sweeps_done;
  result.converged = converged;
  return result;
}

}  // namespace drot
