#include "drot/exact_ot.hpp"

#include "drot/pnf_solver.hpp"
#include "drot/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

namespace drot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReducedCostTol = 1e-12;

struct BasicArc {
  Index i;  // row
  Index j;  // col
  double flow;
};

// Spanning-tree basis over the bipartite graph: nodes 0..m-1 are rows,
// m..m+n-1 are columns.
struct Basis {
  Index m;
  Index n;
  std::vector<BasicArc> arcs;                // exactly m + n - 1
  std::vector<std::vector<int>> adjacency;   // node -> arc ids
  std::vector<char> is_basic;                // m*n cells

  explicit Basis(Index m_, Index n_)
      : m(m_), n(n_), adjacency(m_ + n_), is_basic(m_ * n_, 0) {}

  void add_arc(Index i, Index j, double flow) {
    const int id = static_cast<int>(arcs.size());
    arcs.push_back({i, j, flow});
    adjacency[i].push_back(id);
    adjacency[m + j].push_back(id);
    is_basic[i * n + j] = 1;
  }

  void replace_arc(int id, Index i, Index j, double flow) {
    const BasicArc old = arcs[id];
    auto drop = [&](Index node) {
      auto& list = adjacency[node];
      list.erase(std::find(list.begin(), list.end(), id));
    };
    drop(old.i);
    drop(m + old.j);
    is_basic[old.i * n + old.j] = 0;
    arcs[id] = {i, j, flow};
    adjacency[i].push_back(id);
    adjacency[m + j].push_back(id);
    is_basic[i * n + j] = 1;
  }
};

// Northwest-corner rule: a deterministic basic feasible start with exactly
// m + n - 1 arcs (degenerate zero-flow arcs included on ties).
Basis northwest_corner(const Measure& a, const Measure& b) {
  const Index m = a.size();
  const Index n = b.size();
  Basis basis(m, n);
  Index i = 0;
  Index j = 0;
  double ra = a[0];
  double cb = b[0];
  while (true) {
    const double t = std::min(ra, cb);
    basis.add_arc(i, j, t);
    ra -= t;
    cb -= t;
    if (i == m - 1 && j == n - 1) break;
    if ((ra <= cb && i < m - 1) || j == n - 1) {
      ++i;
      ra = a[i];
    } else {
      ++j;
      cb = b[j];
    }
  }
  return basis;
}

// Tree potentials with u[row 0] = 0: u_i + v_j = C_ij on every basic arc.
void compute_potentials(const Basis& basis, const CostMatrix& cost, Vector& u, Vector& v) {
  const Index m = basis.m;
  std::vector<char> seen(basis.m + basis.n, 0);
  std::deque<Index> queue;
  u[0] = 0.0;
  seen[0] = 1;
  queue.push_back(0);
  while (!queue.empty()) {
    const Index node = queue.front();
    queue.pop_front();
    for (const int id : basis.adjacency[node]) {
      const BasicArc& arc = basis.arcs[id];
      const Index other = node < m ? m + arc.j : arc.i;
      if (seen[other]) continue;
      if (node < m) {
        v[arc.j] = cost(arc.i, arc.j) - u[arc.i];
      } else {
        u[arc.i] = cost(arc.i, arc.j) - v[arc.j];
      }
      seen[other] = 1;
      queue.push_back(other);
    }
  }
}

// Arc ids on the unique tree path from `from` to `to`.
std::vector<int> tree_path(const Basis& basis, Index from, Index to) {
  const Index nodes = basis.m + basis.n;
  std::vector<int> parent_arc(nodes, -1);
  std::vector<Index> parent_node(nodes, -1);
  std::vector<char> seen(nodes, 0);
  std::deque<Index> queue;
  seen[from] = 1;
  queue.push_back(from);
  while (!queue.empty()) {
    const Index node = queue.front();
    queue.pop_front();
    if (node == to) break;
    for (const int id : basis.adjacency[node]) {
      const BasicArc& arc = basis.arcs[id];
      const Index other = node < basis.m ? basis.m + arc.j : arc.i;
      if (seen[other]) continue;
      seen[other] = 1;
      parent_arc[other] = id;
      parent_node[other] = node;
      queue.push_back(other);
    }
  }
  std::vector<int> path;
  for (Index node = to; node != from; node = parent_node[node]) {
    path.push_back(parent_arc[node]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

ExactOTResult solve_exact_ot(const ProblemInstance& problem) {
  const Index m = problem.a.size();
  const Index n = problem.b.size();
  const CostMatrix& cost = problem.cost;
  if (std::abs(problem.a.total() - problem.b.total()) > 1e-12) {
    throw InvalidProblem("exact OT needs equal total masses (got " +
                         std::to_string(problem.a.total()) + " vs " +
                         std::to_string(problem.b.total()) + ")");
  }

  Basis basis = northwest_corner(problem.a, problem.b);
  Vector u(m);
  Vector v(n);

  // Bland's rule on both ends keeps the degenerate pivots from cycling:
  // entering is the first improving cell in row-major order, leaving the
  // smallest-index arc among the minimum-ratio candidates.
  const long pivot_limit = 1000 + 50 * static_cast<long>(m) * static_cast<long>(n);
  for (long pivot = 0;; ++pivot) {
    if (pivot > pivot_limit) {
      throw SolverError("network simplex exceeded its pivot budget");
    }
    compute_potentials(basis, cost, u, v);

    Index enter_i = -1;
    Index enter_j = -1;
    for (Index i = 0; i < m && enter_i < 0; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (basis.is_basic[i * n + j]) continue;
        if (cost(i, j) - u[i] - v[j] < -kReducedCostTol) {
          enter_i = i;
          enter_j = j;
          break;
        }
      }
    }
    if (enter_i < 0) break;  // optimal

    const std::vector<int> path = tree_path(basis, enter_i, basis.m + enter_j);
    // Walking the cycle from the entering row, odd path positions lose flow.
    double step = kInf;
    int leaving = -1;
    unsigned long long leaving_key = 0;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const BasicArc& arc = basis.arcs[path[k]];
      const unsigned long long key =
          static_cast<unsigned long long>(arc.i) * n + static_cast<unsigned long long>(arc.j);
      if (arc.flow < step || (arc.flow == step && key < leaving_key)) {
        step = arc.flow;
        leaving = path[k];
        leaving_key = key;
      }
    }

    for (std::size_t k = 0; k < path.size(); ++k) {
      BasicArc& arc = basis.arcs[path[k]];
      arc.flow += (k % 2 == 0) ? -step : step;
      if (arc.flow < 0.0) arc.flow = 0.0;  // rounding guard on the min-ratio arc
    }
    basis.replace_arc(leaving, enter_i, enter_j, step);
  }

  compute_potentials(basis, cost, u, v);

  ExactOTResult result;
  std::vector<TransportPlan::Entry> entries;
  double total_cost = 0.0;
  for (const BasicArc& arc : basis.arcs) {
    if (arc.flow > 0.0) {
      entries.push_back({arc.i, arc.j, arc.flow});
      total_cost += arc.flow * cost(arc.i, arc.j);
    }
  }
  result.plan = TransportPlan::from_triplets(m, n, std::move(entries));
  result.cost = total_cost;
  result.dual_f = u;
  result.dual_g = v;
  return result;
}

namespace {

struct DenseObjective {
  const ProblemInstance& problem;
  const SolverConfig& config;
  const CostMatrix cost;

  bool in_conjugate_domain(Regularizer kind, const Vector& x) const {
    if (kind != Regularizer::exponential) return true;
    // Positive co-finite side: the dual lives on a - P1 > 0.
    return (x.array() > 0.0).all();
  }

  double operator()(const Matrix& plan, Vector& xa, Vector& xb) const {
    xa = config.gamma * (problem.a.weights() - plan.rowwise().sum());
    xb = config.gamma * (problem.b.weights() - plan.colwise().sum().transpose());
    if (!in_conjugate_domain(config.phi, xa) || !in_conjugate_domain(config.varphi, xb)) {
      return kInf;
    }
    double total = (cost.entries().array() * plan.array()).sum();
    total += conjugate(config.phi, xa) / config.gamma;
    total += conjugate(config.varphi, xb) / config.gamma;
    return total;
  }
};

}  // namespace

SolveResult solve_drot_dense_oracle(const ProblemInstance& problem, const SolverConfig& config,
                                    long step_budget) {
  validate_config(problem, config);
  const Index m = problem.a.size();
  const Index n = problem.b.size();
  const DenseObjective objective{problem, config, effective_cost(problem, config)};

  Matrix plan = Matrix::Zero(m, n);
  Vector xa, xb;
  double current = objective(plan, xa, xb);

  double step = 1.0 / (config.gamma * static_cast<double>(m + n));
  double gradient_map = kInf;
  long iterations = 0;
  bool converged = false;

  Matrix gradient(m, n);
  Matrix candidate(m, n);
  Vector xa_next, xb_next;

  for (; iterations < step_budget; ++iterations) {
    const Vector fr = grad_inverse(config.phi, xa);
    const Vector fc = grad_inverse(config.varphi, xb);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) {
        gradient(i, j) = objective.cost(i, j) - fr[i] - fc[j];
      }
    }

    // Backtracking proximal-gradient step; steps that leave the conjugate
    // domain evaluate to +inf and are rejected.
    double s = step;
    double next_value = kInf;
    while (true) {
      candidate = (plan - s * gradient).cwiseMax(0.0);
      next_value = objective(candidate, xa_next, xb_next);
      const Matrix delta = candidate - plan;
      const double model = current + (gradient.array() * delta.array()).sum() +
                           delta.squaredNorm() / (2.0 * s);
      if (next_value <= model) break;
      s *= 0.5;
      if (s < 1e-18) break;
    }
    if (s < 1e-18) break;  // no acceptable step remains

    gradient_map = (plan - candidate).cwiseAbs().maxCoeff() / s;
    plan = candidate;
    std::swap(xa, xa_next);
    std::swap(xb, xb_next);
    current = next_value;

    if (gradient_map <= 1e-10) {
      converged = true;
      ++iterations;
      break;
    }
    step = 2.0 * s;  // let the step regrow; backtracking shrinks it again
  }

  SolveResult result;
  result.potentials.f = grad_inverse(config.phi, xa);
  result.potentials.g = grad_inverse(config.varphi, xb);
  if (config.phi == Regularizer::entropy) result.potentials.c1 = Vector::Zero(m);
  if (config.varphi == Regularizer::entropy) result.potentials.c2 = Vector::Zero(n);

  std::vector<TransportPlan::Entry> entries;
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (plan(i, j) > 0.0) entries.push_back({i, j, plan(i, j)});
    }
  }
  result.plan = TransportPlan::from_triplets(m, n, std::move(entries));
  result.dual_objective = current;
  result.primal_objective =
      result.potentials.f.dot(problem.a.weights()) + result.potentials.g.dot(problem.b.weights()) -
      (value(config.phi, result.potentials.f) + value(config.varphi, result.potentials.g)) /
          config.gamma;
  result.feasibility_error =
      feasibility_error(result.potentials, objective.cost, config.gamma);
  result.sweeps = iterations;
  result.converged = converged;
  return result;
}

}  // namespace drot
