#include "drot/core.hpp"

#include <algorithm>
#include <cmath>

namespace drot {

Measure::Measure(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1) {
    throw InvalidProblem("measure must have at least one atom");
  }
  bool any_positive = false;
  for (Index i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w)) {
      throw InvalidProblem("measure weight " + std::to_string(i) + " is not finite");
    }
    if (w < 0.0) {
      throw InvalidProblem("negative weight at atom " + std::to_string(i));
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) {
    throw InvalidProblem("measure has no positive weight");
  }
}

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw InvalidProblem("cost matrix must be at least 1x1");
  }
  for (Index i = 0; i < entries_.rows(); ++i) {
    for (Index j = 0; j < entries_.cols(); ++j) {
      const double c = entries_(i, j);
      if (!std::isfinite(c)) {
        throw InvalidProblem("non-finite cost at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
      }
      if (c < 0.0) {
        throw InvalidProblem("negative cost at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
      }
    }
  }
}

bool operator==(const TransportPlan::Entry& a, const TransportPlan::Entry& b) {
  return a.i == b.i && a.j == b.j && a.value == b.value;
}

TransportPlan TransportPlan::from_triplets(Index rows, Index cols, std::vector<Entry> entries) {
  TransportPlan plan(rows, cols);
  for (const Entry& e : entries) {
    if (e.i < 0 || e.i >= rows || e.j < 0 || e.j >= cols) {
      throw InvalidProblem("plan entry out of range: (" + std::to_string(e.i) + "," +
                           std::to_string(e.j) + ")");
    }
    if (!(e.value > 0.0) || !std::isfinite(e.value)) {
      throw InvalidProblem("plan entries must be positive and finite");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k - 1].i == entries[k].i && entries[k - 1].j == entries[k].j) {
      throw InvalidProblem("duplicate plan entry at (" + std::to_string(entries[k].i) + "," +
                           std::to_string(entries[k].j) + ")");
    }
  }
  plan.entries_ = std::move(entries);
  return plan;
}

double TransportPlan::value_at(Index i, Index j) const {
  const Entry probe{i, j, 0.0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                             [](const Entry& a, const Entry& b) {
                               return a.i != b.i ? a.i < b.i : a.j < b.j;
                             });
  if (it != entries_.end() && it->i == i && it->j == j) {
    return it->value;
  }
  return 0.0;
}

Vector TransportPlan::row_sums() const {
  Vector sums = Vector::Zero(rows_);
  for (const Entry& e : entries_) sums[e.i] += e.value;
  return sums;
}

Vector TransportPlan::col_sums() const {
  Vector sums = Vector::Zero(cols_);
  for (const Entry& e : entries_) sums[e.j] += e.value;
  return sums;
}

double TransportPlan::total_mass() const {
  double total = 0.0;
  for (const Entry& e : entries_) total += e.value;
  return total;
}

double TransportPlan::dot(const CostMatrix& cost) const {
  if (cost.rows() != rows_ || cost.cols() != cols_) {
    throw InvalidProblem("plan/cost shape mismatch");
  }
  double total = 0.0;
  for (const Entry& e : entries_) total += e.value * cost(e.i, e.j);
  return total;
}

ProblemInstance make_problem(Measure a, Measure b, CostMatrix cost) {
  if (cost.rows() != a.size() || cost.cols() != b.size()) {
    throw InvalidProblem("dimension mismatch: cost is " + std::to_string(cost.rows()) + "x" +
                         std::to_string(cost.cols()) + ", measures have " +
                         std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                         " atoms");
  }
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) throw InvalidProblem("zero-weight atom a[" + std::to_string(i) + "]");
  }
  for (Index j = 0; j < b.size(); ++j) {
    if (b[j] == 0.0) throw InvalidProblem("zero-weight atom b[" + std::to_string(j) + "]");
  }
  return ProblemInstance{std::move(a), std::move(b), std::move(cost)};
}

CostMatrix sqeuclidean_cost(const Matrix& x, const Matrix& y) {
  if (x.rows() < 1 || y.rows() < 1) {
    throw InvalidProblem("point lists must be nonempty");
  }
  if (x.cols() != y.cols()) {
    throw InvalidProblem("mixed point dimensions: " + std::to_string(x.cols()) + " vs " +
                         std::to_string(y.cols()));
  }
  Matrix cost(x.rows(), y.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < y.rows(); ++j) {
      cost(i, j) = (x.row(i) - y.row(j)).squaredNorm();
    }
  }
  return CostMatrix(std::move(cost));
}

ProblemInstance gaussian_instance(Index n, double mean1, double mean2, double variance,
                                  double lo, double hi) {
  if (n < 2 || !(lo < hi) || !(variance > 0.0)) {
    throw InvalidProblem("invalid grid: need n >= 2, lo < hi, variance > 0");
  }
  Matrix points(n, 1);
  for (Index k = 0; k < n; ++k) {
    points(k, 0) = lo + static_cast<double>(k) * (hi - lo) / static_cast<double>(n - 1);
  }
  Vector wa(n), wb(n);
  for (Index k = 0; k < n; ++k) {
    const double x = points(k, 0);
    wa[k] = std::exp(-(x - mean1) * (x - mean1) / (2.0 * variance));
    wb[k] = std::exp(-(x - mean2) * (x - mean2) / (2.0 * variance));
  }
  wa /= wa.sum();
  wb /= wb.sum();
  return make_problem(Measure(std::move(wa)), Measure(std::move(wb)),
                      sqeuclidean_cost(points, points));
}

CostMatrix effective_cost(const ProblemInstance& problem, const SolverConfig& config) {
  const bool entropic =
      config.phi == Regularizer::entropy || config.varphi == Regularizer::entropy;
  if (!entropic || config.cost_shift == 0.0) {
    return problem.cost;
  }
  Matrix shifted = problem.cost.entries().array() + config.cost_shift;
  return CostMatrix(std::move(shifted));
}

void validate_config(const ProblemInstance& problem, const SolverConfig& config) {
  if (!(config.gamma > 0.0) || !std::isfinite(config.gamma)) {
    throw InvalidProblem("gamma must be positive and finite");
  }
  if (!(config.feasibility_tol > 0.0)) {
    throw InvalidProblem("feasibility_tol must be positive");
  }
  if (config.max_sweeps < 1) {
    throw InvalidProblem("max_sweeps must be positive");
  }
  if (config.cost_shift < 0.0) {
    throw InvalidProblem("cost_shift must be nonnegative");
  }
  const bool entropic =
      config.phi == Regularizer::entropy || config.varphi == Regularizer::entropy;
  if (entropic && problem.cost.min() + config.cost_shift <= 0.0) {
    throw InvalidProblem(
        "entropic regularizer needs positive costs: set cost_shift > 0 when min(C) = 0");
  }
}

}  // namespace drot
