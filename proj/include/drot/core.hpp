#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>

namespace drot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Thrown by constructors and factory functions on invalid input data.
class InvalidProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Nonnegative weight vector over atoms. Total mass need not be 1 and the two
/// sides of a problem need not have equal mass.
class Measure {
 public:
  explicit Measure(Vector weights);

  Index size() const { return weights_.size(); }
  const Vector& weights() const { return weights_; }
  double operator[](Index i) const { return weights_[i]; }
  double total() const { return weights_.sum(); }

 private:
  Vector weights_;
};

/// Dense m-by-n matrix of nonnegative, finite costs.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix entries);

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  const Matrix& entries() const { return entries_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }
  double min() const { return entries_.minCoeff(); }
  double max() const { return entries_.maxCoeff(); }

 private:
  Matrix entries_;
};

/// Dual potentials f (per source atom) and g (per destination atom). The
/// nonnegativity multipliers c1/c2 are carried only when the corresponding
/// regularizer is entropic.
struct DualPotentials {
  Vector f;
  Vector g;
  std::optional<Vector> c1;
  std::optional<Vector> c2;
};

/// Sparse nonnegative plan stored as coordinate triplets in row-major order.
/// Zeros are never stored.
class TransportPlan {
 public:
  struct Entry {
    Index i;
    Index j;
    double value;
  };

  TransportPlan(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  /// Builds a plan from triplets; validates indices, positivity and
  /// uniqueness, and sorts entries row-major.
  static TransportPlan from_triplets(Index rows, Index cols, std::vector<Entry> entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Value at (i, j); zero when the entry is not stored.
  double value_at(Index i, Index j) const;

  Vector row_sums() const;
  Vector col_sums() const;
  double total_mass() const;
  double dot(const CostMatrix& cost) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Entry> entries_;
};

bool operator==(const TransportPlan::Entry& a, const TransportPlan::Entry& b);

/// Regularizer selection; see regularizers.hpp for the calculus.
enum class Regularizer { quadratic, entropy, exponential };

struct SolverConfig {
  double gamma = 1.0;
  Regularizer phi = Regularizer::quadratic;
  Regularizer varphi = Regularizer::quadratic;
  double feasibility_tol = 1e-8;
  long max_sweeps = 100000;
  // Additive constant on C, used only when a regularizer is entropic; required
  // positive when min(C) = 0 so that all effective costs are positive.
  double cost_shift = 0.0;
  // Also stop once the iterate carries a full KKT certificate at tolerance
  // (feasibility, complementary slackness, duality gap); degenerate
  // active-set cycles otherwise drain plan mass in O(1/gamma) steps per
  // sweep and keep the duals drifting long after the solution quality is
  // settled. Disable to run the plain dual-change stopping rule to the end.
  bool stop_on_kkt_certificate = true;
};

struct SolveResult {
  DualPotentials potentials;
  TransportPlan plan{0, 0};
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double feasibility_error = 0.0;
  long sweeps = 0;
  bool converged = false;
};

/// Validated (a, b, C) bundle. Constructed through make_problem.
struct ProblemInstance {
  Measure a;
  Measure b;
  CostMatrix cost;
};

/// Validates dimensions and weights and bundles a problem instance. Atoms
/// with zero weight are rejected: the exponential and entropic
/// initializations need strictly positive weights, and dropping atoms would
/// corrupt index correspondence.
ProblemInstance make_problem(Measure a, Measure b, CostMatrix cost);

/// C_ij = squared Euclidean distance between x_i and y_j. Points are rows.
CostMatrix sqeuclidean_cost(const Matrix& x, const Matrix& y);

/// Two discrete measures obtained by sampling Gaussian densities (means
/// mean1/mean2, common variance) at n equidistant points on [lo, hi], each
/// renormalized to total mass 1; cost is squared Euclidean distance between
/// grid points.
ProblemInstance gaussian_instance(Index n, double mean1, double mean2, double variance,
                                  double lo, double hi);

/// Cost matrix actually used by a solve: C plus cost_shift when a regularizer
/// is entropic. Throws when an entropic run would see a nonpositive cost.
CostMatrix effective_cost(const ProblemInstance& problem, const SolverConfig& config);

/// Validates gamma/tolerance/sweep bounds and the entropy cost-shift rule.
void validate_config(const ProblemInstance& problem, const SolverConfig& config);

}  // namespace drot
