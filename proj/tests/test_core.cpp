#include "drot/core.hpp"
#include "drot/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace drot;

TEST_SUITE("core") {

TEST_CASE("measure validation") {
  CHECK(Measure(Vector::Ones(3)).total() == doctest::Approx(3.0));
  CHECK_THROWS_AS(Measure(Vector::Zero(2)), InvalidProblem);
  Vector negative(2);
  negative << 0.5, -0.1;
  CHECK_THROWS_AS(Measure{negative}, InvalidProblem);
  CHECK_THROWS_AS(Measure(Vector(0)), InvalidProblem);
  // zeros are legal at the measure level, rejected only by make_problem
  Vector with_zero(2);
  with_zero << 0.5, 0.0;
  CHECK(Measure(with_zero).size() == 2);
}

TEST_CASE("cost matrix validation") {
  Matrix bad(1, 1);
  bad << -1.0;
  CHECK_THROWS_AS(CostMatrix{bad}, InvalidProblem);
  bad << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(CostMatrix{bad}, InvalidProblem);
  bad << std::nan("");
  CHECK_THROWS_AS(CostMatrix{bad}, InvalidProblem);
}

TEST_CASE("make_problem accepts the smallest legal instance") {
  const ProblemInstance p = make_problem(Measure(Vector::Ones(1)), Measure(Vector::Ones(1)),
                                         CostMatrix(Matrix::Zero(1, 1)));
  CHECK(p.cost.rows() == 1);
  CHECK(p.cost.cols() == 1);
}

TEST_CASE("make_problem rejects shape mismatches and zero atoms") {
  Vector a2(2);
  a2 << 0.5, 0.5;
  CHECK_THROWS_WITH_AS(make_problem(Measure(a2), Measure(Vector::Ones(1)),
                                    CostMatrix(Matrix::Zero(2, 2))),
                       doctest::Contains("dimension mismatch"), InvalidProblem);

  Vector with_zero(2);
  with_zero << 0.5, 0.0;
  CHECK_THROWS_WITH_AS(make_problem(Measure(with_zero), Measure(Vector::Ones(1)),
                                    CostMatrix(Matrix::Zero(2, 1))),
                       doctest::Contains("zero-weight atom"), InvalidProblem);
}

TEST_CASE("sqeuclidean examples") {
  Matrix x0(1, 1), y0(1, 1);
  x0 << 0.0;
  y0 << 0.0;
  CHECK(sqeuclidean_cost(x0, y0)(0, 0) == 0.0);

  Matrix x(2, 1), y(1, 1);
  x << 0.0, 3.0;
  y << 4.0;
  const CostMatrix c = sqeuclidean_cost(x, y);
  CHECK(c(0, 0) == 16.0);
  CHECK(c(1, 0) == 1.0);

  Matrix x2(1, 2), y2(1, 2);
  x2 << 0.0, 0.0;
  y2 << 3.0, 4.0;
  CHECK(sqeuclidean_cost(x2, y2)(0, 0) == 25.0);

  Matrix y_bad(1, 3);
  y_bad << 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(sqeuclidean_cost(x2, y_bad), InvalidProblem);
}

TEST_CASE("sqeuclidean transpose symmetry") {
  Rng rng(7);
  const Matrix x = rng.uniform_matrix(4, 3, -2.0, 2.0);
  const Matrix y = rng.uniform_matrix(5, 3, -2.0, 2.0);
  const CostMatrix xy = sqeuclidean_cost(x, y);
  const CostMatrix yx = sqeuclidean_cost(y, x);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 5; ++j) {
      CHECK(xy(i, j) == yx(j, i));
    }
  }
}

TEST_CASE("gaussian_instance two symmetric points") {
  const ProblemInstance p = gaussian_instance(2, 0.0, 0.0, 1.0, -1.0, 1.0);
  CHECK(p.a[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.a[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.cost(0, 0) == 0.0);
  CHECK(p.cost(0, 1) == 4.0);
  CHECK(p.cost(1, 0) == 4.0);
}

TEST_CASE("gaussian_instance three-point weights from the density") {
  const ProblemInstance p = gaussian_instance(3, 0.0, 0.0, 1.0, -1.0, 1.0);
  // density at (-1, 0, 1) is (e^{-1/2}, 1, e^{-1/2}), renormalized
  const double tail = std::exp(-0.5);
  const double norm = 1.0 + 2.0 * tail;
  CHECK(p.a[0] == doctest::Approx(tail / norm).epsilon(1e-15));
  CHECK(p.a[1] == doctest::Approx(1.0 / norm).epsilon(1e-15));
  CHECK(p.a[2] == doctest::Approx(tail / norm).epsilon(1e-15));
  CHECK(p.a[1] > p.a[0]);
}

TEST_CASE("gaussian_instance normalization and mirror symmetry") {
  for (const std::uint64_t seed : {0ull, 1ull, 2ull}) {
    Rng rng(seed);
    const Index n = 5 + static_cast<Index>(rng.index(20));
    const double m1 = rng.uniform(-12.0, 12.0);
    const double m2 = rng.uniform(-12.0, 12.0);
    const ProblemInstance p = gaussian_instance(n, m1, m2, 10.0, -20.0, 20.0);
    CHECK(std::abs(p.a.total() - 1.0) <= 1e-12);
    CHECK(std::abs(p.b.total() - 1.0) <= 1e-12);
    // swapping the means exchanges the two sides
    const ProblemInstance q = gaussian_instance(n, m2, m1, 10.0, -20.0, 20.0);
    for (Index i = 0; i < n; ++i) {
      CHECK(p.a[i] == doctest::Approx(q.b[i]).epsilon(1e-12));
      CHECK(p.b[i] == doctest::Approx(q.a[i]).epsilon(1e-12));
    }
    // mirrored means on the symmetric grid reflect under index reversal
    const ProblemInstance mirrored = gaussian_instance(n, m1, -m1, 10.0, -20.0, 20.0);
    for (Index i = 0; i < n; ++i) {
      CHECK(mirrored.a[i] == doctest::Approx(mirrored.b[n - 1 - i]).epsilon(1e-12));
    }
  }
  CHECK(gaussian_instance(501, -15.0, 15.0, 10.0, -20.0, 20.0).a.size() == 501);
  CHECK_THROWS_AS(gaussian_instance(1, 0.0, 0.0, 1.0, -1.0, 1.0), InvalidProblem);
  CHECK_THROWS_AS(gaussian_instance(3, 0.0, 0.0, 1.0, 1.0, -1.0), InvalidProblem);
}

TEST_CASE("transport plan triplets") {
  const TransportPlan plan =
      TransportPlan::from_triplets(2, 2, {{1, 0, 0.25}, {0, 1, 0.75}});
  CHECK(plan.nnz() == 2);
  // canonical row-major order
  CHECK(plan.entries()[0].i == 0);
  CHECK(plan.value_at(1, 0) == 0.25);
  CHECK(plan.value_at(0, 0) == 0.0);
  CHECK(plan.row_sums()[0] == 0.75);
  CHECK(plan.col_sums()[0] == 0.25);
  CHECK(plan.total_mass() == 1.0);

  CHECK_THROWS_AS(TransportPlan::from_triplets(2, 2, {{0, 0, 0.0}}), InvalidProblem);
  CHECK_THROWS_AS(TransportPlan::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 1.0}}),
                  InvalidProblem);
  CHECK_THROWS_AS(TransportPlan::from_triplets(2, 2, {{2, 0, 1.0}}), InvalidProblem);
}

TEST_CASE("effective cost applies the entropy shift only when entropic") {
  const ProblemInstance p = make_problem(Measure(Vector::Ones(1)), Measure(Vector::Ones(1)),
                                         CostMatrix(Matrix::Zero(1, 1)));
  SolverConfig config;
  config.cost_shift = 0.5;
  CHECK(effective_cost(p, config)(0, 0) == 0.0);
  config.phi = Regularizer::entropy;
  CHECK(effective_cost(p, config)(0, 0) == 0.5);
}

TEST_CASE("config validation") {
  const ProblemInstance p = make_problem(Measure(Vector::Ones(1)), Measure(Vector::Ones(1)),
                                         CostMatrix(Matrix::Zero(1, 1)));
  SolverConfig config;
  config.gamma = 0.0;
  CHECK_THROWS_AS(validate_config(p, config), InvalidProblem);
  config.gamma = 1.0;
  config.phi = Regularizer::entropy;
  CHECK_THROWS_AS(validate_config(p, config), InvalidProblem);  // min C = 0 without shift
  config.cost_shift = 1e-3;
  CHECK_NOTHROW(validate_config(p, config));
}

}  // TEST_SUITE
