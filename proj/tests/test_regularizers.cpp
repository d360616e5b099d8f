#include "drot/regularizers.hpp"
#include "drot/rng.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace drot;
using testing_support::oracle_theta;

namespace {

Vector random_domain_point(Regularizer kind, Rng& rng, Index size) {
  Vector v(size);
  for (Index i = 0; i < size; ++i) {
    v[i] = kind == Regularizer::entropy ? rng.uniform(0.1, 5.0) : rng.uniform(-3.0, 3.0);
  }
  return v;
}

}  // namespace

TEST_SUITE("regularizers") {

TEST_CASE("value examples") {
  Vector v(2);
  v << 1.0, 2.0;
  CHECK(value(Regularizer::quadratic, v) == 5.0);
  v << 0.0, 0.0;
  CHECK(value(Regularizer::exponential, v) == 2.0);
  v << 1.0, 1.0;
  CHECK(value(Regularizer::entropy, v) == doctest::Approx(-2.0));
  v << 1.0, -0.5;
  CHECK_THROWS_AS(value(Regularizer::entropy, v), DomainError);
  // 0 log 0 = 0
  v << 0.0, 1.0;
  CHECK(value(Regularizer::entropy, v) == doctest::Approx(-1.0));
}

TEST_CASE("grad examples") {
  Vector v(2);
  v << 1.0, 2.0;
  const Vector gq = grad(Regularizer::quadratic, v);
  CHECK(gq[0] == 2.0);
  CHECK(gq[1] == 4.0);
  Vector z(1);
  z << 0.0;
  CHECK(grad(Regularizer::exponential, z)[0] == 1.0);
  Vector one(1);
  one << 1.0;
  CHECK(grad(Regularizer::entropy, one)[0] == 0.0);
  CHECK_THROWS_AS(grad(Regularizer::entropy, z), DomainError);
}

TEST_CASE("grad_inverse examples") {
  Vector y(2);
  y << 2.0, 4.0;
  const Vector q = grad_inverse(Regularizer::quadratic, y);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == 2.0);
  Vector one(1);
  one << 1.0;
  CHECK(grad_inverse(Regularizer::exponential, one)[0] == 0.0);
  Vector zero(1);
  zero << 0.0;
  CHECK(grad_inverse(Regularizer::entropy, zero)[0] == 1.0);
  CHECK_THROWS_AS(grad_inverse(Regularizer::exponential, zero), DomainError);
}

TEST_CASE("conjugate examples") {
  Vector x(2);
  x << 0.0, 0.0;
  CHECK(conjugate(Regularizer::entropy, x) == 2.0);
  Vector x2(2);
  x2 << 2.0, 0.0;
  CHECK(conjugate(Regularizer::quadratic, x2) == 1.0);
  Vector ones(2);
  ones << 1.0, 1.0;
  CHECK(conjugate(Regularizer::exponential, ones) == doctest::Approx(-2.0));
  Vector neg(1);
  neg << -0.5;
  CHECK_THROWS_AS(conjugate(Regularizer::exponential, neg), DomainError);
  Vector zero(1);
  zero << 0.0;
  CHECK(conjugate(Regularizer::exponential, zero) == 0.0);  // 0 log 0 - 0
}

TEST_CASE("cofiniteness classes") {
  CHECK(cofiniteness(Regularizer::quadratic).positive);
  CHECK(cofiniteness(Regularizer::quadratic).negative);
  CHECK(cofiniteness(Regularizer::exponential).positive);
  CHECK_FALSE(cofiniteness(Regularizer::exponential).negative);
  CHECK(cofiniteness(Regularizer::entropy).positive);
  CHECK_FALSE(cofiniteness(Regularizer::entropy).negative);
}

TEST_CASE("string round-trip") {
  for (const Regularizer kind :
       {Regularizer::quadratic, Regularizer::entropy, Regularizer::exponential}) {
    CHECK(regularizer_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(regularizer_from_string("Quadratic"), InvalidProblem);  // case-sensitive
}

TEST_CASE("gradient matches central differences") {
  Rng rng(11);
  for (const Regularizer kind :
       {Regularizer::quadratic, Regularizer::entropy, Regularizer::exponential}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector v = random_domain_point(kind, rng, 1 + rng.index(6));
      const Vector g = grad(kind, v);
      for (Index i = 0; i < v.size(); ++i) {
        const double numeric = testing_support::central_difference(kind, v, i, 1e-5);
        CHECK(std::abs(g[i] - numeric) <= 1e-6 * (1.0 + std::abs(g[i])));
      }
    }
  }
}

TEST_CASE("inverse gradient round-trips") {
  Rng rng(12);
  for (const Regularizer kind :
       {Regularizer::quadratic, Regularizer::entropy, Regularizer::exponential}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector v = random_domain_point(kind, rng, 1 + rng.index(4));
      const Vector round = grad_inverse(kind, grad(kind, v));
      for (Index i = 0; i < v.size(); ++i) {
        CHECK(std::abs(round[i] - v[i]) <= 1e-10 * std::max(1.0, std::abs(v[i])));
      }
    }
  }
}

TEST_CASE("conjugacy identity") {
  Rng rng(13);
  for (const Regularizer kind :
       {Regularizer::quadratic, Regularizer::entropy, Regularizer::exponential}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector v = random_domain_point(kind, rng, 1 + rng.index(4));
      const Vector g = grad(kind, v);
      const double lhs = conjugate(kind, g);
      const double rhs = v.dot(g) - value(kind, v);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("solve_theta closed-form examples") {
  // entropy at a tight constraint
  CHECK(solve_theta(Regularizer::entropy, Regularizer::entropy, 0.5, 0.5, 1.0, 1.0) == 0.0);
  // exponential: (e^f + theta)(e^g + theta) = e^C with e^C = 4
  CHECK(solve_theta(Regularizer::exponential, Regularizer::exponential, 0.0, 0.0,
                    std::log(4.0), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  // quadratic violated constraint: negative multiplier, exact post-step equality
  const double theta = solve_theta(Regularizer::quadratic, Regularizer::quadratic,
                                   1.0, 1.0, 1.0, 1.0);
  CHECK(theta < 0.0);
  CHECK(theta == doctest::Approx(oracle_theta(Regularizer::quadratic, Regularizer::quadratic,
                                              1.0, 1.0, 1.0, 1.0))
                     .epsilon(1e-10));
  const double f_next = apply_step(Regularizer::quadratic, 1.0, 1.0, theta);
  const double g_next = apply_step(Regularizer::quadratic, 1.0, 1.0, theta);
  CHECK(f_next + g_next == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("projection equality across all pairings") {
  Rng rng(14);
  const Regularizer kinds[] = {Regularizer::quadratic, Regularizer::entropy,
                               Regularizer::exponential};
  for (const Regularizer phi : kinds) {
    for (const Regularizer varphi : kinds) {
      for (int trial = 0; trial < 300; ++trial) {
        const double f = phi == Regularizer::entropy ? rng.uniform(0.05, 4.0)
                                                     : rng.uniform(-3.0, 3.0);
        const double g = varphi == Regularizer::entropy ? rng.uniform(0.05, 4.0)
                                                        : rng.uniform(-3.0, 3.0);
        const bool entropic_pair =
            phi == Regularizer::entropy && varphi == Regularizer::entropy;
        const double c = entropic_pair ? rng.uniform(0.05, 4.0) : rng.uniform(-2.0, 4.0);
        const double gamma = std::exp(rng.uniform(std::log(0.1), std::log(1000.0)));

        CAPTURE(to_string(phi));
        CAPTURE(to_string(varphi));
        CAPTURE(f);
        CAPTURE(g);
        CAPTURE(c);
        CAPTURE(gamma);
        const double theta = solve_theta(phi, varphi, f, g, c, gamma);
        CAPTURE(theta);
        const double f_next = apply_step(phi, f, gamma, theta);
        const double g_next = apply_step(varphi, g, gamma, theta);
        REQUIRE(std::abs(f_next + g_next - c) <= 1e-10);

        // sign law
        const double gap = f + g - c;
        if (gap > 0.0) CHECK(theta < 0.0);
        if (gap < 0.0) CHECK(theta > 0.0);
        if (gap == 0.0) CHECK(theta == 0.0);
      }
    }
  }
}

TEST_CASE("solve_theta agrees with the bisection oracle") {
  Rng rng(15);
  const Regularizer kinds[] = {Regularizer::quadratic, Regularizer::entropy,
                               Regularizer::exponential};
  for (const Regularizer phi : kinds) {
    for (const Regularizer varphi : kinds) {
      for (int trial = 0; trial < 50; ++trial) {
        const double f = phi == Regularizer::entropy ? rng.uniform(0.05, 4.0)
                                                     : rng.uniform(-3.0, 3.0);
        const double g = varphi == Regularizer::entropy ? rng.uniform(0.05, 4.0)
                                                        : rng.uniform(-3.0, 3.0);
        const bool entropic_pair =
            phi == Regularizer::entropy && varphi == Regularizer::entropy;
        const double c = entropic_pair ? rng.uniform(0.05, 4.0) : rng.uniform(-2.0, 4.0);
        const double gamma = std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
        const double theta = solve_theta(phi, varphi, f, g, c, gamma);
        const double reference = oracle_theta(phi, varphi, f, g, c, gamma);
        CHECK(std::abs(theta - reference) <= 1e-9 * (1.0 + std::abs(reference)));
      }
    }
  }
}

TEST_CASE("exponential pairing can run out of representable solutions") {
  // e^f - e^g squares past the double range while the constraint is violated
  CHECK_THROWS_AS(solve_theta(Regularizer::exponential, Regularizer::exponential,
                              400.0, 0.0, 1.0, 1.0),
                  ThetaError);
}

TEST_CASE("entropy pair needs a positive cost") {
  CHECK_THROWS_AS(solve_theta(Regularizer::entropy, Regularizer::entropy, 1.0, 1.0, 0.0, 1.0),
                  ThetaError);
}

TEST_CASE("apply_step leaves the exponential domain loudly") {
  // e^v + gamma c <= 0 has no preimage
  CHECK_THROWS_AS(apply_step(Regularizer::exponential, 0.0, 1.0, -2.0), DomainError);
}

}  // TEST_SUITE
