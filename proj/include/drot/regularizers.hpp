#pragma once

#include "drot/core.hpp"

#include <stdexcept>
#include <string_view>

namespace drot {

/// Thrown when an argument lies outside a regularizer's domain (entropy at a
/// negative entry, logarithm of a nonpositive value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown by solve_theta when the projection multiplier has no representable
/// real solution (exponential pairing with gamma too large) or when a
/// root-find cannot converge.
class ThetaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Regularizer regularizer_from_string(std::string_view name);
const char* to_string(Regularizer kind);

/// Growth classes: f is positive (negative) co-finite when f(rx)/r diverges
/// as r grows, for every nonzero x >= 0 (x <= 0) in the domain. A positive
/// co-finite pair can only destroy or preserve mass.
struct Cofiniteness {
  bool positive;
  bool negative;
};
Cofiniteness cofiniteness(Regularizer kind);

// The three regularizers, componentwise on vectors:
//   quadratic    phi(v) = sum v_i^2            dom R      conj sum x_i^2/4
//   exponential  phi(v) = sum e^{v_i}          dom R      conj sum x log x - x, x >= 0
//   entropy      phi(v) = sum v log v - v      dom v >= 0 conj sum e^{x_i}
// with the convention 0 log 0 = 0.

double value(Regularizer kind, const Vector& v);
Vector grad(Regularizer kind, const Vector& v);
Vector grad_inverse(Regularizer kind, const Vector& y);
double conjugate(Regularizer kind, const Vector& x);

// Scalar kernels for the componentwise definitions above.
double value_at(Regularizer kind, double v);
double grad_at(Regularizer kind, double v);
double grad_inverse_at(Regularizer kind, double y);
double conjugate_at(Regularizer kind, double x);

/// Single-potential Bregman step under the phi/gamma scaling: returns v' with
/// grad(phi)(v')/gamma = grad(phi)(v)/gamma + c.
double apply_step(Regularizer kind, double v, double gamma, double c);

/// The unique multiplier theta such that applying the full Bregman step with
/// c = theta to both potentials lands exactly on f' + g' = C_ij. Closed form
/// for matched pairs, safeguarded Newton with bisection fallback for mixed
/// pairs. theta < 0 iff the constraint is violated, theta = 0 at equality.
double solve_theta(Regularizer phi, Regularizer varphi, double f_i, double g_j, double c_ij,
                   double gamma);

namespace detail {

// Raw solver-side encoding of a potential: quadratic stores f itself, entropy
// stores log f (so the update is additive and f stays positive), exponential
// stores e^f (so the gradient-space bookkeeping is additive and exact).
double raw_from_value(Regularizer kind, double v);
double value_from_raw(Regularizer kind, double raw);

// Bregman step with multiplier increment c, applied in raw space.
double step_raw(Regularizer kind, double raw, double gamma, double c);

struct PairProjection {
  double theta = 0.0;
  // Post-full-step raws; meaningful only when full_step_ok.
  double raw_f = 0.0;
  double raw_g = 0.0;
  bool full_step_ok = false;
};

// Computes the full-step projection of constraint f + g <= c_ij for one
// (phi, varphi) pairing, in raw space. When the constraint is slack and the
// full step overflows the representable range, returns theta = +inf with
// full_step_ok = false (a partial step is still possible); when the
// constraint is violated and no representable solution exists, throws
// ThetaError.
PairProjection project_pair_raw(Regularizer phi, Regularizer varphi, double raw_f, double raw_g,
                                double c_ij, double gamma);

}  // namespace detail

}  // namespace drot
