#include "drot/regularizers.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace drot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

// log(e^u + e^v) without overflow.
double logaddexp(double u, double v) {
  if (u < v) std::swap(u, v);
  if (v == -kInf) return u;
  return u + std::log1p(std::exp(v - u));
}

}  // namespace

Regularizer regularizer_from_string(std::string_view name) {
  if (name == "quadratic") return Regularizer::quadratic;
  if (name == "entropy") return Regularizer::entropy;
  if (name == "exponential") return Regularizer::exponential;
  throw InvalidProblem("unknown regularizer '" + std::string(name) +
                       "' (expected quadratic | entropy | exponential)");
}

const char* to_string(Regularizer kind) {
  switch (kind) {
    case Regularizer::quadratic: return "quadratic";
    case Regularizer::entropy: return "entropy";
    case Regularizer::exponential: return "exponential";
  }
  return "?";
}

Cofiniteness cofiniteness(Regularizer kind) {
  switch (kind) {
    case Regularizer::quadratic: return {true, true};
    case Regularizer::entropy: return {true, false};
    case Regularizer::exponential: return {true, false};
  }
  return {false, false};
}

double value_at(Regularizer kind, double v) {
  switch (kind) {
    case Regularizer::quadratic:
      return v * v;
    case Regularizer::exponential:
      return std::exp(v);
    case Regularizer::entropy:
      if (v < 0.0) throw DomainError("entropy value is undefined for negative entries");
      return xlogx(v) - v;
  }
  return 0.0;
}

double grad_at(Regularizer kind, double v) {
  switch (kind) {
    case Regularizer::quadratic:
      return 2.0 * v;
    case Regularizer::exponential:
      return std::exp(v);
    case Regularizer::entropy:
      if (!(v > 0.0)) throw DomainError("entropy gradient needs strictly positive entries");
      return std::log(v);
  }
  return 0.0;
}

double grad_inverse_at(Regularizer kind, double y) {
  switch (kind) {
    case Regularizer::quadratic:
      return y / 2.0;
    case Regularizer::exponential:
      if (!(y > 0.0)) throw DomainError("exponential inverse gradient needs positive values");
      return std::log(y);
    case Regularizer::entropy:
      return std::exp(y);
  }
  return 0.0;
}

double conjugate_at(Regularizer kind, double x) {
  switch (kind) {
    case Regularizer::quadratic:
      return x * x / 4.0;
    case Regularizer::exponential:
      if (x < 0.0) throw DomainError("exponential conjugate is undefined for negative entries");
      return xlogx(x) - x;
    case Regularizer::entropy:
      return std::exp(x);
  }
  return 0.0;
}

double value(Regularizer kind, const Vector& v) {
  double total = 0.0;
  for (Index i = 0; i < v.size(); ++i) total += value_at(kind, v[i]);
  return total;
}

Vector grad(Regularizer kind, const Vector& v) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = grad_at(kind, v[i]);
  return out;
}

Vector grad_inverse(Regularizer kind, const Vector& y) {
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) out[i] = grad_inverse_at(kind, y[i]);
  return out;
}

double conjugate(Regularizer kind, const Vector& x) {
  double total = 0.0;
  for (Index i = 0; i < x.size(); ++i) total += conjugate_at(kind, x[i]);
  return total;
}

namespace detail {

double raw_from_value(Regularizer kind, double v) {
  switch (kind) {
    case Regularizer::quadratic:
      return v;
    case Regularizer::entropy:
      if (!(v > 0.0)) throw DomainError("entropy potential must be strictly positive");
      return std::log(v);
    case Regularizer::exponential:
      return std::exp(v);
  }
  return 0.0;
}

double value_from_raw(Regularizer kind, double raw) {
  switch (kind) {
    case Regularizer::quadratic:
      return raw;
    case Regularizer::entropy:
      return std::exp(raw);
    case Regularizer::exponential:
      return std::log(raw);
  }
  return 0.0;
}

double step_raw(Regularizer kind, double raw, double gamma, double c) {
  switch (kind) {
    case Regularizer::quadratic:
      return raw + gamma * c / 2.0;
    case Regularizer::entropy:
      return raw + gamma * c;
    case Regularizer::exponential: {
      const double next = raw + gamma * c;
      if (!(next > 0.0)) {
        throw DomainError("exponential step leaves the potential domain");
      }
      return next;
    }
  }
  return 0.0;
}

namespace {

// Post-step potential value and its theta-derivative for one side of a mixed
// pairing, in raw space.
double stepped_value(Regularizer kind, double raw, double gamma, double theta) {
  switch (kind) {
    case Regularizer::quadratic:
      return raw + gamma * theta / 2.0;
    case Regularizer::entropy:
      return std::exp(raw + gamma * theta);
    case Regularizer::exponential:
      return std::log(raw + gamma * theta);
  }
  return 0.0;
}

double stepped_derivative(Regularizer kind, double raw, double gamma, double theta) {
  switch (kind) {
    case Regularizer::quadratic:
      return gamma / 2.0;
    case Regularizer::entropy:
      return gamma * std::exp(raw + gamma * theta);
    case Regularizer::exponential:
      return gamma / (raw + gamma * theta);
  }
  return 0.0;
}

PairProjection project_quadratic_pair(double f, double g, double c_ij, double gamma) {
  PairProjection out;
  out.theta = (c_ij - f - g) / gamma;
  out.raw_f = f + (c_ij - f - g) / 2.0;
  out.raw_g = g + (c_ij - f - g) / 2.0;
  out.full_step_ok = std::isfinite(out.raw_f) && std::isfinite(out.raw_g);
  if (!std::isfinite(out.theta)) {
    throw ThetaError("quadratic projection multiplier is not finite");
  }
  return out;
}

PairProjection project_entropy_pair(double u, double v, double c_ij, double gamma) {
  if (!(c_ij > 0.0)) {
    throw ThetaError("entropic projection needs a positive cost entry");
  }
  // f' + g' = (f + g) e^{gamma theta} = C, all in log domain.
  const double log_sum = logaddexp(u, v);
  const double shift = std::log(c_ij) - log_sum;
  PairProjection out;
  out.theta = shift / gamma;
  out.raw_f = u + shift;
  out.raw_g = v + shift;
  out.full_step_ok = true;
  if (!std::isfinite(out.theta)) {
    throw ThetaError("entropic projection multiplier is not finite");
  }
  return out;
}

PairProjection project_exponential_pair(double ef, double eg, double c_ij, double gamma) {
  // Solve (e^f + gamma theta)(e^g + gamma theta) = e^C for the root that keeps
  // both factors positive. The discriminant is written as
  // (e^f - e^g)^2 + 4 e^C to avoid cancellation.
  const double d = ef - eg;
  const double ec = std::exp(c_ij);
  const double disc = d * d + 4.0 * ec;
  const bool violated = std::log(ef) + std::log(eg) > c_ij;
  if (!std::isfinite(disc)) {
    if (violated) {
      throw ThetaError("no real solution for the exponential projection (overflow); gamma or "
                       "the potentials are too large");
    }
    PairProjection out;
    out.theta = kInf;
    out.full_step_ok = false;
    return out;
  }
  const double h = std::sqrt(disc);
  const double ef_next = d >= 0.0 ? (d + h) / 2.0 : (2.0 * ec) / (h - d);
  const double eg_next = d <= 0.0 ? (h - d) / 2.0 : (2.0 * ec) / (h + d);
  if (!(ef_next > 0.0) || !(eg_next > 0.0) || !std::isfinite(ef_next) ||
      !std::isfinite(eg_next)) {
    if (violated) {
      throw ThetaError("no representable real solution for the exponential projection");
    }
    PairProjection out;
    out.theta = kInf;
    out.full_step_ok = false;
    return out;
  }
  PairProjection out;
  out.theta = (ef_next - ef) / gamma;
  out.raw_f = ef_next;
  out.raw_g = eg_next;
  out.full_step_ok = true;
  return out;
}

PairProjection project_mixed_pair(Regularizer phi, Regularizer varphi, double raw_f,
                                  double raw_g, double c_ij, double gamma) {
  const auto residual = [&](double theta) {
    return stepped_value(phi, raw_f, gamma, theta) + stepped_value(varphi, raw_g, gamma, theta) -
           c_ij;
  };

  const double h0 = residual(0.0);
  if (std::isnan(h0)) throw ThetaError("projection residual is not a number");

  double lo;
  double hi;
  if (h0 == 0.0) {
    lo = hi = 0.0;
  } else if (h0 > 0.0) {
    // Violated constraint: the root is negative. The exponential side bounds
    // theta from below by -e^f/gamma.
    hi = 0.0;
    double lower_limit = -kInf;
    if (phi == Regularizer::exponential) lower_limit = -raw_f / gamma;
    if (varphi == Regularizer::exponential) {
      lower_limit = std::max(lower_limit, -raw_g / gamma);
    }
    if (std::isinf(lower_limit)) {
      double step = 1.0;
      lo = -step;
      int guard = 0;
      while (!(residual(lo) < 0.0)) {
        step *= 2.0;
        lo = -step;
        if (++guard > 200) throw ThetaError("failed to bracket the projection root");
      }
    } else {
      double fraction = 0.5;
      lo = lower_limit + (hi - lower_limit) * fraction;
      int guard = 0;
      while (!(residual(lo) < 0.0)) {
        fraction *= 0.5;
        lo = lower_limit + (hi - lower_limit) * fraction;
        if (++guard > 200) throw ThetaError("failed to bracket the projection root");
      }
    }
  } else {
    lo = 0.0;
    hi = 1.0;
    int guard = 0;
    while (!(residual(hi) > 0.0)) {
      hi *= 2.0;
      if (++guard > 200) throw ThetaError("failed to bracket the projection root");
    }
  }

  // Safeguarded Newton: a Newton step is taken only while it stays inside the
  // bracket and keeps halving (otherwise bisect), so exponential walls cannot
  // stall the iteration.
  double x = 0.5 * (lo + hi);
  if (lo == hi) x = lo;
  double previous_step = hi - lo;
  for (int iter = 0; iter < 200 && lo < hi; ++iter) {
    const double hx = residual(x);
    if (std::isnan(hx)) throw ThetaError("projection residual is not a number");
    if (std::abs(hx) <= 1e-12) break;
    if (hx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double dx = stepped_derivative(phi, raw_f, gamma, x) +
                      stepped_derivative(varphi, raw_g, gamma, x);
    double next = x - hx / dx;
    const bool newton_ok = std::isfinite(next) && next > lo && next < hi &&
                           std::abs(2.0 * hx) <= std::abs(previous_step * dx);
    if (!newton_ok) next = 0.5 * (lo + hi);
    previous_step = std::abs(next - x);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }

  PairProjection out;
  out.theta = x;
  out.raw_f = step_raw(phi, raw_f, gamma, x);
  out.raw_g = step_raw(varphi, raw_g, gamma, x);
  out.full_step_ok = std::isfinite(out.raw_f) && std::isfinite(out.raw_g);
  return out;
}

}  // namespace

PairProjection project_pair_raw(Regularizer phi, Regularizer varphi, double raw_f, double raw_g,
                                double c_ij, double gamma) {
  if (phi == Regularizer::quadratic && varphi == Regularizer::quadratic) {
    return project_quadratic_pair(raw_f, raw_g, c_ij, gamma);
  }
  if (phi == Regularizer::entropy && varphi == Regularizer::entropy) {
    return project_entropy_pair(raw_f, raw_g, c_ij, gamma);
  }
  if (phi == Regularizer::exponential && varphi == Regularizer::exponential) {
    return project_exponential_pair(raw_f, raw_g, c_ij, gamma);
  }
  return project_mixed_pair(phi, varphi, raw_f, raw_g, c_ij, gamma);
}

}  // namespace detail

double apply_step(Regularizer kind, double v, double gamma, double c) {
  return detail::value_from_raw(kind, detail::step_raw(kind, detail::raw_from_value(kind, v),
                                                       gamma, c));
}

double solve_theta(Regularizer phi, Regularizer varphi, double f_i, double g_j, double c_ij,
                   double gamma) {
  if (!std::isfinite(c_ij)) throw InvalidProblem("cost entry must be finite");
  if (!(gamma > 0.0)) throw InvalidProblem("gamma must be positive");
  const double raw_f = detail::raw_from_value(phi, f_i);
  const double raw_g = detail::raw_from_value(varphi, g_j);
  const detail::PairProjection proj = detail::project_pair_raw(phi, varphi, raw_f, raw_g, c_ij,
                                                               gamma);
  if (!std::isfinite(proj.theta)) {
    throw ThetaError("projection multiplier exceeds the representable range");
  }
  return proj.theta;
}

}  // namespace drot
