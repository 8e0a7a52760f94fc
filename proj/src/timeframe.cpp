#include "frwmax/timeframe.hpp"

#include <cmath>

namespace frwmax {
namespace {

// sinh(x) - x for x >= 0 without cancellation near zero.
double sinh_minus_identity(double x) {
  if (x < 0.5) {
    // x^3/3! + x^5/5! + ... ; 12 terms are exact to rounding for x < 0.5.
    const double x2 = x * x;
    double term = x * x2 / 6.0;
    double sum = term;
    for (int k = 5; k < 29; k += 2) {
      term *= x2 / (static_cast<double>(k - 1) * k);
      sum += term;
    }
    return sum;
  }
  return std::sinh(x) - x;
}

// d/dx (sinh x - x) = cosh x - 1 = 2 sinh^2(x/2)
double sinh_minus_identity_derivative(double x) {
  const double s = std::sinh(0.5 * x);
  return 2.0 * s * s;
}

double invert_hyperbolic(double t) {
  // t >= 0 here. Bracket [lo, hi] with g(lo) <= t <= g(hi).
  if (t == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (sinh_minus_identity(hi) < t) {
    lo = hi;
    hi *= 2.0;
  }
  double tau = t < 1.0 ? std::cbrt(6.0 * t) : std::asinh(t);
  if (!(tau > lo && tau < hi)) tau = 0.5 * (lo + hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double residual = sinh_minus_identity(tau) - t;
    if (residual > 0.0) {
      hi = tau;
    } else {
      lo = tau;
    }
    const double slope = sinh_minus_identity_derivative(tau);
    double next = tau - residual / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - tau);
    tau = next;
    if (step <= 1e-14 * std::fmax(1.0, tau) || hi - lo <= 1e-15 * std::fmax(1.0, tau)) {
      return tau;
    }
  }
  throw NumericalFailure("t_to_tau: hyperbolic inversion did not converge");
}

}  // namespace

double tau_to_t(ConformalTime time) {
  const double a = std::fabs(time.tau);
  const double magnitude =
      time.curvature == Curvature::Flat ? a * a * a / 3.0 : sinh_minus_identity(a);
  return std::signbit(time.tau) ? -magnitude : magnitude;
}

ConformalTime t_to_tau(double t, Curvature curvature) {
  const double a = std::fabs(t);
  const double magnitude =
      curvature == Curvature::Flat ? std::cbrt(3.0 * a) : invert_hyperbolic(a);
  return {std::signbit(t) ? -magnitude : magnitude, curvature};
}

double scale_factor(ConformalTime time) {
  if (time.curvature == Curvature::Flat) return time.tau * time.tau;
  const double s = std::sinh(0.5 * time.tau);
  return 2.0 * s * s;
}

}  // namespace frwmax
