#pragma once

#include "frwmax/types.hpp"

namespace frwmax {

/// Conformal time. Negative values are allowed so that solutions reflected
/// through the singular hypersurface tau = 0 can be represented.
struct ConformalTime {
  double tau{};
  Curvature curvature = Curvature::Flat;
};

/// Cosmological time t(tau): tau^3 / 3 (flat) or sinh(tau) - tau (hyperbolic).
double tau_to_t(ConformalTime tau);

/// Inverse of tau_to_t. The hyperbolic branch uses Newton's method inside a
/// bisection bracket; throws NumericalFailure after 200 iterations.
ConformalTime t_to_tau(double t, Curvature curvature);

/// a(tau) = tau^2 (flat) or cosh(tau) - 1 (hyperbolic).
double scale_factor(ConformalTime tau);

}  // namespace frwmax
