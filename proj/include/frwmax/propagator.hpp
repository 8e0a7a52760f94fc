#pragma once

#include <span>
#include <utility>
#include <vector>

#include "frwmax/fields.hpp"
#include "frwmax/geometry.hpp"
#include "frwmax/types.hpp"

namespace frwmax {

/// Cauchy data (f, g) posed at conformal time tau0 >= 0; tau0 = 0 is the
/// singular hypersurface.
struct CauchyProblem {
  Curvature curvature = Curvature::Flat;
  VectorField f;
  VectorField g;
  double tau0 = 0.0;

  /// Throws std::invalid_argument when charts disagree or tau0 is not a
  /// finite non-negative number.
  void validate() const;
};

/// (A(tau, x), dA/dtau(tau, x)) at one space-time point.
struct SolutionSample {
  SpacetimePoint point;
  Vec3 A;
  Vec3 A_tau;
  int quadrature_order{};
};

struct SolveOptions {
  int order = kDefaultQuadratureOrder;
  /// Skip dA/dtau (A_tau is left zero); roughly halves the cost.
  bool time_derivative = true;
};

/// Radii below this use the first-order expansion A = f + r g.
inline constexpr double kNearZeroRadius = 1e-8;

/// Spherical mean M(r) and its radial derivative dM/dr at radius r > 0.
struct RadialMeans {
  Vec3 mean;
  Vec3 derivative;
};

/// Mean of `field` over the geodesic sphere S_r(center), normalised by its
/// area, together with d/dr of that mean (the mean of the outward geodesic
/// derivative). Bump terms are integrated over the cap of the sphere inside
/// their support ball only, so a sphere that misses the support gives exactly 0.
RadialMeans spherical_means(const VectorField& field, const SpatialPoint& center, double r,
                            int order = kDefaultQuadratureOrder, bool with_derivative = true);

Vec3 spherical_mean(const VectorField& field, const SpatialPoint& center, double r,
                    int order = kDefaultQuadratureOrder);

/// Kirchhoff formula A = d/dr (r M_f) + r M_g at r = tau - tau0 (tau > tau0).
SolutionSample solve_flat(const CauchyProblem& problem, double tau, const SpatialPoint& x,
                          const SolveOptions& options = {});

/// A = d/dr (sinh(r) M_f) + sinh(r) M_g at r = tau - tau0 (tau > tau0).
SolutionSample solve_hyperbolic(const CauchyProblem& problem, double tau, const SpatialPoint& x,
                                const SolveOptions& options = {});

/// Dispatches on the curvature of the problem.
SolutionSample solve(const CauchyProblem& problem, double tau, const SpatialPoint& x,
                     const SolveOptions& options = {});

/// Data posed at tau0 = 0. Any tau != 0 is legal; tau < 0 evaluates the same
/// formula with the spherical means extended evenly in the radius.
SolutionSample solve_from_singularity(const CauchyProblem& problem, double tau,
                                      const SpatialPoint& x, const SolveOptions& options = {});

/// The limit (A, dA/dtau) as tau -> 0+, i.e. (f(x), g(x)). Requires tau0 = 0.
std::pair<Vec3, Vec3> limit_at_singularity(const CauchyProblem& problem, const SpatialPoint& x);

/// Richardson extrapolation of solve_from_singularity along tau_k = 0.2 * 2^-k,
/// k = 0..levels-1, compared with limit_at_singularity.
struct SingularLimitCheck {
  Vec3 A_limit;
  Vec3 A_tau_limit;
  Vec3 A_extrapolated;
  Vec3 A_tau_extrapolated;
  double error_A{};
  double error_A_tau{};
};
SingularLimitCheck check_singular_limit(const CauchyProblem& problem, const SpatialPoint& x,
                                        const SolveOptions& options = {}, int levels = 6);

/// Evaluate many samples. Uses `threads` workers (0: FRWMAX_THREADS or the
/// hardware concurrency). Each sample is computed independently, so results do
/// not depend on the thread count. Samples with tau0 = 0 go through
/// solve_from_singularity, others through solve.
std::vector<SolutionSample> solve_batch(const CauchyProblem& problem,
                                        std::span<const SpacetimePoint> points,
                                        const SolveOptions& options = {}, int threads = 0);

/// Worker count from FRWMAX_THREADS (0 or unset: hardware concurrency).
int configured_threads();

}  // namespace frwmax
