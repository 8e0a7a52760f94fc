#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frwmax/fields.hpp"
#include "frwmax/propagator.hpp"
#include "frwmax/timeframe.hpp"

namespace frwmax {

// ---------------------------------------------------------------- fitting

struct LineFit {
  double slope{};
  double intercept{};
  double slope_stderr{};
  std::size_t samples{};
};

/// Ordinary least squares y = a + b x with equal weights. The slope standard
/// error is sqrt(SSR / (n - 2) / Sxx). Needs n >= 3 and distinct x.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

enum class DecayVariable { ConformalTau, CosmologicalT };
enum class DecayModel { PowerLaw, Exponential };

std::string_view to_string(DecayVariable v);
std::string_view to_string(DecayModel m);

/// One tau-grid point of a decay run: the max |A| over the probe set.
struct DecaySample {
  double tau{};
  double abscissa{};  // tau or t(tau)
  double max_abs{};
  bool used{};  // false when below kDecayNoiseFloor
};

inline constexpr double kDecayNoiseFloor = 1e-13;

struct DecayFit {
  DecayVariable variable = DecayVariable::ConformalTau;
  DecayModel model = DecayModel::PowerLaw;
  double estimate{};
  double stderr_{};
  double tau_min{};
  double tau_max{};
  std::size_t samples{};
  std::vector<DecaySample> points;
};

/// Probes for the sup over x at one tau: `directions` seeded unit vectors
/// times the geodesic radii (tau - tau0) + s for each shell offset s, all
/// measured from the support centre.
struct ShellProbeSpec {
  int directions = 24;
  /// Offsets from the light-cone shell in units of R_geo.
  std::vector<double> offsets{-0.5, 0.0, 0.5};
  std::uint64_t seed = 1;
};

std::vector<Vec3> seeded_directions(int count, std::uint64_t seed);

std::vector<SpatialPoint> shell_probes(const GeodesicBall& support, double radius,
                                       const ShellProbeSpec& spec);

/// Geodesic support of f + g; throws std::invalid_argument when the data are
/// zero or not compactly supported.
GeodesicBall data_support(const CauchyProblem& problem);

/// Fits log(max|A|) against log(abscissa) (power law) or the abscissa
/// (exponential). Throws std::invalid_argument for fewer than 5 grid points or
/// tau_min < 5 (R_geo + |tau0|); NumericalFailure when fewer than 5 points
/// survive the noise floor.
DecayFit fit_decay(const CauchyProblem& problem, std::span<const double> tau_grid,
                   const ShellProbeSpec& probes, DecayModel model, DecayVariable variable,
                   const SolveOptions& options = {});

/// Refit an existing run in another variable or model without re-evaluating.
DecayFit refit_decay(const DecayFit& run, Curvature curvature, DecayModel model,
                     DecayVariable variable);

/// n points geometrically spaced over [a, b].
std::vector<double> geometric_grid(double a, double b, int n);

// ---------------------------------------------------------------- Huygens

enum class ConeRegion { Inside, OnShell, Outside };
std::string_view to_string(ConeRegion r);

struct SupportProbe {
  SpatialPoint point;
  double distance{};  // geodesic distance to the support centre
  ConeRegion region = ConeRegion::OnShell;
  double magnitude{};  // max_mu |A^mu|
};

struct SupportMap {
  double tau{};
  double radius{};  // tau - tau0
  double r_geo{};
  double c_data{};
  std::vector<SupportProbe> probes;
  double max_off_shell{};
  double max_on_shell{};
  /// max_off_shell <= 1e-9 C_data.
  bool off_shell_vanishes{};
};

inline constexpr double kHuygensOffShellFactor = 1e-9;
inline constexpr double kHuygensOnShellFactor = 1e-6;

/// Classifies each probe (outside if d > r + R_geo, inside if d < r - R_geo,
/// on the shell otherwise, r = tau - tau0) and evaluates |A|. Throws
/// std::invalid_argument unless r > 2 R_geo.
SupportMap huygens_map(const CauchyProblem& problem, double tau,
                       std::span<const SpatialPoint> probes, const SolveOptions& options = {});

/// Probes along seeded directions from the support centre: `per_region`
/// inside the cone, on the shell and outside it.
std::vector<SpatialPoint> huygens_probes(const CauchyProblem& problem, double tau, int per_region,
                                         std::uint64_t seed);

// ---------------------------------------------------------------- singular limit

struct SingularLimitRow {
  double tau{};
  double error_A{};      // sup_x |A(tau, x) - f(x)|
  double error_A_tau{};  // sup_x |dA/dtau(tau, x) - g(x)|
};

struct SingularLimitReport {
  std::vector<SingularLimitRow> rows;
  bool monotone{};       // both columns non-increasing over all rows
  bool monotone_tail{};  // same over the final 4 rows
  bool ratio_tail{};     // each step of the final 4 rows shrinks by <= 0.75
  double final_error_A{};
  double final_error_A_tau{};
};

/// Requires tau0 = 0 and a strictly decreasing positive tau sequence.
SingularLimitReport singular_limit_report(const CauchyProblem& problem,
                                          std::span<const SpatialPoint> points,
                                          std::span<const double> taus,
                                          const SolveOptions& options = {});

/// tau_k = first * 2^-k, k = 0..count-1.
std::vector<double> halving_sequence(double first, int count);

// ---------------------------------------------------------------- cross-singularity

struct TraceRow {
  double tau{};
  Vec3 A;
  bool spliced{};  // the tau = 0 row from limit_at_singularity
};

struct JumpRow {
  double tau{};   // |tau|
  double jump{};  // |A(tau) - A(-tau)|
  double to_limit{};  // max(|A(tau) - f|, |A(-tau) - f|)
  double bound{};     // C(tau) |tau|
};

struct CrossSingularityTrace {
  SpatialPoint x;
  std::vector<TraceRow> rows;  // sorted by tau, including the spliced row
  std::vector<JumpRow> jumps;  // decreasing |tau|
  bool jump_ratio_ok{};        // jump(tau/2) <= 0.75 jump(tau) wherever both exist
  bool within_modulus{};       // to_limit <= bound for every pair
  double max_ratio{};
};

inline constexpr double kJumpRatio = 0.75;

/// Local modulus of continuity C(tau) with |A(+-tau, x) - f(x)| <= C |tau|:
/// flat 2 C_f + C_g; hyperbolic ((cosh tau - 1)/tau + 1 + sinh(tau)/tau) C_f
/// + (sinh(tau)/tau) C_g.
double continuity_modulus(Curvature curvature, double tau, const DataNorms& norms);

/// Requires tau0 = 0 and a grid without 0.
CrossSingularityTrace cross_singularity_trace(const CauchyProblem& problem, const SpatialPoint& x,
                                              std::span<const double> tau_grid,
                                              const SolveOptions& options = {});

/// +-tau_k for tau_k = first * 2^-k.
std::vector<double> symmetric_halving_grid(double first, int count);

// ---------------------------------------------------------------- PDE residual

/// Max over components of |A_tautau - (L A)| from second-order central
/// differences of step h in tau and in each chart coordinate, with
/// L = Delta + m (flat) or z^2 Delta - z d_z + m (half-space chart).
double wave_residual(const CauchyProblem& problem, double tau, const SpatialPoint& x, double h,
                     double mass_shift = 0.0, const SolveOptions& options = {});

}  // namespace frwmax
