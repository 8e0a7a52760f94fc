#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "frwmax/fields.hpp"
#include "frwmax/geometry.hpp"
#include "frwmax/propagator.hpp"
#include "frwmax/types.hpp"

namespace frwmax {

/// Cubic grid of n^3 nodes lo + (i, j, k) * dx for the leapfrog oracle.
///
/// The operator is L u = Delta u + m u (flat) or
/// L u = z^2 (u_xx + u_yy + u_zz) - z u_z + m u (half-space chart of H^3),
/// with m = mass_shift. scheme_order 2 uses second-order central differences;
/// scheme_order 4 uses fourth-order differences plus the modified-equation
/// correction dt^4/12 L(L u) so that time is fourth order as well.
/// Nodes in the outer scheme_order/2 layers are held at zero (Dirichlet).
struct GridSpec {
  Vec3 lo;
  int n{};
  double dx{};
  double dt{};
  Curvature curvature = Curvature::Flat;
  double mass_shift{};
  int scheme_order = 2;

  double side() const { return (n - 1) * dx; }
  double z_max() const { return lo.z + side(); }
  Vec3 node(int i, int j, int k) const { return lo + Vec3{i * dx, j * dx, k * dx}; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
  }
  /// Largest stable step: 0.5 dx / sqrt(3), divided by z_max when hyperbolic.
  double max_dt() const;

  /// Throws std::invalid_argument on a CFL violation, z_min <= 0 in the
  /// hyperbolic chart, n < 5, dx <= 0 or a scheme order other than 2 or 4.
  void validate() const;
};

/// Grid covering [lo, lo + side]^3 with n nodes per axis, and the largest
/// stable dt that divides `duration` into a whole number of steps.
GridSpec make_grid(const Vec3& lo, double side, int n, double duration, Curvature curvature,
                   double mass_shift = 0.0, int scheme_order = 2);

/// Two consecutive time levels of the three components. A component whose
/// data are identically zero stays zero and is not stepped.
struct GridState {
  std::array<std::vector<double>, 3> prev;
  std::array<std::vector<double>, 3> curr;
  std::array<bool, 3> active{};
  double tau{};  // time of `curr` measured from the data time
  long steps{};
};

/// Projects (f, g) on the grid and takes the Taylor start to tau = dt.
GridState initialize(const GridSpec& spec, const VectorField& f, const VectorField& g);

/// One leapfrog step, in place.
void fd_step(GridState& state, const GridSpec& spec);

/// Steps until state.tau reaches `tau` (to within dt / 2).
void advance_to(GridState& state, const GridSpec& spec, double tau);

/// Staggered discrete energy at tau - dt/2, summed over components:
/// sum [((u^n - u^{n-1}) / dt)^2 - u^n (S u^{n-1})] dx^3 where S is the
/// spatial operator of the scheme. Exactly conserved by the flat scheme up to
/// rounding.
double discrete_energy(const GridState& state, const GridSpec& spec);

/// Largest |u| over the current level (growth monitor).
double max_amplitude(const GridState& state);

std::array<int, 3> nearest_node(const GridSpec& spec, const Vec3& p);
Vec3 node_value(const GridState& state, const GridSpec& spec, const std::array<int, 3>& ijk);

/// Tricubic Lagrange interpolation of the current level. Throws
/// std::out_of_range when the 4^3 stencil leaves the grid.
Vec3 sample(const GridState& state, const GridSpec& spec, const Vec3& p);

/// Flat binary dump of the current level. Header: int64 n, float64 dx,
/// float64 dt, float64 tau, int64 component count (3). Payload: float64,
/// component-major, x fastest.
void dump_raw(const GridState& state, const GridSpec& spec, const std::string& path);

/// Axis-aligned bounding box of the points that can influence any probe by
/// time `duration`: {y : d(y, c) + d(y, p) <= duration + R} for each probe p,
/// with (c, R) the data support ball. Sampled along geodesics from c.
struct InfluenceBox {
  Vec3 lo;
  Vec3 hi;
};
InfluenceBox influence_box(const GeodesicBall& support, std::span<const SpatialPoint> probes,
                           double duration);

/// Probes straddling the light-cone shell of radius r about the support
/// centre: geodesic radii r + s R_geo for s in {-0.45, -0.1, 0.1, 0.4}, along
/// directions close to one main direction. The main direction is horizontal
/// (flat) or tilted upwards so that the shell point keeps the height of the
/// centre (hyperbolic); this keeps the influence box, and so the grid, small.
std::vector<SpatialPoint> oracle_probes(const GeodesicBall& support, double r);

struct OracleOptions {
  int n = 128;
  int scheme_order = 4;
  /// Extra zero-free cells kept between the influence box and the Dirichlet layers.
  int margin_cells = 4;
  int quadrature_order = kDefaultQuadratureOrder;
  /// Compare at the grid node nearest each probe (no interpolation error).
  bool snap_to_nodes = true;
  /// Optional raw dump of the final state.
  std::string dump_path;
};

/// Cubic grid around the influence box of the probes.
GridSpec plan_grid(const CauchyProblem& problem, std::span<const SpatialPoint> probes, double tau,
                   double mass_shift, const OracleOptions& options);

struct ProbeComparison {
  SpatialPoint point;  // after snapping
  Vec3 formula;
  Vec3 oracle;
};

struct OracleComparison {
  GridSpec grid;
  double tau{};
  std::vector<ProbeComparison> probes;
  double max_abs_diff{};
  double max_abs_formula{};
  /// max |formula - oracle| / max |formula|; 0 when both vanish.
  double relative_linf{};
  double energy_drift{};  // flat only: |E_end - E_start| / |E_start|
  double max_amplitude{};
};

/// Runs the oracle with the given mass shift from the data of `problem` up to
/// conformal time `tau` and compares with the spherical-means solution at the
/// probes.
OracleComparison compare_with_oracle(const CauchyProblem& problem,
                                     std::span<const SpatialPoint> probes, double tau,
                                     double mass_shift, const OracleOptions& options = {});

/// Which wave equation the spherical-means formula solves. Runs the oracle
/// with mass_shift 0 and 1 and reports the relative L-infinity distance of
/// each run to the formula. verdict is "mass_shift=0" or "mass_shift=1" when
/// one distance is <= 1e-2 and the other >= 1e-1, "degenerate" when the
/// formula vanishes at every probe, "inconclusive" otherwise.
struct PdeReport {
  OracleComparison mass0;
  OracleComparison mass1;
  double distance_mass0{};
  double distance_mass1{};
  std::string verdict;
  int matching_mass_shift = -1;
};

inline constexpr double kPdeMatchTolerance = 1e-2;
inline constexpr double kPdeRejectThreshold = 1e-1;

PdeReport identify_hyperbolic_pde(const CauchyProblem& problem,
                                  std::span<const SpatialPoint> probes, double tau,
                                  const OracleOptions& options = {});

}  // namespace frwmax
