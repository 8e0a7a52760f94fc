#include "frwmax/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace frwmax {

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("least_squares: need at least 3 points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("least_squares: abscissae are all equal");
  LineFit fit;
  fit.samples = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.slope_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

std::string_view to_string(DecayVariable v) {
  return v == DecayVariable::ConformalTau ? "conformal_tau" : "cosmological_t";
}

std::string_view to_string(DecayModel m) {
  return m == DecayModel::PowerLaw ? "power_law" : "exponential";
}

std::string_view to_string(ConeRegion r) {
  switch (r) {
    case ConeRegion::Inside:
      return "inside_cone";
    case ConeRegion::OnShell:
      return "on_shell";
    case ConeRegion::Outside:
      return "outside_cone";
  }
  return "?";
}

std::vector<Vec3> seeded_directions(int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("directions: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(-1.0, 1.0);
  std::uniform_real_distribution<double> uphi(0.0, 2.0 * std::numbers::pi);
  std::vector<Vec3> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double z = uz(rng);
    const double phi = uphi(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back({s * std::cos(phi), s * std::sin(phi), z});
  }
  return out;
}

std::vector<SpatialPoint> shell_probes(const GeodesicBall& support, double radius,
                                       const ShellProbeSpec& spec) {
  std::vector<SpatialPoint> out;
  for (const Vec3& dir : seeded_directions(spec.directions, spec.seed)) {
    for (double offset : spec.offsets) {
      const double d = radius + offset * support.radius;
      if (d <= 0.0) continue;
      out.push_back(exponential_map(support.center, dir, d));
    }
  }
  return out;
}

GeodesicBall data_support(const CauchyProblem& problem) {
  const VectorField data = problem.f + problem.g;
  if (data.is_zero()) throw std::invalid_argument("data: f and g are both zero");
  const auto ball = data.geodesic_support();
  if (!ball) throw std::invalid_argument("data: need compactly supported (bump) data");
  return *ball;
}

std::vector<double> geometric_grid(double a, double b, int n) {
  if (n < 2 || !(a > 0.0) || !(b > a)) throw std::invalid_argument("geometric_grid: bad range");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
  out.back() = b;
  return out;
}

namespace {

double abscissa_of(double tau, Curvature curvature, DecayVariable variable) {
  if (variable == DecayVariable::ConformalTau) return tau;
  return tau_to_t({tau, curvature});
}

void fit_points(DecayFit& fit) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : fit.points) {
    if (!p.used) continue;
    xs.push_back(fit.model == DecayModel::PowerLaw ? std::log(p.abscissa) : p.abscissa);
    ys.push_back(std::log(p.max_abs));
  }
  if (xs.size() < 5) {
    throw NumericalFailure("fit_decay: fewer than 5 samples above the noise floor");
  }
  const LineFit line = least_squares(xs, ys);
  fit.estimate = line.slope;
  fit.stderr_ = line.slope_stderr;
  fit.samples = xs.size();
}

}  // namespace

DecayFit fit_decay(const CauchyProblem& problem, std::span<const double> tau_grid,
                   const ShellProbeSpec& probes, DecayModel model, DecayVariable variable,
                   const SolveOptions& options) {
  problem.validate();
  if (tau_grid.size() < 5) throw std::invalid_argument("fit_decay: need at least 5 tau values");
  const GeodesicBall support = data_support(problem);
  const auto [lo, hi] = std::minmax_element(tau_grid.begin(), tau_grid.end());
  const double guard = 5.0 * (support.radius + std::fabs(problem.tau0));
  if (*lo < guard) {
    throw std::invalid_argument("fit_decay: tau_min = " + std::to_string(*lo) +
                                " is below the asymptotic guard 5 (R_geo + |tau0|) = " +
                                std::to_string(guard));
  }
  DecayFit fit;
  fit.variable = variable;
  fit.model = model;
  fit.tau_min = *lo;
  fit.tau_max = *hi;
  SolveOptions opts = options;
  opts.time_derivative = false;
  for (double tau : tau_grid) {
    const auto xs = shell_probes(support, tau - problem.tau0, probes);
    std::vector<SpacetimePoint> pts;
    pts.reserve(xs.size());
    for (const auto& x : xs) pts.push_back({tau, x});
    double m = 0.0;
    for (const auto& s : solve_batch(problem, pts, opts)) m = std::max(m, max_abs(s.A));
    DecaySample sample;
    sample.tau = tau;
    sample.abscissa = abscissa_of(tau, problem.curvature, variable);
    sample.max_abs = m;
    sample.used = m >= kDecayNoiseFloor;
    fit.points.push_back(sample);
  }
  fit_points(fit);
  return fit;
}

DecayFit refit_decay(const DecayFit& run, Curvature curvature, DecayModel model,
                     DecayVariable variable) {
  DecayFit fit = run;
  fit.model = model;
  fit.variable = variable;
  for (auto& p : fit.points) p.abscissa = abscissa_of(p.tau, curvature, variable);
  fit_points(fit);
  return fit;
}

SupportMap huygens_map(const CauchyProblem& problem, double tau,
                       std::span<const SpatialPoint> probes, const SolveOptions& options) {
  problem.validate();
  SupportMap map;
  map.tau = tau;
  map.radius = tau - problem.tau0;
  const VectorField data = problem.f + problem.g;
  if (data.is_zero()) {
    // Zero data: everything vanishes; classify against a point support.
    for (const auto& p : probes) map.probes.push_back({p, 0.0, ConeRegion::Outside, 0.0});
    map.off_shell_vanishes = true;
    return map;
  }
  const GeodesicBall support = data_support(problem);
  map.r_geo = support.radius;
  if (!(map.radius > 2.0 * map.r_geo)) {
    throw std::invalid_argument("huygens_map: tau - tau0 must exceed 2 R_geo (regions overlap)");
  }
  map.c_data = data_norms(problem.f, problem.g).combined();
  std::vector<SpacetimePoint> pts;
  for (const auto& p : probes) pts.push_back({tau, p});
  SolveOptions opts = options;
  opts.time_derivative = false;
  const auto values = solve_batch(problem, pts, opts);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    SupportProbe row;
    row.point = probes[i];
    row.distance = geodesic_distance(probes[i], support.center);
    if (row.distance > map.radius + map.r_geo) {
      row.region = ConeRegion::Outside;
    } else if (row.distance < map.radius - map.r_geo) {
      row.region = ConeRegion::Inside;
    } else {
      row.region = ConeRegion::OnShell;
    }
    row.magnitude = max_abs(values[i].A);
    if (row.region == ConeRegion::OnShell) {
      map.max_on_shell = std::max(map.max_on_shell, row.magnitude);
    } else {
      map.max_off_shell = std::max(map.max_off_shell, row.magnitude);
    }
    map.probes.push_back(row);
  }
  map.off_shell_vanishes = map.max_off_shell <= kHuygensOffShellFactor * map.c_data;
  return map;
}

std::vector<SpatialPoint> huygens_probes(const CauchyProblem& problem, double tau, int per_region,
                                         std::uint64_t seed) {
  if (per_region < 1) throw std::invalid_argument("huygens_probes: per_region must be >= 1");
  const GeodesicBall support = data_support(problem);
  const double r = tau - problem.tau0;
  const double rg = support.radius;
  if (!(r > 2.0 * rg)) throw std::invalid_argument("huygens_probes: tau - tau0 must exceed 2 R_geo");
  const auto dirs = seeded_directions(3 * per_region, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::vector<SpatialPoint> out;
  for (int i = 0; i < per_region; ++i) {
    const double inside = (r - rg) * u(rng);
    // The first shell probe sits exactly on the light cone through the centre.
    const double shell = i == 0 ? r : r + rg * (2.0 * u(rng) - 1.0) * 0.9;
    const double outside = r + rg + rg * 4.0 * u(rng);
    out.push_back(exponential_map(support.center, dirs[3 * i], inside));
    out.push_back(exponential_map(support.center, dirs[3 * i + 1], shell));
    out.push_back(exponential_map(support.center, dirs[3 * i + 2], outside));
  }
  return out;
}

std::vector<double> halving_sequence(double first, int count) {
  if (count < 1 || !(first > 0.0)) throw std::invalid_argument("halving_sequence: bad arguments");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = std::ldexp(first, -k);
  return out;
}

SingularLimitReport singular_limit_report(const CauchyProblem& problem,
                                          std::span<const SpatialPoint> points,
                                          std::span<const double> taus,
                                          const SolveOptions& options) {
  problem.validate();
  if (problem.tau0 != 0.0) throw std::invalid_argument("singular_limit_report: tau0 must be 0");
  if (taus.empty()) throw std::invalid_argument("singular_limit_report: empty tau sequence");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0) || (i > 0 && !(taus[i] < taus[i - 1]))) {
      throw std::invalid_argument("singular_limit_report: tau must decrease strictly to 0");
    }
  }
  std::vector<std::pair<Vec3, Vec3>> limits;
  for (const auto& x : points) limits.push_back(limit_at_singularity(problem, x));
  SingularLimitReport report;
  SolveOptions opts = options;
  opts.time_derivative = true;
  for (double tau : taus) {
    std::vector<SpacetimePoint> pts;
    for (const auto& x : points) pts.push_back({tau, x});
    const auto values = solve_batch(problem, pts, opts);
    SingularLimitRow row;
    row.tau = tau;
    for (std::size_t i = 0; i < values.size(); ++i) {
      row.error_A = std::max(row.error_A, max_abs(values[i].A - limits[i].first));
      row.error_A_tau = std::max(row.error_A_tau, max_abs(values[i].A_tau - limits[i].second));
    }
    report.rows.push_back(row);
  }
  auto check = [&](std::size_t from, double ratio) {
    for (std::size_t i = std::max<std::size_t>(from, 1); i < report.rows.size(); ++i) {
      const auto& a = report.rows[i - 1];
      const auto& b = report.rows[i];
      if (b.error_A > ratio * a.error_A || b.error_A_tau > ratio * a.error_A_tau) return false;
    }
    return true;
  };
  const std::size_t tail = report.rows.size() >= 4 ? report.rows.size() - 4 : 0;
  report.monotone = check(0, 1.0);
  report.monotone_tail = check(tail, 1.0);
  report.ratio_tail = check(tail, 0.75);
  report.final_error_A = report.rows.back().error_A;
  report.final_error_A_tau = report.rows.back().error_A_tau;
  return report;
}

double continuity_modulus(Curvature curvature, double tau, const DataNorms& norms) {
  const double t = std::fabs(tau);
  if (curvature == Curvature::Flat) return 2.0 * norms.c_f + norms.c_g;
  const double sh = t > 0.0 ? std::sinh(t) / t : 1.0;
  const double ch = t > 0.0 ? (std::cosh(t) - 1.0) / t : 0.0;
  return (ch + 1.0 + sh) * norms.c_f + sh * norms.c_g;
}

std::vector<double> symmetric_halving_grid(double first, int count) {
  std::vector<double> out;
  for (double t : halving_sequence(first, count)) {
    out.push_back(-t);
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CrossSingularityTrace cross_singularity_trace(const CauchyProblem& problem, const SpatialPoint& x,
                                              std::span<const double> tau_grid,
                                              const SolveOptions& options) {
  problem.validate();
  if (problem.tau0 != 0.0) throw std::invalid_argument("cross_singularity_trace: tau0 must be 0");
  for (double t : tau_grid) {
    if (t == 0.0 || !std::isfinite(t)) {
      throw std::invalid_argument("cross_singularity_trace: the tau grid must exclude 0");
    }
  }
  CrossSingularityTrace trace;
  trace.x = x;
  const auto [f0, g0] = limit_at_singularity(problem, x);
  std::vector<SpacetimePoint> pts;
  for (double t : tau_grid) pts.push_back({t, x});
  SolveOptions opts = options;
  opts.time_derivative = false;
  const auto values = solve_batch(problem, pts, opts);
  std::map<double, Vec3> by_tau;
  for (std::size_t i = 0; i < values.size(); ++i) {
    by_tau[tau_grid[i]] = values[i].A;
    trace.rows.push_back({tau_grid[i], values[i].A, false});
  }
  trace.rows.push_back({0.0, f0, true});
  std::sort(trace.rows.begin(), trace.rows.end(),
            [](const TraceRow& a, const TraceRow& b) { return a.tau < b.tau; });

  const DataNorms norms = data_norms(problem.f, problem.g);
  for (auto it = by_tau.rbegin(); it != by_tau.rend() && it->first > 0.0; ++it) {
    const auto mirror = by_tau.find(-it->first);
    if (mirror == by_tau.end()) continue;
    JumpRow row;
    row.tau = it->first;
    row.jump = max_abs(it->second - mirror->second);
    row.to_limit = std::max(max_abs(it->second - f0), max_abs(mirror->second - f0));
    row.bound = continuity_modulus(problem.curvature, row.tau, norms) * row.tau;
    trace.jumps.push_back(row);
  }
  trace.jump_ratio_ok = true;
  trace.within_modulus = true;
  for (std::size_t i = 0; i < trace.jumps.size(); ++i) {
    const JumpRow& row = trace.jumps[i];
    if (row.to_limit > row.bound) trace.within_modulus = false;
    for (std::size_t j = i + 1; j < trace.jumps.size(); ++j) {
      if (trace.jumps[j].tau != 0.5 * row.tau) continue;
      const double ratio = row.jump > 0.0 ? trace.jumps[j].jump / row.jump : 0.0;
      trace.max_ratio = std::max(trace.max_ratio, ratio);
      if (trace.jumps[j].jump > kJumpRatio * row.jump) trace.jump_ratio_ok = false;
    }
  }
  return trace;
}

double wave_residual(const CauchyProblem& problem, double tau, const SpatialPoint& x, double h,
                     double mass_shift, const SolveOptions& options) {
  if (!(h > 0.0)) throw std::invalid_argument("wave_residual: h must be > 0");
  std::vector<SpacetimePoint> pts;
  pts.push_back({tau, x});
  pts.push_back({tau + h, x});
  pts.push_back({tau - h, x});
  for (int a = 0; a < 3; ++a) {
    SpatialPoint plus = x;
    SpatialPoint minus = x;
    plus.coords[a] += h;
    minus.coords[a] -= h;
    pts.push_back({tau, plus});
    pts.push_back({tau, minus});
  }
  SolveOptions opts = options;
  opts.time_derivative = false;
  const auto v = solve_batch(problem, pts, opts);
  const double inv_h2 = 1.0 / (h * h);
  const Vec3 centre = v[0].A;
  const Vec3 a_tt = (v[1].A - 2.0 * centre + v[2].A) * inv_h2;
  Vec3 lap{};
  for (int a = 0; a < 3; ++a) lap += (v[3 + 2 * a].A - 2.0 * centre + v[4 + 2 * a].A) * inv_h2;
  Vec3 op = lap;
  if (problem.curvature == Curvature::Hyperbolic) {
    const double z = x.coords.z;
    const Vec3 a_z = (v[7].A - v[8].A) / (2.0 * h);
    op = z * z * lap - z * a_z;
  }
  op += mass_shift * centre;
  return max_abs(a_tt - op);
}

}  // namespace frwmax
