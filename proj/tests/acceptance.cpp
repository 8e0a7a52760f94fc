// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria (0 when all pass).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "frwmax/analysis.hpp"
#include "frwmax/oracle.hpp"
#include "frwmax/timeframe.hpp"

using namespace frwmax;

namespace {

struct Outcome {
  bool pass{};
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const Vec3 kAmpF{1.0, 0.5, -0.25};
const Vec3 kAmpG{0.5, -0.25, 0.1};

CauchyProblem bump_problem(const SpatialPoint& centre, double radius, const Vec3& af,
                           const Vec3& ag, double tau0) {
  return {centre.chart, make_bump(centre, radius, af), make_bump(centre, radius, ag), tau0};
}

CauchyProblem flat_default(double tau0 = 0.0) {
  return bump_problem(SpatialPoint::flat(0, 0, 0), 1.0, kAmpF, kAmpG, tau0);
}

CauchyProblem hyperbolic_default(double tau0 = 0.0) {
  return bump_problem(SpatialPoint::hyperbolic(0, 0, 1), 0.3, kAmpF, kAmpG, tau0);
}

// Criterion 1: flat oracle agreement at tau - tau0 in {1, 2, 3}.
Outcome flat_oracle() {
  const auto p = bump_problem(SpatialPoint::flat(0, 0, 0), 1.0, {1, 0, 0}, {0.5, 0, 0}, 1.0);
  const GeodesicBall support = data_support(p);
  OracleOptions o;
  o.n = 128;
  double worst = 0.0;
  std::string detail;
  std::size_t probes = 0;
  for (double r : {1.0, 2.0, 3.0}) {
    const auto pts = oracle_probes(support, r);
    probes += pts.size();
    const auto cmp = compare_with_oracle(p, pts, p.tau0 + r, 0.0, o);
    worst = std::max(worst, cmp.relative_linf);
    detail += fmt("r=%g rel=%.2e ", r, cmp.relative_linf);
  }
  return {worst <= 1e-3 && probes == 12, detail + fmt("probes=%zu (need rel<=1e-3)", probes)};
}

struct DecayRuns {
  DecayFit flat_tau;
  DecayFit flat_t;
  DecayFit hyp_tau;
  DecayFit hyp_t;
};

DecayRuns decay_runs() {
  DecayRuns runs;
  const ShellProbeSpec spec;
  const auto fp = flat_default();
  runs.flat_tau = fit_decay(fp, geometric_grid(20.0, 200.0, 12), spec, DecayModel::PowerLaw,
                            DecayVariable::ConformalTau);
  runs.flat_t = refit_decay(runs.flat_tau, Curvature::Flat, DecayModel::PowerLaw,
                            DecayVariable::CosmologicalT);
  const auto hp = hyperbolic_default();
  runs.hyp_tau = fit_decay(hp, geometric_grid(8.0, 20.0, 13), spec, DecayModel::Exponential,
                           DecayVariable::ConformalTau);
  runs.hyp_t = refit_decay(runs.hyp_tau, Curvature::Hyperbolic, DecayModel::PowerLaw,
                           DecayVariable::CosmologicalT);
  return runs;
}

// Criterion 5: sharp Huygens at tau - tau0 = 10 R_geo.
Outcome huygens() {
  bool ok = true;
  std::string detail;
  for (const auto& p : {flat_default(0.5), hyperbolic_default(0.5)}) {
    const double tau = p.tau0 + 10.0 * data_support(p).radius;
    const auto probes = huygens_probes(p, tau, 8, 1);
    const SupportMap map = huygens_map(p, tau, probes);
    const bool nonvacuous = map.max_on_shell >= kHuygensOnShellFactor * map.c_data;
    ok = ok && map.off_shell_vanishes && nonvacuous;
    detail += fmt("%s: off/C=%.1e on/C=%.1e ", std::string(to_string(p.curvature)).c_str(),
                  map.max_off_shell / map.c_data, map.max_on_shell / map.c_data);
  }
  return {ok, detail + "(need off<=1e-9, on>=1e-6)"};
}

std::vector<SpatialPoint> limit_points(const GeodesicBall& ball) {
  std::vector<SpatialPoint> out{ball.center};
  const auto dirs = seeded_directions(4, 1);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    out.push_back(exponential_map(ball.center, dirs[i], (i % 2 ? 0.6 : 0.3) * ball.radius));
  }
  return out;
}

// Criterion 6. The errors scale like tau sup|g| and tau sup|(Delta + m) f|,
// so the data are wide, gentle bumps (see docs/outputs.md).
Outcome singular_limit() {
  const auto flat = bump_problem(SpatialPoint::flat(0, 0, 0), 4.0, kAmpF, kAmpG, 0.0);
  const auto hyp =
      bump_problem(SpatialPoint::hyperbolic(0, 0, 10), 9.0, 0.1 * kAmpF, 0.1 * kAmpG, 0.0);
  const auto taus = halving_sequence(0.2, 7);
  bool ok = true;
  std::string detail;
  for (const auto& p : {flat, hyp}) {
    const auto pts = limit_points(data_support(p));
    const auto rep = singular_limit_report(p, pts, taus);
    const bool below = rep.final_error_A < 1e-3 && rep.final_error_A_tau < 1e-3;
    ok = ok && rep.monotone && rep.ratio_tail && below;
    detail += fmt("%s: eA=%.1e eAt=%.1e monotone=%d ratio=%d ",
                  std::string(to_string(p.curvature)).c_str(), rep.final_error_A,
                  rep.final_error_A_tau, rep.monotone, rep.ratio_tail);
  }
  return {ok, detail};
}

// Criterion 7: spliced trace at the support centre.
Outcome cross_singularity() {
  const auto flat = bump_problem(SpatialPoint::flat(0, 0, 0), 4.0, kAmpF, kAmpG, 0.0);
  bool ok = true;
  std::string detail;
  for (const auto& p : {flat, hyperbolic_default(0.0)}) {
    const GeodesicBall ball = data_support(p);
    const auto grid = symmetric_halving_grid(0.5 * ball.radius, 10);
    const auto trace = cross_singularity_trace(p, ball.center, grid);
    ok = ok && trace.jump_ratio_ok && trace.within_modulus;
    detail += fmt("%s: max_ratio=%.3f modulus=%d ", std::string(to_string(p.curvature)).c_str(),
                  trace.max_ratio, trace.within_modulus);
  }
  return {ok, detail + "(need ratio<=0.75)"};
}

// Criterion 8: which wave equation the hyperbolic formula solves.
Outcome pde_identification() {
  const auto p = bump_problem(SpatialPoint::hyperbolic(0, 0, 1), 0.3, {1, 0, 0}, {0.5, 0, 0}, 0.0);
  const double tau = 1.5;
  const auto probes = oracle_probes(data_support(p), tau);
  OracleOptions o;
  o.n = 128;
  const PdeReport rep = identify_hyperbolic_pde(p, probes, tau, o);
  const bool decisive = rep.verdict == "mass_shift=0" || rep.verdict == "mass_shift=1";
  return {decisive, fmt("verdict=%s d(m=0)=%.2e d(m=1)=%.2e", rep.verdict.c_str(),
                        rep.distance_mass0, rep.distance_mass1)};
}

// Criterion 9: property suites.
Outcome properties() {
  using std::numbers::pi;
  bool areas = true;
  for (Curvature k : {Curvature::Flat, Curvature::Hyperbolic}) {
    for (double r : {0.1, 1.0, 3.0}) {
      const auto q = build_sphere_quadrature({{0.2, -0.3, 1.4}, k}, r, kDefaultQuadratureOrder);
      const double s = k == Curvature::Flat ? r : std::sinh(r);
      const double area = 4.0 * pi * s * s;
      areas = areas && std::fabs(q.total_weight() - area) <= 1e-8 * area;
    }
  }

  bool linear = true;
  for (Curvature k : {Curvature::Flat, Curvature::Hyperbolic}) {
    const double z = k == Curvature::Flat ? 0.0 : 2.0;
    const CauchyProblem a = bump_problem({{0, 0, z}, k}, 0.8, {1, 0, 2}, {0.5, 0.5, 0}, 0.0);
    const CauchyProblem b = bump_problem({{0.3, 0.1, z}, k}, 0.6, {0, -1, 1}, {2, 0, -1}, 0.0);
    const CauchyProblem mix{k, 1.3 * a.f + (-0.7) * b.f, 1.3 * a.g + (-0.7) * b.g, 0.0};
    for (double tau : {0.4, 0.9}) {
      const SpatialPoint x{{0.4, -0.2, z + 0.3}, k};
      const auto sa = solve(a, tau, x);
      const auto sb = solve(b, tau, x);
      const auto sm = solve(mix, tau, x);
      const double scale = std::max({max_abs(1.3 * sa.A), max_abs(0.7 * sb.A), 1e-300});
      linear = linear && max_abs(sm.A - (1.3 * sa.A - 0.7 * sb.A)) <= 1e-12 * scale;
    }
  }

  const auto fp = flat_default();
  const double r1 = wave_residual(fp, 1.0, SpatialPoint::flat(0.3, 0.4, 0.1), 0.04);
  const double r2 = wave_residual(fp, 1.0, SpatialPoint::flat(0.3, 0.4, 0.1), 0.02);
  const double r3 = wave_residual(fp, 1.0, SpatialPoint::flat(0.3, 0.4, 0.1), 0.01);
  const bool residual = r1 / r2 >= 3.0 && r2 / r3 >= 3.0;

  double worst_trip = 0.0;
  for (Curvature k : {Curvature::Flat, Curvature::Hyperbolic}) {
    for (int i = 0; i <= 400; ++i) {
      const double tau = -20.0 + 0.1 * i;
      const double back = t_to_tau(tau_to_t({tau, k}), k).tau;
      worst_trip = std::max(worst_trip, std::fabs(back - tau) / std::max(1.0, std::fabs(tau)));
    }
  }

  const auto bp = bump_problem(SpatialPoint::flat(0, 0, 0), 1.0, {1, 0, 0}, {0.5, 0, 0}, 0.0);
  const GridSpec g = make_grid({-2, -2, -2}, 4.0, 41, 1.0, Curvature::Flat, 0.0, 4);
  GridState s = initialize(g, bp.f, bp.g);
  const double e0 = discrete_energy(s, g);
  for (int i = 0; i < 1000; ++i) fd_step(s, g);
  const double drift = std::fabs(discrete_energy(s, g) - e0) / e0;

  const bool ok = areas && linear && residual && worst_trip <= 1e-10 && drift <= 1e-3;
  return {ok, fmt("areas=%d linearity=%d residual_ratios=%.2f,%.2f round_trip=%.1e "
                  "energy_drift=%.1e",
                  areas, linear, r1 / r2, r2 / r3, worst_trip, drift)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&failures](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("criterion %d: %s  %s  [%s] (%.1f s)\n", id, out.pass ? "PASS" : "FAIL", name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "flat oracle agreement", flat_oracle);

  DecayRuns runs;
  bool decay_ok = true;
  std::string decay_error;
  const auto start = std::chrono::steady_clock::now();
  try {
    runs = decay_runs();
  } catch (const std::exception& e) {
    decay_ok = false;
    decay_error = e.what();
  }
  const double decay_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto decay = [&](double estimate, double stderr_, double expected, double tol) -> Outcome {
    if (!decay_ok) return {false, "exception: " + decay_error};
    return {std::fabs(estimate - expected) <= tol,
            fmt("estimate=%.4f +- %.4f (need %.4f +- %.2f, decay runs %.1f s)", estimate, stderr_,
                expected, tol, decay_secs)};
  };
  report(2, "flat decay in tau", [&] {
    return decay(runs.flat_tau.estimate, runs.flat_tau.stderr_, -1.0, 0.05);
  });
  report(3, "flat decay in t", [&] {
    return decay(runs.flat_t.estimate, runs.flat_t.stderr_, -1.0 / 3.0, 0.05);
  });
  report(4, "hyperbolic decay", [&] {
    const Outcome a = decay(runs.hyp_tau.estimate, runs.hyp_tau.stderr_, -1.0, 0.05);
    const Outcome b = decay(runs.hyp_t.estimate, runs.hyp_t.stderr_, -1.0, 0.1);
    return Outcome{a.pass && b.pass, "tau: " + a.detail + "; t: " + b.detail};
  });
  report(5, "sharp Huygens", huygens);
  report(6, "singular limit", singular_limit);
  report(7, "cross-singularity continuity", cross_singularity);
  report(8, "PDE identification", pde_identification);
  report(9, "property suites", properties);
  std::printf("acceptance: %d of 9 criteria failed\n", failures);
  return failures;
}
