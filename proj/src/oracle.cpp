#include "frwmax/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <variant>

namespace frwmax {
namespace {

using Field = std::vector<double>;

int halo(int scheme_order) { return scheme_order / 2; }

template <class Fn>
void parallel_slices(int begin, int end, Fn&& fn) {
  const int workers = std::min(configured_threads(), end - begin);
  if (workers <= 1) {
    for (int k = begin; k < end; ++k) fn(k);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int k = begin + w; k < end; k += workers) fn(k);
    });
  }
}

// out = L2 u on nodes at least `layer` cells from the boundary, 0 elsewhere.
void apply_l2(const GridSpec& s, const Field& u, Field& out, int layer) {
  const int n = s.n;
  const std::size_t sy = n;
  const std::size_t sz = static_cast<std::size_t>(n) * n;
  const double inv_dx2 = 1.0 / (s.dx * s.dx);
  const double inv_2dx = 0.5 / s.dx;
  const bool hyp = s.curvature == Curvature::Hyperbolic;
  std::fill(out.begin(), out.end(), 0.0);
  parallel_slices(layer, n - layer, [&](int k) {
    const double z = s.lo.z + k * s.dx;
    for (int j = layer; j < n - layer; ++j) {
      for (int i = layer; i < n - layer; ++i) {
        const std::size_t c = s.index(i, j, k);
        const double lap =
            (u[c - 1] + u[c + 1] + u[c - sy] + u[c + sy] + u[c - sz] + u[c + sz] - 6.0 * u[c]) *
            inv_dx2;
        double v = lap;
        if (hyp) v = z * z * lap - z * (u[c + sz] - u[c - sz]) * inv_2dx;
        out[c] = v + s.mass_shift * u[c];
      }
    }
  });
}

// out = L4 u + extra_scale * extra on nodes at least 2 cells from the boundary.
void apply_l4(const GridSpec& s, const Field& u, Field& out, const Field* extra,
              double extra_scale) {
  const int n = s.n;
  const std::ptrdiff_t sy = n;
  const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(n) * n;
  const double inv_12dx2 = 1.0 / (12.0 * s.dx * s.dx);
  const double inv_12dx = 1.0 / (12.0 * s.dx);
  const bool hyp = s.curvature == Curvature::Hyperbolic;
  std::fill(out.begin(), out.end(), 0.0);
  auto d2 = [&](std::size_t c, std::ptrdiff_t st) {
    return -u[c - 2 * st] + 16.0 * u[c - st] - 30.0 * u[c] + 16.0 * u[c + st] - u[c + 2 * st];
  };
  parallel_slices(2, n - 2, [&](int k) {
    const double z = s.lo.z + k * s.dx;
    for (int j = 2; j < n - 2; ++j) {
      for (int i = 2; i < n - 2; ++i) {
        const std::size_t c = s.index(i, j, k);
        const double lap = (d2(c, 1) + d2(c, sy) + d2(c, sz)) * inv_12dx2;
        double v = lap;
        if (hyp) {
          const double uz =
              (u[c - 2 * sz] - 8.0 * u[c - sz] + 8.0 * u[c + sz] - u[c + 2 * sz]) * inv_12dx;
          v = z * z * lap - z * uz;
        }
        v += s.mass_shift * u[c];
        if (extra != nullptr) v += extra_scale * (*extra)[c];
        out[c] = v;
      }
    }
  });
}

// Spatial operator S of the scheme: L2 (order 2) or L4 + dt^2/12 L2 L2 (order 4).
void apply_scheme(const GridSpec& s, const Field& u, Field& out, Field& tmp) {
  if (s.scheme_order == 2) {
    apply_l2(s, u, out, 1);
    return;
  }
  apply_l2(s, u, tmp, 1);
  Field& l2l2 = out;
  apply_l2(s, tmp, l2l2, 2);
  tmp.swap(l2l2);  // tmp = L2 L2 u
  apply_l4(s, u, out, &tmp, s.dt * s.dt / 12.0);
}

Field project(const GridSpec& s, const VectorField& field, int mu) {
  Field out(s.size(), 0.0);
  const int h = halo(s.scheme_order);
  parallel_slices(h, s.n - h, [&](int k) {
    for (int j = h; j < s.n - h; ++j) {
      for (int i = h; i < s.n - h; ++i) {
        out[s.index(i, j, k)] = field.eval({s.node(i, j, k), s.curvature})[mu];
      }
    }
  });
  return out;
}

bool component_active(const VectorField& f, const VectorField& g, int mu) {
  auto touches = [mu](const VectorField& field) {
    for (const auto& term : field.terms()) {
      if (const auto* b = std::get_if<VectorField::Bump>(&term)) {
        if (b->amplitude[mu] != 0.0) return true;
      } else {
        return true;
      }
    }
    return false;
  };
  return touches(f) || touches(g);
}

}  // namespace

double GridSpec::max_dt() const {
  const double flat = 0.5 * dx / std::sqrt(3.0);
  return curvature == Curvature::Flat ? flat : flat / z_max();
}

void GridSpec::validate() const {
  if (n < 5) throw std::invalid_argument("grid: n must be >= 5");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("grid: dx must be > 0");
  if (scheme_order != 2 && scheme_order != 4) {
    throw std::invalid_argument("grid: scheme_order must be 2 or 4");
  }
  if (curvature == Curvature::Hyperbolic && !(lo.z > 0.0)) {
    throw std::invalid_argument("grid: hyperbolic box needs z_min > 0");
  }
  if (!(dt > 0.0) || dt > max_dt() * (1.0 + 1e-12)) {
    throw std::invalid_argument("grid: dt violates the CFL bound (dt = " + std::to_string(dt) +
                                ", limit " + std::to_string(max_dt()) + ")");
  }
}

GridSpec make_grid(const Vec3& lo, double side, int n, double duration, Curvature curvature,
                   double mass_shift, int scheme_order) {
  if (n < 5) throw std::invalid_argument("grid: n must be >= 5");
  if (!(side > 0.0)) throw std::invalid_argument("grid: side must be > 0");
  GridSpec s;
  s.lo = lo;
  s.n = n;
  s.dx = side / (n - 1);
  s.curvature = curvature;
  s.mass_shift = mass_shift;
  s.scheme_order = scheme_order;
  const double limit = s.max_dt();
  s.dt = limit;
  if (duration > 0.0) {
    const double steps = std::ceil(duration / limit * (1.0 - 1e-12));
    s.dt = duration / steps;
  }
  s.validate();
  return s;
}

GridState initialize(const GridSpec& spec, const VectorField& f, const VectorField& g) {
  spec.validate();
  if (f.chart() != spec.curvature || g.chart() != spec.curvature) {
    throw std::invalid_argument("oracle: data chart does not match the grid");
  }
  GridState state;
  Field tmp(spec.size());
  Field lu(spec.size());
  const double dt = spec.dt;
  for (int mu = 0; mu < 3; ++mu) {
    state.active[mu] = component_active(f, g, mu);
    if (!state.active[mu]) {
      state.prev[mu].assign(spec.size(), 0.0);
      state.curr[mu].assign(spec.size(), 0.0);
      continue;
    }
    Field u0 = project(spec, f, mu);
    const Field g0 = project(spec, g, mu);
    Field u1 = u0;
    for (std::size_t c = 0; c < u1.size(); ++c) u1[c] += dt * g0[c];
    if (spec.scheme_order == 2) {
      apply_l2(spec, u0, lu, 1);
      for (std::size_t c = 0; c < u1.size(); ++c) u1[c] += 0.5 * dt * dt * lu[c];
    } else {
      apply_l4(spec, u0, lu, nullptr, 0.0);
      for (std::size_t c = 0; c < u1.size(); ++c) u1[c] += 0.5 * dt * dt * lu[c];
      apply_l4(spec, g0, lu, nullptr, 0.0);
      for (std::size_t c = 0; c < u1.size(); ++c) u1[c] += dt * dt * dt / 6.0 * lu[c];
      apply_l2(spec, u0, tmp, 1);
      apply_l2(spec, tmp, lu, 2);
      for (std::size_t c = 0; c < u1.size(); ++c) u1[c] += dt * dt * dt * dt / 24.0 * lu[c];
    }
    state.prev[mu] = std::move(u0);
    state.curr[mu] = std::move(u1);
  }
  state.tau = dt;
  state.steps = 1;
  return state;
}

void fd_step(GridState& state, const GridSpec& spec) {
  Field work(spec.size());
  Field tmp(spec.size());
  const double dt2 = spec.dt * spec.dt;
  for (int mu = 0; mu < 3; ++mu) {
    if (!state.active[mu]) continue;
    Field& prev = state.prev[mu];
    Field& curr = state.curr[mu];
    apply_scheme(spec, curr, work, tmp);
    for (std::size_t c = 0; c < prev.size(); ++c) {
      prev[c] = 2.0 * curr[c] - prev[c] + dt2 * work[c];
    }
    prev.swap(curr);
  }
  state.tau += spec.dt;
  ++state.steps;
}

void advance_to(GridState& state, const GridSpec& spec, double tau) {
  const double remaining = (tau - state.tau) / spec.dt;
  if (remaining < -0.5) throw std::invalid_argument("advance_to: target lies in the past");
  const long steps = std::lround(remaining);
  const double start = state.tau;
  const long start_steps = state.steps;
  for (long s = 0; s < steps; ++s) fd_step(state, spec);
  // Recompute from the step count so rounding does not accumulate.
  state.tau = start + static_cast<double>(state.steps - start_steps) * spec.dt;
}

double discrete_energy(const GridState& state, const GridSpec& spec) {
  Field work(spec.size());
  Field tmp(spec.size());
  const double inv_dt2 = 1.0 / (spec.dt * spec.dt);
  double total = 0.0;
  for (int mu = 0; mu < 3; ++mu) {
    if (!state.active[mu]) continue;
    apply_scheme(spec, state.prev[mu], work, tmp);
    const Field& u = state.curr[mu];
    const Field& v = state.prev[mu];
    for (std::size_t c = 0; c < u.size(); ++c) {
      const double du = u[c] - v[c];
      total += du * du * inv_dt2 - u[c] * work[c];
    }
  }
  return total * spec.dx * spec.dx * spec.dx;
}

double max_amplitude(const GridState& state) {
  double m = 0.0;
  for (int mu = 0; mu < 3; ++mu) {
    for (double v : state.curr[mu]) m = std::max(m, std::fabs(v));
  }
  return m;
}

std::array<int, 3> nearest_node(const GridSpec& spec, const Vec3& p) {
  std::array<int, 3> ijk{};
  for (int a = 0; a < 3; ++a) {
    const long i = std::lround((p[a] - spec.lo[a]) / spec.dx);
    if (i < 0 || i >= spec.n) throw std::out_of_range("nearest_node: point outside the grid");
    ijk[a] = static_cast<int>(i);
  }
  return ijk;
}

Vec3 node_value(const GridState& state, const GridSpec& spec, const std::array<int, 3>& ijk) {
  const std::size_t c = spec.index(ijk[0], ijk[1], ijk[2]);
  return {state.curr[0][c], state.curr[1][c], state.curr[2][c]};
}

Vec3 sample(const GridState& state, const GridSpec& spec, const Vec3& p) {
  std::array<int, 3> base{};
  std::array<std::array<double, 4>, 3> w{};
  for (int a = 0; a < 3; ++a) {
    const double s = (p[a] - spec.lo[a]) / spec.dx;
    base[a] = static_cast<int>(std::floor(s)) - 1;
    if (base[a] < 0 || base[a] + 3 >= spec.n) {
      throw std::out_of_range("sample: interpolation stencil leaves the grid");
    }
    const double t = s - base[a];  // in [1, 2)
    for (int m = 0; m < 4; ++m) {
      double l = 1.0;
      for (int q = 0; q < 4; ++q) {
        if (q != m) l *= (t - q) / static_cast<double>(m - q);
      }
      w[a][m] = l;
    }
  }
  Vec3 out{};
  for (int mu = 0; mu < 3; ++mu) {
    if (!state.active[mu]) continue;
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) {
      for (int b = 0; b < 4; ++b) {
        for (int a = 0; a < 4; ++a) {
          acc += w[0][a] * w[1][b] * w[2][c] *
                 state.curr[mu][spec.index(base[0] + a, base[1] + b, base[2] + c)];
        }
      }
    }
    out[mu] = acc;
  }
  return out;
}

void dump_raw(const GridState& state, const GridSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_raw: cannot open " + path);
  const std::int64_t n = spec.n;
  const std::int64_t components = 3;
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&spec.dx), sizeof spec.dx);
  out.write(reinterpret_cast<const char*>(&spec.dt), sizeof spec.dt);
  out.write(reinterpret_cast<const char*>(&state.tau), sizeof state.tau);
  out.write(reinterpret_cast<const char*>(&components), sizeof components);
  for (int mu = 0; mu < 3; ++mu) {
    out.write(reinterpret_cast<const char*>(state.curr[mu].data()),
              static_cast<std::streamsize>(state.curr[mu].size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("dump_raw: write failed for " + path);
}

InfluenceBox influence_box(const GeodesicBall& support, std::span<const SpatialPoint> probes,
                           double duration) {
  InfluenceBox box{probes.empty() ? support.center.coords : probes.front().coords,
                   probes.empty() ? support.center.coords : probes.front().coords};
  auto extend = [&box](const Vec3& p) {
    for (int a = 0; a < 3; ++a) {
      box.lo[a] = std::min(box.lo[a], p[a]);
      box.hi[a] = std::max(box.hi[a], p[a]);
    }
  };
  const double reach = duration + support.radius;
  // Fibonacci directions.
  constexpr int kDirections = 4000;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (const SpatialPoint& p : probes) {
    extend(p.coords);
    if (geodesic_distance(support.center, p) > reach) continue;
    for (int d = 0; d < kDirections; ++d) {
      const double cz = 1.0 - (2.0 * d + 1.0) / kDirections;
      const double sr = std::sqrt(std::max(0.0, 1.0 - cz * cz));
      const Vec3 dir{sr * std::cos(golden * d), sr * std::sin(golden * d), cz};
      // s + d(exp(s dir), p) is non-decreasing in s; bisect for the boundary of E.
      double a = 0.0;
      double b = reach;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        const SpatialPoint y = exponential_map(support.center, dir, m);
        if (m + geodesic_distance(y, p) <= reach) {
          a = m;
        } else {
          b = m;
        }
      }
      extend(exponential_map(support.center, dir, b).coords);
    }
  }
  return box;
}

std::vector<SpatialPoint> oracle_probes(const GeodesicBall& support, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("oracle_probes: radius must be > 0");
  // Hyperbolic: z(exp(r w)) = z0 / (cosh r - cos(a) sinh r) equals z0 when cos(a) = tanh(r/2).
  const double cos_a = support.center.chart == Curvature::Flat ? 0.0 : std::tanh(0.5 * r);
  const double sin_a = std::sqrt(1.0 - cos_a * cos_a);
  const Vec3 main{sin_a, 0.0, cos_a};
  const Vec3 side{0.0, 1.0, 0.0};
  const Vec3 up{-cos_a, 0.0, sin_a};
  const std::array<double, 4> offsets{-0.45, -0.1, 0.1, 0.4};
  const std::array<Vec3, 4> tilts{Vec3{0.02, 0.0, 0.0}, Vec3{0.0, 0.0, 0.04}, Vec3{-0.03, 0.0, 0.0},
                                  Vec3{0.0, 0.0, -0.02}};
  std::vector<SpatialPoint> out;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    Vec3 dir = main + tilts[k].x * side + tilts[k].z * up;
    dir = dir / norm(dir);
    out.push_back(exponential_map(support.center, dir, r + offsets[k] * support.radius));
  }
  return out;
}

GridSpec plan_grid(const CauchyProblem& problem, std::span<const SpatialPoint> probes, double tau,
                   double mass_shift, const OracleOptions& options) {
  problem.validate();
  if (options.n < 5 || options.n > 1024) throw std::invalid_argument("oracle: n out of range");
  const double duration = tau - problem.tau0;
  if (!(duration > 0.0)) throw std::invalid_argument("oracle: tau must exceed tau0");
  if (probes.empty()) throw std::invalid_argument("oracle: no probes");
  const VectorField data = problem.f + problem.g;
  InfluenceBox box{probes.front().coords, probes.front().coords};
  if (data.is_zero()) {
    for (const auto& p : probes) {
      for (int a = 0; a < 3; ++a) {
        box.lo[a] = std::min(box.lo[a], p.coords[a]);
        box.hi[a] = std::max(box.hi[a], p.coords[a]);
      }
    }
    box.lo -= Vec3{0.5, 0.5, 0.0};
    box.hi += Vec3{0.5, 0.5, 0.0};
  } else {
    const auto support = data.geodesic_support();
    if (!support) throw std::invalid_argument("oracle: data must be compactly supported bumps");
    box = influence_box(*support, probes, duration);
  }
  double needed = 0.0;
  for (int a = 0; a < 3; ++a) needed = std::max(needed, box.hi[a] - box.lo[a]);
  needed = std::max(needed, 1e-6);
  const int pad = halo(options.scheme_order) + options.margin_cells;
  if (options.n - 1 - 2 * pad < 2) throw std::invalid_argument("oracle: n too small for the margin");
  const double dx = needed / (options.n - 1 - 2 * pad);
  const double side = dx * (options.n - 1);
  Vec3 lo;
  for (int a = 0; a < 3; ++a) lo[a] = 0.5 * (box.lo[a] + box.hi[a]) - 0.5 * side;
  if (problem.curvature == Curvature::Hyperbolic) {
    lo.z = std::max(lo.z, box.lo.z - pad * dx);
    if (!(lo.z > 0.0)) {
      throw std::invalid_argument("oracle: influence region reaches the boundary plane z = 0");
    }
  }
  return make_grid(lo, side, options.n, duration, problem.curvature, mass_shift,
                   options.scheme_order);
}

OracleComparison compare_with_oracle(const CauchyProblem& problem,
                                     std::span<const SpatialPoint> probes, double tau,
                                     double mass_shift, const OracleOptions& options) {
  OracleComparison out;
  out.grid = plan_grid(problem, probes, tau, mass_shift, options);
  out.tau = tau;
  const GridSpec& grid = out.grid;
  const double duration = tau - problem.tau0;

  std::vector<SpatialPoint> points;
  std::vector<std::array<int, 3>> nodes;
  for (const auto& p : probes) {
    if (p.chart != problem.curvature) throw std::invalid_argument("oracle: probe chart mismatch");
    const auto ijk = nearest_node(grid, p.coords);
    nodes.push_back(ijk);
    points.push_back(options.snap_to_nodes ? SpatialPoint{grid.node(ijk[0], ijk[1], ijk[2]), p.chart}
                                           : p);
  }

  GridState state = initialize(grid, problem.f, problem.g);
  const bool flat = grid.curvature == Curvature::Flat;
  const double e0 = flat ? discrete_energy(state, grid) : 0.0;
  advance_to(state, grid, duration);
  if (flat && e0 != 0.0) out.energy_drift = std::fabs(discrete_energy(state, grid) - e0) / std::fabs(e0);
  out.max_amplitude = max_amplitude(state);
  if (!options.dump_path.empty()) dump_raw(state, grid, options.dump_path);

  std::vector<SpacetimePoint> samples;
  for (const auto& p : points) samples.push_back({tau, p});
  SolveOptions solve_options;
  solve_options.order = options.quadrature_order;
  solve_options.time_derivative = false;
  const auto formula = solve_batch(problem, samples, solve_options);

  for (std::size_t i = 0; i < points.size(); ++i) {
    ProbeComparison row;
    row.point = points[i];
    row.formula = formula[i].A;
    row.oracle = options.snap_to_nodes ? node_value(state, grid, nodes[i])
                                       : sample(state, grid, points[i].coords);
    out.max_abs_diff = std::max(out.max_abs_diff, max_abs(row.formula - row.oracle));
    out.max_abs_formula = std::max(out.max_abs_formula, max_abs(row.formula));
    out.probes.push_back(row);
  }
  if (out.max_abs_formula > 0.0) {
    out.relative_linf = out.max_abs_diff / out.max_abs_formula;
  } else {
    out.relative_linf = out.max_abs_diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return out;
}

PdeReport identify_hyperbolic_pde(const CauchyProblem& problem,
                                  std::span<const SpatialPoint> probes, double tau,
                                  const OracleOptions& options) {
  if (options.n > 160) throw std::invalid_argument("identify_hyperbolic_pde: n must be <= 160");
  PdeReport report;
  report.mass0 = compare_with_oracle(problem, probes, tau, 0.0, options);
  report.mass1 = compare_with_oracle(problem, probes, tau, 1.0, options);
  report.distance_mass0 = report.mass0.relative_linf;
  report.distance_mass1 = report.mass1.relative_linf;
  if (report.mass0.max_abs_formula == 0.0) {
    report.verdict = "degenerate";
  } else if (report.distance_mass0 <= kPdeMatchTolerance &&
             report.distance_mass1 >= kPdeRejectThreshold) {
    report.verdict = "mass_shift=0";
    report.matching_mass_shift = 0;
  } else if (report.distance_mass1 <= kPdeMatchTolerance &&
             report.distance_mass0 >= kPdeRejectThreshold) {
    report.verdict = "mass_shift=1";
    report.matching_mass_shift = 1;
  } else {
    report.verdict = "inconclusive";
  }
  return report;
}

}  // namespace frwmax
