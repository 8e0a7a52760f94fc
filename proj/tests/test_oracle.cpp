#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "frwmax/oracle.hpp"

using namespace frwmax;
using std::numbers::pi;

namespace {

CauchyProblem flat_bump(double tau0 = 0.0) {
  return {Curvature::Flat, make_bump(SpatialPoint::flat(0, 0, 0), 1.0, {1.0, 0.0, 0.0}),
          make_bump(SpatialPoint::flat(0, 0, 0), 1.0, {0.5, 0.0, 0.0}), tau0};
}

}  // namespace

TEST_CASE("grid construction enforces CFL and the chart") {
  const GridSpec g = make_grid({-1, -1, -1}, 2.0, 21, 1.0, Curvature::Flat, 0.0, 2);
  CHECK(g.dt <= g.max_dt());
  CHECK(std::fabs(std::round(1.0 / g.dt) * g.dt - 1.0) < 1e-12);
  GridSpec bad = g;
  bad.dt = 2.0 * g.max_dt();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({-1, -1, -1}, 2.0, 21, 1.0, Curvature::Hyperbolic),
                  std::invalid_argument);
  bad = g;
  bad.scheme_order = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  const GridSpec h = make_grid({-1, -1, 0.5}, 2.0, 21, 1.0, Curvature::Hyperbolic);
  CHECK(h.dt <= 0.5 * h.dx / std::sqrt(3.0) / h.z_max() + 1e-15);
}

TEST_CASE("zero state stays zero") {
  for (int order : {2, 4}) {
    const GridSpec g = make_grid({-1, -1, -1}, 2.0, 17, 0.5, Curvature::Flat, 0.0, order);
    const auto zero = VectorField::zero(Curvature::Flat);
    GridState s = initialize(g, zero, zero);
    advance_to(s, g, 0.5);
    CHECK(max_amplitude(s) == 0.0);
    CHECK(s.steps == static_cast<long>(std::lround(0.5 / g.dt)));
  }
}

TEST_CASE("standing wave dispersion error is second order") {
  // sin(pi x) sin(pi y) sin(pi z) cos(sqrt(3) pi tau) on [0, 1]^3 vanishes on
  // the Dirichlet layer of the second-order scheme.
  const double omega = std::sqrt(3.0) * pi;
  const double period = 2.0 * pi / omega;
  auto error_at = [&](int n) {
    const GridSpec g = make_grid({0, 0, 0}, 1.0, n, period, Curvature::Flat, 0.0, 2);
    const auto mode = VectorField::analytic(Curvature::Flat, [](const SpatialPoint& p) {
      const Vec3& c = p.coords;
      return Vec3{std::sin(pi * c.x) * std::sin(pi * c.y) * std::sin(pi * c.z), 0.0, 0.0};
    });
    GridState s = initialize(g, mode, VectorField::zero(Curvature::Flat));
    advance_to(s, g, period);
    double err = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double exact = mode.eval({g.node(i, j, k), Curvature::Flat}).x * std::cos(omega * s.tau);
          err = std::max(err, std::fabs(node_value(s, g, {i, j, k}).x - exact));
        }
      }
    }
    return err;
  };
  const double coarse = error_at(17);
  const double fine = error_at(33);
  CHECK(coarse < 0.1);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("flat discrete energy drift over 1000 steps") {
  const auto p = flat_bump();
  for (int order : {2, 4}) {
    const GridSpec base = make_grid({-2, -2, -2}, 4.0, 41, 1.0, Curvature::Flat, 0.0, order);
    GridSpec g = base;
    GridState s = initialize(g, p.f, p.g);
    const double e0 = discrete_energy(s, g);
    for (int i = 0; i < 1000; ++i) fd_step(s, g);
    const double e1 = discrete_energy(s, g);
    CHECK(e0 > 0.0);
    CHECK(std::fabs(e1 - e0) / e0 <= 1e-3);
  }
}

TEST_CASE("oracle converges to the formula under refinement") {
  const auto p = flat_bump(1.0);
  const auto probes = oracle_probes(*(p.f + p.g).geodesic_support(), 1.0);
  for (int order : {2, 4}) {
    OracleOptions coarse;
    coarse.scheme_order = order;
    coarse.n = 40;
    // Same box with twice the interior cells: dx halves exactly.
    const int pad = order / 2 + coarse.margin_cells;
    OracleOptions fine = coarse;
    fine.n = 2 * (coarse.n - 1 - 2 * pad) + 1 + 2 * pad;
    const auto a = compare_with_oracle(p, probes, 2.0, 0.0, coarse);
    const auto b = compare_with_oracle(p, probes, 2.0, 0.0, fine);
    CHECK(a.grid.dx == doctest::Approx(2.0 * b.grid.dx).epsilon(1e-12));
    CHECK(a.max_abs_diff / b.max_abs_diff >= 3.0);
  }
}

TEST_CASE("probes inside the domain of dependence ignore the box size") {
  const auto p = flat_bump();
  const double duration = 0.8;
  const GridSpec small = make_grid({-2, -2, -2}, 4.0, 41, duration, Curvature::Flat, 0.0, 4);
  GridSpec large = small;
  large.n = 51;  // 25% larger, same dx and dt
  large.lo = small.lo - Vec3{5, 5, 5} * small.dx;
  large.validate();
  GridState a = initialize(small, p.f, p.g);
  GridState b = initialize(large, p.f, p.g);
  advance_to(a, small, duration);
  advance_to(b, large, duration);
  double peak = 0.0;
  double diff = 0.0;
  for (int k = 10; k <= 30; ++k) {
    for (int j = 10; j <= 30; ++j) {
      for (int i = 10; i <= 30; ++i) {
        const Vec3 va = node_value(a, small, {i, j, k});
        const Vec3 vb = node_value(b, large, {i + 5, j + 5, k + 5});
        peak = std::max(peak, max_abs(va));
        diff = std::max(diff, max_abs(va - vb));
      }
    }
  }
  CHECK(peak > 1e-3);
  CHECK(diff <= 1e-10 * peak);
}

TEST_CASE("tricubic sampling reproduces cubic polynomials") {
  const GridSpec g = make_grid({0, 0, 0}, 1.0, 11, 0.1, Curvature::Flat, 0.0, 2);
  const auto cubic = VectorField::analytic(Curvature::Flat, [](const SpatialPoint& p) {
    const Vec3& c = p.coords;
    return Vec3{c.x * c.x * c.y - c.z * c.z * c.z, 1.0 + c.y, c.x * c.y * c.z};
  });
  GridState s = initialize(g, cubic, VectorField::zero(Curvature::Flat));
  s.curr = s.prev;  // the projected data
  const Vec3 p{0.43, 0.52, 0.61};
  CHECK(max_abs(sample(s, g, p) - cubic.eval({p, Curvature::Flat})) < 1e-13);
  CHECK_THROWS_AS(sample(s, g, {0.01, 0.5, 0.5}), std::out_of_range);
  CHECK_THROWS_AS(nearest_node(g, {2.0, 0.5, 0.5}), std::out_of_range);
}

TEST_CASE("raw dump layout") {
  const GridSpec g = make_grid({-1, -1, -1}, 2.0, 9, 0.2, Curvature::Flat, 0.0, 2);
  const auto p = flat_bump();
  GridState s = initialize(g, p.f, p.g);
  advance_to(s, g, 0.2);
  const auto path = std::filesystem::temp_directory_path() / "frwmax_dump_test.bin";
  dump_raw(s, g, path.string());
  std::ifstream in(path, std::ios::binary);
  std::int64_t n = 0;
  double dx = 0;
  double dt = 0;
  double tau = 0;
  std::int64_t comps = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&dx), 8);
  in.read(reinterpret_cast<char*>(&dt), 8);
  in.read(reinterpret_cast<char*>(&tau), 8);
  in.read(reinterpret_cast<char*>(&comps), 8);
  CHECK(n == 9);
  CHECK(dx == g.dx);
  CHECK(dt == g.dt);
  CHECK(tau == s.tau);
  CHECK(comps == 3);
  std::vector<double> payload(3 * g.size());
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(8 * payload.size()));
  CHECK(in.good());
  CHECK(payload[g.index(4, 4, 4)] == s.curr[0][g.index(4, 4, 4)]);
  CHECK(payload[g.size() + g.index(4, 4, 4)] == 0.0);
  in.close();
  std::filesystem::remove(path);
}

TEST_CASE("flat sanity run matches the unshifted oracle") {
  const auto p = flat_bump(0.0);
  const auto probes = oracle_probes(*(p.f + p.g).geodesic_support(), 1.0);
  OracleOptions o;
  o.n = 96;
  const auto cmp = compare_with_oracle(p, probes, 1.0, 0.0, o);
  CHECK(cmp.relative_linf < 1e-3);
  CHECK(cmp.energy_drift < 1e-10);
  CHECK(compare_with_oracle(p, probes, 1.0, 1.0, o).relative_linf > 1e-2);
}

TEST_CASE("g-only flat data at the origin, tau - tau0 = 3, n = 128") {
  // A = r M_g(r, 0) at the origin; the sphere of radius 3 misses the support,
  // so the neighbouring shell probes carry the scale.
  const CauchyProblem p{Curvature::Flat, VectorField::zero(Curvature::Flat),
                        make_bump(SpatialPoint::flat(0, 0, 0), 1.0, {1.0, 0.0, 0.0}), 0.0};
  const std::vector<SpatialPoint> probes{SpatialPoint::flat(0, 0, 0), SpatialPoint::flat(2.6, 0, 0),
                                         SpatialPoint::flat(2.9, 0.1, 0),
                                         SpatialPoint::flat(3.3, 0, 0.1)};
  OracleOptions o;
  o.n = 128;
  const auto cmp = compare_with_oracle(p, probes, 3.0, 0.0, o);
  const Vec3 origin = cmp.probes.front().formula;
  CHECK(origin == Vec3{});
  CHECK(cmp.max_abs_formula > 1e-3);
  CHECK(cmp.relative_linf <= 1e-3);
}

TEST_CASE("identification report on zero data is degenerate") {
  const CauchyProblem p{Curvature::Hyperbolic, VectorField::zero(Curvature::Hyperbolic),
                        VectorField::zero(Curvature::Hyperbolic), 0.0};
  const std::vector<SpatialPoint> probes{SpatialPoint::hyperbolic(0, 0, 1),
                                         SpatialPoint::hyperbolic(0.2, 0, 1.1)};
  OracleOptions o;
  o.n = 24;
  const auto report = identify_hyperbolic_pde(p, probes, 0.5, o);
  CHECK(report.verdict == "degenerate");
  CHECK(report.distance_mass0 == 0.0);
  CHECK(report.distance_mass1 == 0.0);
  o.n = 200;
  CHECK_THROWS_AS(identify_hyperbolic_pde(p, probes, 0.5, o), std::invalid_argument);
}

TEST_CASE("hyperbolic oracle stays bounded and identifies the shifted operator") {
  const CauchyProblem p{Curvature::Hyperbolic,
                        make_bump(SpatialPoint::hyperbolic(0, 0, 1), 0.3, {1.0, 0.0, 0.0}),
                        VectorField::zero(Curvature::Hyperbolic), 0.0};
  const auto probes = oracle_probes(*p.f.geodesic_support(), 0.6);
  OracleOptions o;
  o.n = 64;
  const auto shifted = compare_with_oracle(p, probes, 0.6, 1.0, o);
  const auto plain = compare_with_oracle(p, probes, 0.6, 0.0, o);
  CHECK(shifted.max_amplitude < 1.0);
  CHECK(shifted.relative_linf < plain.relative_linf);
}
