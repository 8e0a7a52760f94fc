#include "frwmax/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>

namespace frwmax {

void CauchyProblem::validate() const {
  if (f.chart() != curvature || g.chart() != curvature) {
    throw std::invalid_argument("CauchyProblem: data chart does not match the curvature");
  }
  if (!std::isfinite(tau0) || tau0 < 0.0) {
    throw std::invalid_argument("CauchyProblem: tau0 must be finite and >= 0");
  }
}

namespace {

constexpr double kInvFourPi = 1.0 / (4.0 * std::numbers::pi);

void require_point_in_chart(const CauchyProblem& problem, const SpatialPoint& x) {
  if (x.chart != problem.curvature) throw std::invalid_argument("x: chart mismatch");
  if (!x.valid()) throw std::invalid_argument("x: point outside the chart");
}

void accumulate_bump(const VectorField::Bump& bump, Curvature chart, const SpatialPoint& center,
                     double r, int order, bool with_derivative, RadialMeans& out) {
  const GeodesicBall ball = geodesic_ball_of({bump.center, chart}, bump.radius);
  const auto cap = sphere_ball_cap(center, r, ball);
  if (!cap) return;
  double mean = 0.0;
  double derivative = 0.0;
  for_each_cap_node(center, r, order, cap->pole, cap->v_max,
                    [&](const SpatialPoint& y, const Vec3& velocity, double w) {
                      if (with_derivative) {
                        Vec3 grad;
                        const double s = bump.shape(y.coords, grad);
                        if (s == 0.0) return;
                        mean += w * s;
                        derivative += w * dot(grad, velocity);
                      } else {
                        mean += w * bump.shape(y.coords);
                      }
                    });
  out.mean += (mean * kInvFourPi) * bump.amplitude;
  out.derivative += (derivative * kInvFourPi) * bump.amplitude;
}

void accumulate_analytic(const VectorField::Analytic& term, const VectorField& field,
                         const SpatialPoint& center, double r, int order, bool with_derivative,
                         RadialMeans& out) {
  Vec3 mean{};
  Vec3 derivative{};
  VectorField single(field.chart());
  single.add_term(term);
  for_each_cap_node(center, r, order, {0.0, 0.0, 1.0}, 2.0,
                    [&](const SpatialPoint& y, const Vec3& velocity, double w) {
                      mean += w * term.value(y);
                      if (with_derivative) {
                        const Jacobian jac = single.jacobian(y);
                        for (int mu = 0; mu < 3; ++mu) derivative[mu] += w * dot(jac[mu], velocity);
                      }
                    });
  out.mean += kInvFourPi * mean;
  out.derivative += kInvFourPi * derivative;
}

// M'(rho) extended as an odd function of the radius.
Vec3 odd_mean_derivative(const VectorField& field, const SpatialPoint& x, double rho, int order) {
  if (rho == 0.0) return {};
  const Vec3 d = spherical_means(field, x, std::fabs(rho), order, true).derivative;
  return rho > 0.0 ? d : -d;
}

// Shared evaluation path. r = tau - tau0 may be negative (reflected branch).
SolutionSample evaluate(const CauchyProblem& problem, double tau, const SpatialPoint& x,
                        const SolveOptions& options) {
  const double r = tau - problem.tau0;
  SolutionSample sample;
  sample.point = {tau, x};
  sample.quadrature_order = options.order;

  if (std::fabs(r) < kNearZeroRadius) {
    const Vec3 g0 = problem.g.eval(x);
    sample.A = problem.f.eval(x) + r * g0;
    if (options.time_derivative) sample.A_tau = g0;
    return sample;
  }

  const double rho = std::fabs(r);
  const double sign = r > 0.0 ? 1.0 : -1.0;
  const RadialMeans mf = spherical_means(problem.f, x, rho, options.order, true);
  const RadialMeans mg =
      spherical_means(problem.g, x, rho, options.order, options.time_derivative);
  // Even extension: M(r) = M(|r|), M'(r) = sign(r) M'(|r|), M''(r) = M''(|r|).
  const Vec3 dmf = sign * mf.derivative;
  const Vec3 dmg = sign * mg.derivative;

  Vec3 d2mf{};
  if (options.time_derivative) {
    const double h = 1e-4 * std::max(1.0, rho);
    d2mf = (odd_mean_derivative(problem.f, x, rho + h, options.order) -
            odd_mean_derivative(problem.f, x, rho - h, options.order)) /
           (2.0 * h);
  }

  if (problem.curvature == Curvature::Flat) {
    sample.A = mf.mean + r * dmf + r * mg.mean;
    if (options.time_derivative) {
      sample.A_tau = 2.0 * dmf + r * d2mf + mg.mean + r * dmg;
    }
  } else {
    const double sh = std::sinh(r);
    const double ch = std::cosh(r);
    sample.A = ch * mf.mean + sh * dmf + sh * mg.mean;
    if (options.time_derivative) {
      sample.A_tau = sh * mf.mean + 2.0 * ch * dmf + sh * d2mf + ch * mg.mean + sh * dmg;
    }
  }
  return sample;
}

void require_forward(const CauchyProblem& problem, double tau) {
  if (!std::isfinite(tau) || !(tau > problem.tau0)) {
    throw std::invalid_argument("tau must be greater than tau0 (tau = " + std::to_string(tau) +
                                ", tau0 = " + std::to_string(problem.tau0) + ")");
  }
}

}  // namespace

RadialMeans spherical_means(const VectorField& field, const SpatialPoint& center, double r,
                            int order, bool with_derivative) {
  if (center.chart != field.chart()) throw std::invalid_argument("spherical_means: chart mismatch");
  if (!(r > 0.0)) throw std::invalid_argument("spherical_means: radius must be > 0");
  if (order < kMinQuadratureOrder) {
    throw std::invalid_argument("spherical_means: order must be >= " +
                                std::to_string(kMinQuadratureOrder));
  }
  RadialMeans out;
  for (const auto& term : field.terms()) {
    if (const auto* bump = std::get_if<VectorField::Bump>(&term)) {
      accumulate_bump(*bump, field.chart(), center, r, order, with_derivative, out);
    } else {
      accumulate_analytic(std::get<VectorField::Analytic>(term), field, center, r, order,
                          with_derivative, out);
    }
  }
  return out;
}

Vec3 spherical_mean(const VectorField& field, const SpatialPoint& center, double r, int order) {
  return spherical_means(field, center, r, order, false).mean;
}

SolutionSample solve_flat(const CauchyProblem& problem, double tau, const SpatialPoint& x,
                          const SolveOptions& options) {
  problem.validate();
  if (problem.curvature != Curvature::Flat) throw std::invalid_argument("solve_flat: K != 0");
  require_point_in_chart(problem, x);
  require_forward(problem, tau);
  return evaluate(problem, tau, x, options);
}

SolutionSample solve_hyperbolic(const CauchyProblem& problem, double tau, const SpatialPoint& x,
                                const SolveOptions& options) {
  problem.validate();
  if (problem.curvature != Curvature::Hyperbolic) {
    throw std::invalid_argument("solve_hyperbolic: K != -1");
  }
  require_point_in_chart(problem, x);
  require_forward(problem, tau);
  return evaluate(problem, tau, x, options);
}

SolutionSample solve(const CauchyProblem& problem, double tau, const SpatialPoint& x,
                     const SolveOptions& options) {
  return problem.curvature == Curvature::Flat ? solve_flat(problem, tau, x, options)
                                              : solve_hyperbolic(problem, tau, x, options);
}

SolutionSample solve_from_singularity(const CauchyProblem& problem, double tau,
                                      const SpatialPoint& x, const SolveOptions& options) {
  problem.validate();
  if (problem.tau0 != 0.0) throw std::invalid_argument("solve_from_singularity: tau0 must be 0");
  require_point_in_chart(problem, x);
  if (!std::isfinite(tau) || tau == 0.0) {
    throw std::invalid_argument("solve_from_singularity: tau must be finite and non-zero");
  }
  return evaluate(problem, tau, x, options);
}

std::pair<Vec3, Vec3> limit_at_singularity(const CauchyProblem& problem, const SpatialPoint& x) {
  problem.validate();
  if (problem.tau0 != 0.0) throw std::invalid_argument("limit_at_singularity: tau0 must be 0");
  require_point_in_chart(problem, x);
  return {problem.f.eval(x), problem.g.eval(x)};
}

SingularLimitCheck check_singular_limit(const CauchyProblem& problem, const SpatialPoint& x,
                                        const SolveOptions& options, int levels) {
  if (levels < 2) throw std::invalid_argument("check_singular_limit: need at least 2 levels");
  const auto [f0, g0] = limit_at_singularity(problem, x);
  // Richardson table for a power series in tau with halving steps.
  std::vector<std::vector<Vec3>> a_table(levels);
  std::vector<std::vector<Vec3>> at_table(levels);
  SolveOptions opts = options;
  opts.time_derivative = true;
  for (int k = 0; k < levels; ++k) {
    const double tau = 0.2 * std::ldexp(1.0, -k);
    const SolutionSample s = solve_from_singularity(problem, tau, x, opts);
    a_table[k].push_back(s.A);
    at_table[k].push_back(s.A_tau);
    for (int j = 1; j <= k; ++j) {
      const double factor = std::ldexp(1.0, j) - 1.0;
      a_table[k].push_back(a_table[k][j - 1] + (a_table[k][j - 1] - a_table[k - 1][j - 1]) / factor);
      at_table[k].push_back(at_table[k][j - 1] +
                            (at_table[k][j - 1] - at_table[k - 1][j - 1]) / factor);
    }
  }
  SingularLimitCheck check;
  check.A_limit = f0;
  check.A_tau_limit = g0;
  check.A_extrapolated = a_table.back().back();
  check.A_tau_extrapolated = at_table.back().back();
  check.error_A = max_abs(check.A_extrapolated - f0);
  check.error_A_tau = max_abs(check.A_tau_extrapolated - g0);
  return check;
}

int configured_threads() {
  if (const char* env = std::getenv("FRWMAX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SolutionSample> solve_batch(const CauchyProblem& problem,
                                        std::span<const SpacetimePoint> points,
                                        const SolveOptions& options, int threads) {
  problem.validate();
  std::vector<SolutionSample> out(points.size());
  auto one = [&](std::size_t i) {
    out[i] = problem.tau0 == 0.0 ? solve_from_singularity(problem, points[i].tau, points[i].x, options)
                                 : solve(problem, points[i].tau, points[i].x, options);
  };
  const int workers =
      std::min<int>(threads > 0 ? threads : configured_threads(), static_cast<int>(points.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) one(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < points.size(); i += workers) one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace frwmax
