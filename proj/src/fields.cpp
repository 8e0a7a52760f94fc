#include "frwmax/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frwmax {
namespace {

// Below this value of 1 - s^2 the bump underflows: exp(-1/q) < 1e-304.
constexpr double kBumpCutoff = 1.0 / 700.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Jacobian finite_difference_jacobian(const VectorField::ValueFn& value, const SpatialPoint& y) {
  Jacobian jac{};
  for (int axis = 0; axis < 3; ++axis) {
    const double h = 1e-6 * std::max(1.0, std::fabs(y.coords[axis]));
    SpatialPoint plus = y;
    SpatialPoint minus = y;
    plus.coords[axis] += h;
    minus.coords[axis] -= h;
    const Vec3 d = (value(plus) - value(minus)) / (2.0 * h);
    for (int mu = 0; mu < 3; ++mu) jac[mu][axis] = d[mu];
  }
  return jac;
}

}  // namespace

double VectorField::Bump::shape(const Vec3& p) const {
  const double q = 1.0 - norm2(p - center) / (radius * radius);
  if (q <= kBumpCutoff) return 0.0;
  return std::exp(-1.0 / q);
}

double VectorField::Bump::shape(const Vec3& p, Vec3& gradient) const {
  const Vec3 offset = p - center;
  const double q = 1.0 - norm2(offset) / (radius * radius);
  if (q <= kBumpCutoff) {
    gradient = {};
    return 0.0;
  }
  const double value = std::exp(-1.0 / q);
  gradient = offset * (-2.0 * value / (q * q * radius * radius));
  return value;
}

VectorField VectorField::analytic(Curvature chart, ValueFn value, JacobianFn jacobian,
                                  Smoothness smoothness) {
  VectorField field(chart);
  field.terms_.push_back(Analytic{std::move(value), std::move(jacobian), smoothness});
  return field;
}

void VectorField::add_term(Term term) {
  if (const auto* bump = std::get_if<Bump>(&term)) {
    if (!(bump->radius > 0.0)) throw std::invalid_argument("bump radius must be > 0");
    if (chart_ == Curvature::Hyperbolic && bump->center.z - bump->radius <= 0.0) {
      throw std::invalid_argument(
          "hyperbolic bump support must stay clear of the boundary plane z = 0");
    }
  }
  terms_.push_back(std::move(term));
}

Smoothness VectorField::smoothness() const {
  Smoothness s = Smoothness::CInfinity;
  for (const auto& term : terms_) {
    if (const auto* a = std::get_if<Analytic>(&term)) s = std::min(s, a->smoothness);
  }
  return s;
}

Vec3 VectorField::eval(const SpatialPoint& y) const {
  if (y.chart != chart_) throw std::invalid_argument("VectorField::eval: chart mismatch");
  Vec3 out{};
  for (const auto& term : terms_) {
    std::visit(Overloaded{[&](const Bump& b) {
                            const double s = b.shape(y.coords);
                            if (s != 0.0) out += s * b.amplitude;
                          },
                          [&](const Analytic& a) { out += a.value(y); }},
               term);
  }
  return out;
}

Jacobian VectorField::jacobian(const SpatialPoint& y) const {
  if (y.chart != chart_) throw std::invalid_argument("VectorField::jacobian: chart mismatch");
  Jacobian out{};
  for (const auto& term : terms_) {
    std::visit(Overloaded{[&](const Bump& b) {
                            Vec3 grad;
                            if (b.shape(y.coords, grad) == 0.0) return;
                            for (int mu = 0; mu < 3; ++mu) out[mu] += b.amplitude[mu] * grad;
                          },
                          [&](const Analytic& a) {
                            const Jacobian j = a.jacobian ? a.jacobian(y)
                                                          : finite_difference_jacobian(a.value, y);
                            for (int mu = 0; mu < 3; ++mu) out[mu] += j[mu];
                          }},
               term);
  }
  return out;
}

std::optional<SupportBall> VectorField::support() const {
  std::vector<const Bump*> bumps;
  for (const auto& term : terms_) {
    const auto* b = std::get_if<Bump>(&term);
    if (b == nullptr) return std::nullopt;
    bumps.push_back(b);
  }
  if (bumps.empty()) return std::nullopt;
  Vec3 center{};
  for (const auto* b : bumps) center += b->center;
  center = center / static_cast<double>(bumps.size());
  double radius = 0.0;
  for (const auto* b : bumps) radius = std::max(radius, norm(b->center - center) + b->radius);
  return SupportBall{{center, chart_}, radius};
}

std::optional<GeodesicBall> VectorField::geodesic_support() const {
  if (chart_ == Curvature::Flat) {
    const auto ball = support();
    if (!ball) return std::nullopt;
    return GeodesicBall{ball->center, ball->radius};
  }
  std::vector<GeodesicBall> balls;
  for (const auto& term : terms_) {
    const auto* b = std::get_if<Bump>(&term);
    if (b == nullptr) return std::nullopt;
    balls.push_back(geodesic_ball_of({b->center, chart_}, b->radius));
  }
  if (balls.empty()) return std::nullopt;
  GeodesicBall out = balls.front();
  for (const auto& ball : balls) {
    out.radius = std::max(out.radius, geodesic_distance(out.center, ball.center) + ball.radius);
  }
  return out;
}

VectorField VectorField::scaled(double factor) const {
  VectorField out(chart_);
  for (const auto& term : terms_) {
    std::visit(Overloaded{[&](const Bump& b) {
                            out.terms_.push_back(Bump{b.center, b.radius, factor * b.amplitude});
                          },
                          [&](const Analytic& a) {
                            Analytic scaled{
                                [value = a.value, factor](const SpatialPoint& y) {
                                  return factor * value(y);
                                },
                                {},
                                a.smoothness};
                            if (a.jacobian) {
                              scaled.jacobian = [jac = a.jacobian, factor](const SpatialPoint& y) {
                                Jacobian j = jac(y);
                                for (auto& row : j) row *= factor;
                                return j;
                              };
                            }
                            out.terms_.push_back(std::move(scaled));
                          }},
               term);
  }
  return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.chart_ != b.chart_) throw std::invalid_argument("VectorField sum: chart mismatch");
  VectorField out = a;
  out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
  return out;
}

VectorField make_bump(const SpatialPoint& center, double radius, const Vec3& amplitude) {
  if (!center.valid()) throw std::invalid_argument("make_bump: centre outside the chart");
  VectorField field(center.chart);
  field.add_term(VectorField::Bump{center.coords, radius, amplitude});
  return field;
}

namespace {

// Sample lattice over every bump ball, plus the centres.
template <class Visit>
void for_each_sample(const VectorField& field, int resolution, Visit&& visit) {
  for (const auto& term : field.terms()) {
    const auto* b = std::get_if<VectorField::Bump>(&term);
    if (b == nullptr) continue;
    visit(SpatialPoint{b->center, field.chart()});
    const double step = 2.0 * b->radius / resolution;
    for (int i = 0; i <= resolution; ++i) {
      for (int j = 0; j <= resolution; ++j) {
        for (int k = 0; k <= resolution; ++k) {
          const Vec3 p = b->center + Vec3{-b->radius + i * step, -b->radius + j * step,
                                          -b->radius + k * step};
          if (norm2(p - b->center) >= b->radius * b->radius) continue;
          visit(SpatialPoint{p, field.chart()});
        }
      }
    }
  }
}

}  // namespace

DataNorms data_norms(const VectorField& f, const VectorField& g, int resolution) {
  if (resolution < 1) throw std::invalid_argument("data_norms: resolution must be >= 1");
  DataNorms norms;
  norms.resolution = resolution;
  auto sup_f = [&](const SpatialPoint& y) {
    const Vec3 fv = f.eval(y);
    const Jacobian jac = f.jacobian(y);
    const double metric = y.chart == Curvature::Flat ? 1.0 : y.coords.z;
    for (int mu = 0; mu < 3; ++mu) {
      const double grad = metric * norm(jac[mu]);
      norms.c_f = std::max(norms.c_f, std::sqrt(fv[mu] * fv[mu] + grad * grad));
    }
  };
  auto sup_g = [&](const SpatialPoint& y) { norms.c_g = std::max(norms.c_g, max_abs(g.eval(y))); };
  // Each field is sampled over both supports so the suprema see all the data.
  for_each_sample(f, resolution, sup_f);
  for_each_sample(g, resolution, sup_f);
  for_each_sample(f, resolution, sup_g);
  for_each_sample(g, resolution, sup_g);
  return norms;
}

double max_divergence(const VectorField& f, int resolution) {
  double out = 0.0;
  for_each_sample(f, resolution, [&](const SpatialPoint& y) {
    const Jacobian jac = f.jacobian(y);
    out = std::max(out, std::fabs(jac[0].x + jac[1].y + jac[2].z));
  });
  return out;
}

}  // namespace frwmax
