#include "frwmax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "frwmax/quadrature.hpp"

namespace frwmax {

std::string_view to_string(Curvature k) { return k == Curvature::Flat ? "flat" : "hyperbolic"; }

Curvature curvature_from_string(std::string_view name) {
  if (name == "flat" || name == "0" || name == "K=0") return Curvature::Flat;
  if (name == "hyperbolic" || name == "-1" || name == "K=-1") return Curvature::Hyperbolic;
  throw std::invalid_argument("unknown curvature '" + std::string(name) + "'");
}

namespace {

void require_point(const SpatialPoint& p, const char* what) {
  if (!p.valid()) {
    throw std::domain_error(std::string(what) +
                            ": point outside the chart (hyperbolic points need z > 0)");
  }
}

void require_same_chart(const SpatialPoint& p, const SpatialPoint& q, const char* what) {
  if (p.chart != q.chart) throw std::invalid_argument(std::string(what) + ": chart mismatch");
  require_point(p, what);
  require_point(q, what);
}

Vec3 normalized(const Vec3& v) { return v / norm(v); }

// sin^2(alpha/2) and cos^2(alpha/2) for the angle alpha between dir and +z,
// without cancellation near alpha = 0 or pi.
void half_angle_squares(const Vec3& dir, double& s2, double& c2) {
  const double h2 = dir.x * dir.x + dir.y * dir.y;
  if (dir.z >= 0.0) {
    c2 = 0.5 * (1.0 + dir.z);
    s2 = h2 / (2.0 * (1.0 + dir.z));
  } else {
    s2 = 0.5 * (1.0 - dir.z);
    c2 = h2 / (2.0 * (1.0 - dir.z));
  }
}

}  // namespace

double geodesic_distance(const SpatialPoint& p, const SpatialPoint& q) {
  require_same_chart(p, q, "geodesic_distance");
  const double euclid = norm(p.coords - q.coords);
  if (p.chart == Curvature::Flat) return euclid;
  // cosh d = 1 + |p-q|^2 / (2 z_p z_q), written through sinh(d/2).
  return 2.0 * std::asinh(euclid / (2.0 * std::sqrt(p.coords.z * q.coords.z)));
}

Vec3 initial_direction(const SpatialPoint& from, const SpatialPoint& to) {
  require_same_chart(from, to, "initial_direction");
  if (from.chart == Curvature::Flat) {
    const Vec3 d = to.coords - from.coords;
    const double n = norm(d);
    if (n == 0.0) throw std::domain_error("initial_direction: coincident points");
    return d / n;
  }
  // Move `from` to (0,0,1) by the isometry p -> (p - (a,b,0)) / c. The geodesic
  // from (0,0,1) to q is the circle orthogonal to {z=0} through both points; its
  // tangent at (0,0,1) is proportional to (2 q_h, |q|^2 - 1).
  const double c = from.coords.z;
  const double qx = (to.coords.x - from.coords.x) / c;
  const double qy = (to.coords.y - from.coords.y) / c;
  const double qz = to.coords.z / c;
  const Vec3 w{2.0 * qx, 2.0 * qy, qx * qx + qy * qy + (qz - 1.0) * (qz + 1.0)};
  const double n = norm(w);
  if (n == 0.0) throw std::domain_error("initial_direction: coincident points");
  return w / n;
}

GeodesicFan::GeodesicFan(const SpatialPoint& center, double r) : center_(center), r_(r) {
  if (center.chart == Curvature::Hyperbolic) {
    ep_ = std::exp(r);
    em_ = 1.0 / ep_;
    sh_ = std::sinh(r);
    ch_ = std::cosh(r);
  }
}

SpatialPoint GeodesicFan::point(const Vec3& dir, Vec3& velocity) const {
  if (center_.chart == Curvature::Flat) {
    velocity = dir;
    return {center_.coords + r_ * dir, Curvature::Flat};
  }
  double s2 = 0.0;
  double c2 = 0.0;
  half_angle_squares(dir, s2, c2);
  // q = cosh r - cos(alpha) sinh r and its r-derivative, alpha measured from +z.
  const double q = ep_ * s2 + em_ * c2;
  const double dq = ep_ * s2 - em_ * c2;
  const double z0 = center_.coords.z;
  const double inv_q = 1.0 / q;
  const double horizontal = z0 * (ch_ * q - sh_ * dq) * inv_q * inv_q;
  velocity = {dir.x * horizontal, dir.y * horizontal, -z0 * dq * inv_q * inv_q};
  const double lateral = z0 * sh_ * inv_q;
  return {{center_.coords.x + dir.x * lateral, center_.coords.y + dir.y * lateral, z0 * inv_q},
          Curvature::Hyperbolic};
}

SpatialPoint GeodesicFan::point(const Vec3& dir) const {
  Vec3 unused;
  return point(dir, unused);
}

Vec3 GeodesicFan::velocity(const Vec3& dir) const {
  Vec3 v;
  point(dir, v);
  return v;
}

SpatialPoint exponential_map(const SpatialPoint& center, const Vec3& dir, double r) {
  return GeodesicFan(center, r).point(dir);
}

Vec3 geodesic_velocity(const SpatialPoint& center, const Vec3& dir, double r) {
  return GeodesicFan(center, r).velocity(dir);
}

EuclideanSphere euclidean_realization(const SpatialPoint& center, double r) {
  if (center.chart == Curvature::Flat) return {center.coords, r};
  const double z0 = center.coords.z;
  return {{center.coords.x, center.coords.y, z0 * std::cosh(r)}, z0 * std::sinh(r)};
}

GeodesicBall geodesic_ball_of(const SpatialPoint& euclidean_center, double euclidean_radius) {
  require_point(euclidean_center, "geodesic_ball_of");
  if (!(euclidean_radius > 0.0)) throw std::invalid_argument("geodesic_ball_of: radius must be > 0");
  if (euclidean_center.chart == Curvature::Flat) return {euclidean_center, euclidean_radius};
  const double cz = euclidean_center.coords.z;
  if (euclidean_radius >= cz) {
    throw std::invalid_argument("geodesic_ball_of: ball touches the boundary plane z = 0");
  }
  const double hz = std::sqrt((cz - euclidean_radius) * (cz + euclidean_radius));
  return {SpatialPoint::hyperbolic(euclidean_center.coords.x, euclidean_center.coords.y, hz),
          std::atanh(euclidean_radius / cz)};
}

double SphereQuadrature::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace detail {

CapFrame make_cap_frame(const SpatialPoint& center, double r, int order, const Vec3& pole,
                        double v_max) {
  require_point(center, "sphere quadrature");
  if (!(r > 0.0)) throw std::invalid_argument("sphere quadrature: radius must be > 0");
  if (order < kMinQuadratureOrder) {
    throw std::invalid_argument("sphere quadrature: order must be >= " +
                                std::to_string(kMinQuadratureOrder));
  }
  if (!(v_max > 0.0)) throw std::invalid_argument("sphere quadrature: empty cap");
  CapFrame frame;
  frame.pole = normalized(pole);
  const Vec3 helper = std::fabs(frame.pole.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  frame.e1 = normalized(cross(frame.pole, helper));
  frame.e2 = cross(frame.pole, frame.e1);
  const GaussRule& gl = gauss_legendre(order);
  frame.v_nodes = gl.nodes.data();
  frame.v_weights = gl.weights.data();
  const int n_phi = 2 * order;
  frame.w_phi = 2.0 * std::numbers::pi / n_phi;
  frame.cos_phi.resize(n_phi);
  frame.sin_phi.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) {
    frame.cos_phi[j] = std::cos(frame.w_phi * j);
    frame.sin_phi[j] = std::sin(frame.w_phi * j);
  }
  frame.v_max = std::min(v_max, 2.0);
  return frame;
}

}  // namespace detail

SphereQuadrature build_cap_quadrature(const SpatialPoint& center, double r, int order,
                                      const Vec3& pole, double v_max) {
  SphereQuadrature quad;
  quad.center = center;
  quad.radius = r;
  quad.order = order;
  quad.pole = pole / norm(pole);
  quad.v_max = std::min(v_max, 2.0);
  const double area_factor =
      center.chart == Curvature::Flat ? r * r : std::sinh(r) * std::sinh(r);
  const std::size_t count = 2 * static_cast<std::size_t>(order) * order;
  quad.nodes.reserve(count);
  quad.outward.reserve(count);
  quad.weights.reserve(count);
  quad.angular_weights.reserve(count);
  for_each_cap_node(center, r, order, pole, v_max,
                    [&](const SpatialPoint& y, const Vec3& velocity, double w) {
                      quad.nodes.push_back(y);
                      quad.outward.push_back(velocity);
                      quad.angular_weights.push_back(w);
                      quad.weights.push_back(w * area_factor);
                    });
  return quad;
}

SphereQuadrature build_sphere_quadrature(const SpatialPoint& center, double r, int order) {
  return build_cap_quadrature(center, r, order, {0.0, 0.0, 1.0}, 2.0);
}

std::optional<SphereCap> sphere_ball_cap(const SpatialPoint& center, double r,
                                         const GeodesicBall& ball) {
  const double dist = geodesic_distance(center, ball.center);
  const double rb = ball.radius;
  if (rb >= r + dist) return SphereCap{};
  const double gap = r - dist;
  if (std::fabs(gap) >= rb) return std::nullopt;
  // 1 - cos(beta) at the rim of the intersection, from the law of cosines.
  double v_max = 0.0;
  if (center.chart == Curvature::Flat) {
    v_max = (rb - gap) * (rb + gap) / (2.0 * r * dist);
  } else {
    v_max = 2.0 * std::sinh(0.5 * (rb + gap)) * std::sinh(0.5 * (rb - gap)) /
            (std::sinh(r) * std::sinh(dist));
  }
  if (!(v_max > 0.0)) return std::nullopt;
  return SphereCap{initial_direction(center, ball.center), std::min(v_max, 2.0)};
}

double radial_derivative(const Vec3& gradient_at_y, const SpatialPoint& y,
                         const SpatialPoint& x) {
  const Vec3 dir = initial_direction(y, x);
  if (y.chart == Curvature::Flat) return dot(gradient_at_y, dir);
  return y.coords.z * dot(gradient_at_y, dir);
}

double radial_derivative_fd(const std::function<double(const SpatialPoint&)>& f,
                            const SpatialPoint& y, const SpatialPoint& x,
                            std::optional<double> step) {
  const Vec3 dir = initial_direction(y, x);
  const double h = step.value_or(1e-5 * std::max(1.0, geodesic_distance(x, y)));
  return (f(exponential_map(y, dir, h)) - f(exponential_map(y, dir, -h))) / (2.0 * h);
}

}  // namespace frwmax
