#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "frwmax/types.hpp"

namespace frwmax {

inline constexpr int kMinQuadratureOrder = 4;
inline constexpr int kDefaultQuadratureOrder = 32;

/// Closed geodesic ball. In the hyperbolic chart `center` is the hyperbolic
/// centre and `radius` the geodesic radius.
struct GeodesicBall {
  SpatialPoint center;
  double radius{};
};

double geodesic_distance(const SpatialPoint& p, const SpatialPoint& q);

/// Unit initial tangent (Euclidean components of the chart) of the geodesic
/// from `from` to `to`. Throws std::domain_error when the points coincide.
Vec3 initial_direction(const SpatialPoint& from, const SpatialPoint& to);

/// Point at geodesic distance r from `center` along the geodesic with unit
/// initial direction `dir` (r may be negative: walks along -dir).
SpatialPoint exponential_map(const SpatialPoint& center, const Vec3& dir, double r);

/// d/dr of exponential_map in chart coordinates. Unit speed in the metric of
/// the chart, so its Euclidean length is 1 (flat) or z (hyperbolic).
Vec3 geodesic_velocity(const SpatialPoint& center, const Vec3& dir, double r);

/// Geodesics of length r leaving `center`, with the r-dependent constants
/// precomputed. point(dir) == exponential_map(center, dir, r).
class GeodesicFan {
 public:
  GeodesicFan(const SpatialPoint& center, double r);

  SpatialPoint point(const Vec3& dir) const;
  Vec3 velocity(const Vec3& dir) const;
  /// point and velocity together.
  SpatialPoint point(const Vec3& dir, Vec3& velocity) const;

 private:
  SpatialPoint center_;
  double r_{};
  double ep_{1.0};
  double em_{1.0};
  double sh_{};
  double ch_{1.0};
};

/// Calls fn(point, outward_velocity, solid_angle_weight) for every node of the
/// cap rule described at SphereQuadrature, in a fixed order.
template <class Fn>
void for_each_cap_node(const SpatialPoint& center, double r, int order, const Vec3& pole,
                       double v_max, Fn&& fn);

/// Euclidean sphere (centre, radius) realising the geodesic sphere S_r(center).
struct EuclideanSphere {
  Vec3 center;
  double radius{};
};
EuclideanSphere euclidean_realization(const SpatialPoint& center, double r);

/// Smallest geodesic ball containing the Euclidean ball B(center, radius) of
/// the chart. In the hyperbolic chart the two balls coincide as sets.
GeodesicBall geodesic_ball_of(const SpatialPoint& euclidean_center, double euclidean_radius);

/// Quadrature on the geodesic sphere S_r(center), or on a cap of it.
///
/// Nodes are placed in geodesic polar coordinates about the centre: for each
/// unit direction w the node is exp_center(r w). The surface element in these
/// coordinates is r^2 dOmega (flat) or sinh^2(r) dOmega (hyperbolic), so the
/// weights are the solid-angle weights times that factor. The angular rule is
/// Gauss-Legendre in v = 1 - cos(beta) times the trapezoid rule in the
/// azimuth, where beta is measured from `pole`.
struct SphereQuadrature {
  SpatialPoint center;
  double radius{};
  int order{};
  Vec3 pole{0.0, 0.0, 1.0};
  double v_max = 2.0;  // 2 = full sphere
  std::vector<SpatialPoint> nodes;
  std::vector<Vec3> outward;          // geodesic_velocity at each node
  std::vector<double> weights;        // surface-measure weights
  std::vector<double> angular_weights;  // solid-angle weights, sum 4pi on the full sphere

  double total_weight() const;
  bool full_sphere() const { return v_max >= 2.0; }
};

/// Full geodesic sphere. Throws std::invalid_argument for r <= 0 or
/// order < kMinQuadratureOrder.
SphereQuadrature build_sphere_quadrature(const SpatialPoint& center, double r, int order);

/// Cap {v <= v_max} of the sphere about `pole`; v_max in (0, 2].
SphereQuadrature build_cap_quadrature(const SpatialPoint& center, double r, int order,
                                      const Vec3& pole, double v_max);

/// Portion of S_r(center) lying inside `ball`, as a cap about the direction of
/// the ball centre. nullopt when the sphere misses the ball's interior.
struct SphereCap {
  Vec3 pole{0.0, 0.0, 1.0};
  double v_max = 2.0;
};
std::optional<SphereCap> sphere_ball_cap(const SpatialPoint& center, double r,
                                         const GeodesicBall& ball);

/// Derivative of a scalar function at y along the unit-speed geodesic from y
/// towards x, given the chart gradient of the function at y.
double radial_derivative(const Vec3& gradient_at_y, const SpatialPoint& y, const SpatialPoint& x);

/// Same quantity from second-order central differences of f along the
/// geodesic through y towards x. Step defaults to 1e-5 * max(1, d(x, y)).
double radial_derivative_fd(const std::function<double(const SpatialPoint&)>& f,
                            const SpatialPoint& y, const SpatialPoint& x,
                            std::optional<double> step = std::nullopt);

namespace detail {
struct CapFrame {
  Vec3 pole;
  Vec3 e1;
  Vec3 e2;
  const double* v_nodes;
  const double* v_weights;
  std::vector<double> cos_phi;
  std::vector<double> sin_phi;
  double w_phi{};
  double v_max{};
};
CapFrame make_cap_frame(const SpatialPoint& center, double r, int order, const Vec3& pole,
                        double v_max);
}  // namespace detail

template <class Fn>
void for_each_cap_node(const SpatialPoint& center, double r, int order, const Vec3& pole,
                       double v_max, Fn&& fn) {
  const detail::CapFrame frame = detail::make_cap_frame(center, r, order, pole, v_max);
  const GeodesicFan fan(center, r);
  const int n_phi = static_cast<int>(frame.cos_phi.size());
  for (int i = 0; i < order; ++i) {
    const double v = 0.5 * frame.v_max * (1.0 + frame.v_nodes[i]);
    const double w = 0.5 * frame.v_max * frame.v_weights[i] * frame.w_phi;
    const double cos_beta = 1.0 - v;
    const double sin_beta = std::sqrt(v * (2.0 - v));
    for (int j = 0; j < n_phi; ++j) {
      const Vec3 dir = cos_beta * frame.pole +
                       sin_beta * (frame.cos_phi[j] * frame.e1 + frame.sin_phi[j] * frame.e2);
      Vec3 velocity;
      const SpatialPoint y = fan.point(dir, velocity);
      fn(y, velocity, w);
    }
  }
}

}  // namespace frwmax
