#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace frwmax {

enum class Curvature { Flat, Hyperbolic };

std::string_view to_string(Curvature k);
Curvature curvature_from_string(std::string_view name);

struct Vec3 {
  double x{};
  double y{};
  double z{};

  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }
inline double max_abs(const Vec3& a) {
  return std::fmax(std::fabs(a.x), std::fmax(std::fabs(a.y), std::fabs(a.z)));
}

/// Row mu holds the gradient of component mu.
using Jacobian = std::array<Vec3, 3>;

/// A point of the spatial slice. In the hyperbolic chart the coordinates are
/// those of the upper half-space model and z must be positive.
struct SpatialPoint {
  Vec3 coords;
  Curvature chart = Curvature::Flat;

  static constexpr SpatialPoint flat(double x, double y, double z) {
    return {{x, y, z}, Curvature::Flat};
  }
  static constexpr SpatialPoint hyperbolic(double x, double y, double z) {
    return {{x, y, z}, Curvature::Hyperbolic};
  }

  bool valid() const {
    return std::isfinite(coords.x) && std::isfinite(coords.y) && std::isfinite(coords.z) &&
           (chart == Curvature::Flat || coords.z > 0.0);
  }
  friend bool operator==(const SpatialPoint&, const SpatialPoint&) = default;
};

struct SpacetimePoint {
  double tau{};
  SpatialPoint x;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace frwmax
