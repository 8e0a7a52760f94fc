#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "frwmax/geometry.hpp"
#include "frwmax/types.hpp"

namespace frwmax {

enum class Smoothness { C1, C2, CInfinity };

/// Euclidean ball of the chart's ambient coordinates.
struct SupportBall {
  SpatialPoint center;
  double radius{};
};

/// Vector-valued data (three components, mu = 1, 2, 3) on one chart.
///
/// A field is a finite sum of terms. Bump terms are compactly supported and
/// carry an exact support ball; analytic terms are arbitrary smooth functions
/// with no support certificate. The propagator integrates each bump term only
/// over the part of a sphere that meets its ball.
class VectorField {
 public:
  /// amplitude * exp(-1 / (1 - |x - center|^2 / radius^2)) inside the ball, 0 outside.
  struct Bump {
    Vec3 center;
    double radius{};
    Vec3 amplitude;

    /// Shape function and its gradient (without the amplitude).
    double shape(const Vec3& p) const;
    double shape(const Vec3& p, Vec3& gradient) const;
  };

  using ValueFn = std::function<Vec3(const SpatialPoint&)>;
  using JacobianFn = std::function<Jacobian(const SpatialPoint&)>;

  struct Analytic {
    ValueFn value;
    JacobianFn jacobian;  // empty: central differences
    Smoothness smoothness = Smoothness::CInfinity;
  };

  using Term = std::variant<Bump, Analytic>;

  explicit VectorField(Curvature chart = Curvature::Flat) : chart_(chart) {}

  static VectorField zero(Curvature chart) { return VectorField(chart); }
  static VectorField analytic(Curvature chart, ValueFn value, JacobianFn jacobian = {},
                              Smoothness smoothness = Smoothness::CInfinity);

  Curvature chart() const { return chart_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Smoothness smoothness() const;

  Vec3 eval(const SpatialPoint& y) const;
  Jacobian jacobian(const SpatialPoint& y) const;

  /// Enclosing Euclidean ball of all terms; nullopt if any term is unbounded.
  std::optional<SupportBall> support() const;
  /// Geodesic ball containing the support (exact for a single bump).
  std::optional<GeodesicBall> geodesic_support() const;

  VectorField scaled(double factor) const;
  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator*(double s, const VectorField& f) { return f.scaled(s); }

  void add_term(Term term);

 private:
  Curvature chart_;
  std::vector<Term> terms_;
};

/// Bump data at `center` with radius R (ambient Euclidean coordinates).
/// Hyperbolic chart: throws std::invalid_argument if the ball reaches z <= 0.
VectorField make_bump(const SpatialPoint& center, double radius, const Vec3& amplitude);

/// Sampled suprema over the data support: C_f = sup_x max_mu |(f^mu, grad f^mu)| and
/// C_g = sup_x max_mu |g^mu|. The gradient norm is the metric norm of the
/// chart (z |grad| in the hyperbolic chart). Samples are the term centres plus
/// a (resolution+1)^3 lattice over each support ball; lattices nest when the
/// resolution doubles, so the values are monotone under refinement.
struct DataNorms {
  double c_f{};
  double c_g{};
  int resolution{};

  double combined() const { return c_f + c_g; }
};

DataNorms data_norms(const VectorField& f, const VectorField& g, int resolution = 32);

/// Max |div f| over the same sample lattice (flat chart), for users who want
/// data consistent with the Coulomb gauge.
double max_divergence(const VectorField& f, int resolution = 32);

}  // namespace frwmax
