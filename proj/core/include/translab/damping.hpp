#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "translab/vec2.hpp"

namespace translab {

enum class BumpProfile { Exponential, Polynomial };

/// Smooth, compactly supported damping coefficient b(x).
///
/// b(x) = value · R(ρ) · A(φ) in polar coordinates (ρ, φ) about `center`:
/// R is a smooth plateau on [radial_inner, radial_outer] with ramps of width
/// `radial_ramp` (a disk when radial_inner <= 0), A an optional angular
/// window on [angular->first, angular->second] with ramps `angular_ramp`.
/// Exponential profiles are C^∞ (mollifier smoothstep), polynomial ones C².
struct BumpSpec {
  Vec2 center{};
  double value = 0.0;
  double radial_inner = 0.0;
  double radial_outer = 0.2;
  double radial_ramp = 0.1;
  std::optional<std::pair<double, double>> angular;
  double angular_ramp = 0.2;
  BumpProfile profile = BumpProfile::Exponential;
};

struct BValue {
  double value = 0.0;
  Vec2 gradient{};
};

class DampingField {
 public:
  DampingField() = default;
  explicit DampingField(const BumpSpec& spec);

  const BumpSpec& spec() const { return spec_; }
  bool empty() const { return spec_.value <= 0.0; }
  /// Declared plateau maximum ‖b‖_∞.
  double max_value() const { return empty() ? 0.0 : spec_.value; }

  BValue evaluate(Vec2 x) const;
  double value(Vec2 x) const { return evaluate(x).value; }

  /// Closed support membership.
  bool in_support(Vec2 x) const;
  /// Euclidean distance from x to the closed support (0 inside).
  double support_distance(Vec2 x) const;
  /// Smallest t >= 0 such that origin + t·dir lies in the closed support.
  std::optional<double> support_entry(Vec2 origin, Vec2 dir) const;
  /// Smallest t > 0 at which the ray leaves the closed support (origin inside).
  double support_exit(Vec2 origin, Vec2 dir) const;

  double support_inner_radius() const { return rho_lo_; }
  double support_outer_radius() const { return rho_hi_; }

 private:
  double smoothstep(double t) const;
  double smoothstep_derivative(double t) const;
  std::vector<double> boundary_crossings(Vec2 origin, Vec2 dir) const;

  BumpSpec spec_{};
  double rho_lo_ = 0.0;
  double rho_hi_ = 0.0;
  double mid_angle_ = 0.0;
  double half_support_angle_ = 0.0;  // angular half-width of the support, π when full
};

}  // namespace translab
