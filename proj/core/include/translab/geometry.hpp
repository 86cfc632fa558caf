#pragma once

#include <optional>
#include <string>

#include "translab/curve.hpp"
#include "translab/damping.hpp"

namespace translab {

enum class CurveId { Outer, Inner };
enum class Region { Omega1, Omega2, OnInterface, OnOuter, Outside };

std::string to_string(Region r);
std::string to_string(CurveId c);

struct GeometryDescriptor {
  CurveSpec outer = CircleSpec{{0, 0}, 1.0};
  CurveSpec inner = CircleSpec{{0, 0}, 0.3};
  double k1 = 1.0;
  double k2 = 2.0;
  BumpSpec damping{};
  int smoothness_samples = 256;
  /// Diagnostic mode: let supp(b) touch ∂Ω₂ (only used to exercise the
  /// boundary memory operator).
  bool relaxed = false;
};

struct ConvexityReport {
  bool outer_convex = false;
  bool inner_convex = false;
  double min_curvature_outer = 0.0;
  double min_curvature_inner = 0.0;

  bool strictly_convex() const { return min_curvature_outer > 1e-10 && min_curvature_inner > 1e-10; }
};

/// Ω ⊃ Ω̄₂ with Ω₁ = Ω∖Ω̄₂, wave coefficients k₁, k₂ and damping b on Ω₁.
/// Immutable after construction.
class Geometry {
 public:
  const Curve& outer() const { return outer_; }
  const Curve& inner() const { return inner_; }
  const Curve& curve(CurveId id) const { return id == CurveId::Outer ? outer_ : inner_; }
  double k1() const { return k1_; }
  double k2() const { return k2_; }
  const DampingField& damping() const { return damping_; }
  const GeometryDescriptor& descriptor() const { return descriptor_; }
  bool relaxed() const { return descriptor_.relaxed; }

  /// dist(supp b, ∂Ω₂); +inf when b ≡ 0.
  double separation() const { return separation_; }
  double diameter() const { return diameter_; }
  /// max of b over ∂Ω₂ (sampled); zero unless relaxed.
  double max_b_on_interface() const { return max_b_interface_; }

 private:
  friend Geometry build_geometry(const GeometryDescriptor&);
  Geometry(const GeometryDescriptor& d);

  GeometryDescriptor descriptor_;
  Curve outer_;
  Curve inner_;
  double k1_;
  double k2_;
  DampingField damping_;
  double separation_ = 0.0;
  double diameter_ = 0.0;
  double max_b_interface_ = 0.0;
};

/// Validates every standing geometric hypothesis or throws.
Geometry build_geometry(const GeometryDescriptor& descriptor);

/// b and its analytic gradient at x ∈ closure(Ω₁); throws PointOutsideDomain elsewhere.
BValue eval_b(const Geometry& geom, Vec2 x);

Vec2 normal_at(const Curve& curve, double s);

/// Tolerance 1e-9 in distance for the OnInterface / OnOuter bands.
Region classify_containment(const Geometry& geom, Vec2 x);

ConvexityReport check_convexity(const Geometry& geom, int samples = 0);

}  // namespace translab
