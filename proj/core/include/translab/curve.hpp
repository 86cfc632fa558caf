#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "translab/vec2.hpp"

namespace translab {

struct CircleSpec {
  Vec2 center{};
  double radius = 1.0;
};

struct EllipseSpec {
  Vec2 center{};
  double semi_x = 1.0;
  double semi_y = 1.0;
  double rotation = 0.0;  // radians
};

/// Polygon whose corners are replaced by circular fillets of a common radius.
/// Reflex corners get clockwise fillets, so non-convex shapes stay C¹.
struct RoundedPolygonSpec {
  std::vector<Vec2> vertices;
  double corner_radius = 0.1;
};

using CurveSpec = std::variant<CircleSpec, EllipseSpec, RoundedPolygonSpec>;

struct LineHit {
  double t = 0.0;  // distance along the (unit) direction
  double s = 0.0;  // curve parameter of the hit
};

struct BoundingBox {
  Vec2 lo{};
  Vec2 hi{};
};

/// Closed, counterclockwise, C¹ planar curve parametrized over s ∈ [0,1).
///
/// Rounded polygons are parametrized by normalized arc length; circles and
/// ellipses by normalized angle.
class Curve {
 public:
  explicit Curve(CurveSpec spec, int smoothness_samples = 256);

  const CurveSpec& spec() const { return spec_; }
  int smoothness_samples() const { return samples_; }

  Vec2 point(double s) const;
  /// dγ/ds (not normalized).
  Vec2 derivative(double s) const;
  Vec2 second_derivative(double s) const;
  Vec2 unit_tangent(double s) const;
  /// Outward unit normal; throws DegenerateTangent when |γ′| < 1e-9.
  Vec2 normal(double s) const;
  /// Signed curvature, positive where the curve turns left.
  double curvature(double s) const;

  /// Signed Euclidean distance, negative inside the enclosed region.
  double signed_distance(Vec2 p) const;
  double closest_parameter(Vec2 p) const;

  /// All intersections of the full line origin + t·dir (|dir| = 1), sorted by t.
  std::vector<LineHit> intersect_line(Vec2 origin, Vec2 dir) const;
  /// First intersection with t > t_min.
  std::optional<LineHit> first_hit(Vec2 origin, Vec2 dir, double t_min) const;

  double length() const { return length_; }
  /// Arc length between parameters s0 ≤ s1 (s1 may exceed 1 to wrap).
  double arc_length(double s0, double s1) const;
  BoundingBox bounding_box() const;

  /// Winding number of the curve around p, from the sampled polygon.
  int winding_number(Vec2 p) const;

  /// Closedness, simplicity and C¹ checks at the sample nodes; throws on failure.
  void validate() const;

 private:
  struct Piece {
    bool is_arc = false;
    Vec2 a{}, b{};          // line endpoints
    Vec2 center{};          // arc
    double radius = 0.0;
    double start_angle = 0.0;
    double sweep = 0.0;     // signed
    double length = 0.0;
    double offset = 0.0;    // cumulative arc length at piece start
  };

  void build_rounded_polygon(const RoundedPolygonSpec& spec);
  std::pair<const Piece*, double> locate(double s) const;

  CurveSpec spec_;
  int samples_;
  std::vector<Piece> pieces_;
  double length_ = 0.0;
};

double wrap_unit(double s);

}  // namespace translab
