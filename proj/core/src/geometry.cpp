#include "translab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "translab/error.hpp"

namespace translab {

std::string to_string(Region r) {
  switch (r) {
    case Region::Omega1: return "Omega1";
    case Region::Omega2: return "Omega2";
    case Region::OnInterface: return "OnInterface";
    case Region::OnOuter: return "OnOuter";
    case Region::Outside: return "Outside";
  }
  return "?";
}

std::string to_string(CurveId c) { return c == CurveId::Outer ? "outer" : "inner"; }

Geometry::Geometry(const GeometryDescriptor& d)
    : descriptor_(d),
      outer_(d.outer, d.smoothness_samples),
      inner_(d.inner, d.smoothness_samples),
      k1_(d.k1),
      k2_(d.k2),
      damping_(d.damping) {}

Geometry build_geometry(const GeometryDescriptor& descriptor) {
  if (!(descriptor.k1 > 0) || !(descriptor.k2 > 0))
    throw Error(ErrorCode::NonPositiveSpeeds, "k1 and k2 must be positive");
  Geometry g(descriptor);
  g.outer_.validate();
  g.inner_.validate();

  const int n = std::max(descriptor.smoothness_samples, 1024);
  for (int i = 0; i < n; ++i) {
    const Vec2 p = g.inner_.point(static_cast<double>(i) / n);
    if (!(g.outer_.signed_distance(p) < 0.0))
      throw Error(ErrorCode::InnerNotContained, "inner curve sample lies on or outside the outer curve");
  }
  if (g.outer_.winding_number(g.inner_.point(0.0)) != 1)
    throw Error(ErrorCode::InnerNotContained, "winding number of outer curve around inner sample is not 1");

  double diam = 0.0;
  const int m = 256;
  std::vector<Vec2> pts(m);
  for (int i = 0; i < m; ++i) pts[i] = g.outer_.point(static_cast<double>(i) / m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) diam = std::max(diam, norm(pts[i] - pts[j]));
  g.diameter_ = diam;

  g.separation_ = std::numeric_limits<double>::infinity();
  if (!g.damping_.empty()) {
    double sep = std::numeric_limits<double>::infinity();
    double bmax = 0.0;
    const int ni = std::max(descriptor.smoothness_samples, 4096);
    for (int i = 0; i < ni; ++i) {
      const Vec2 p = g.inner_.point(static_cast<double>(i) / ni);
      sep = std::min(sep, g.damping_.support_distance(p));
      bmax = std::max(bmax, g.damping_.value(p));
    }
    // A support disjoint from ∂Ω₂ is connected, so one interior point decides
    // whether it sits inside Ω₂.
    const BumpSpec& b = g.damping_.spec();
    const double mid_r = b.radial_inner > 0 ? 0.5 * (b.radial_inner + b.radial_outer) : 0.0;
    const double mid_a = b.angular ? 0.5 * (b.angular->first + b.angular->second) : 0.0;
    const Vec2 probe = b.center + Vec2{std::cos(mid_a), std::sin(mid_a)} * mid_r;
    const bool inside_inclusion = g.inner_.signed_distance(probe) < 0.0;
    g.separation_ = inside_inclusion ? 0.0 : sep;
    g.max_b_interface_ = bmax;
    if (!descriptor.relaxed && !(g.separation_ > 0.0))
      throw Error(ErrorCode::SupportTouchesInterface,
                  inside_inclusion ? "supp(b) lies inside the inclusion" : "supp(b) meets the interface");
  }
  return g;
}

Region classify_containment(const Geometry& geom, Vec2 x) {
  constexpr double tol = 1e-9;
  const double d_out = geom.outer().signed_distance(x);
  if (std::abs(d_out) <= tol) return Region::OnOuter;
  if (d_out > 0) return Region::Outside;
  const double d_in = geom.inner().signed_distance(x);
  if (std::abs(d_in) <= tol) return Region::OnInterface;
  return d_in < 0 ? Region::Omega2 : Region::Omega1;
}

BValue eval_b(const Geometry& geom, Vec2 x) {
  const Region r = classify_containment(geom, x);
  if (r == Region::Outside || r == Region::Omega2)
    throw Error(ErrorCode::PointOutsideDomain, "b is defined on closure(Omega1) only; got " + to_string(r));
  return geom.damping().evaluate(x);
}

Vec2 normal_at(const Curve& curve, double s) { return curve.normal(s); }

ConvexityReport check_convexity(const Geometry& geom, int samples) {
  const int n = samples > 0 ? samples : std::max(geom.descriptor().smoothness_samples, 1024);
  ConvexityReport rep;
  rep.min_curvature_outer = std::numeric_limits<double>::infinity();
  rep.min_curvature_inner = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    rep.min_curvature_outer = std::min(rep.min_curvature_outer, geom.outer().curvature(s));
    rep.min_curvature_inner = std::min(rep.min_curvature_inner, geom.inner().curvature(s));
  }
  rep.outer_convex = rep.min_curvature_outer >= -1e-10;
  rep.inner_convex = rep.min_curvature_inner >= -1e-10;
  return rep;
}

}  // namespace translab
