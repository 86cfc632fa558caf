#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <translab/error.hpp>
#include <translab/rays.hpp>

#include "support/fixtures.hpp"

using namespace translab;

namespace {

constexpr double kPi = std::numbers::pi;

// Radial disk bump centred in Ω₁, away from both curves.
GeometryDescriptor bump_annulus() {
  GeometryDescriptor d = fixtures::golden_annulus();
  d.damping.center = {0.6, 0.0};
  d.damping.radial_inner = 0.0;
  d.damping.radial_outer = 0.1;
  d.damping.radial_ramp = 0.1;
  d.damping.value = 1.0;
  return d;
}

const MemoryKernel kKernel = build_kernel({{1.5, 0.3}});

PhasePoint at_interface(const Geometry& g, double s, double sin_theta, Medium from) {
  const Vec2 x = g.inner().point(s);
  const Vec2 n = g.inner().normal(s);
  const Vec2 t = g.inner().unit_tangent(s);
  const double c = std::sqrt(1.0 - sin_theta * sin_theta);
  const Vec2 dir = from == Medium::Omega1 ? t * sin_theta - n * c : t * sin_theta + n * c;
  return make_phase_point(g, kKernel, x, dir, from);
}

}  // namespace

TEST_CASE("Omega2 chord is straight with zero drift") {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const PhasePoint p = make_phase_point(g, kKernel, {0, 0}, {1, 0}, Medium::Omega2);
  const FlowResult r = flow_segment(g, kKernel, p, 10.0);
  REQUIRE(r.hit);
  CHECK(r.hit->curve == CurveId::Inner);
  CHECK(r.end.x.x == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(r.end.x.y == 0.0);
  CHECK(r.max_characteristic_drift == 0.0);
  CHECK(r.end.t == doctest::Approx(0.3 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Omega1 flight outside supp(b) is straight") {
  const Geometry g = build_geometry(bump_annulus());
  const PhasePoint p = make_phase_point(g, kKernel, {-0.6, -0.5}, {0.1, 1.0}, Medium::Omega1);
  const FlowResult r = flow_segment(g, kKernel, p, 10.0);
  REQUIRE(r.hit);
  CHECK(r.arc.size() == 2);
  const Vec2 d = normalized(r.end.x - p.x);
  CHECK(std::abs(cross(d, normalized(p.xi))) < 1e-14);
}

TEST_CASE("bump crossing conserves the symbol and angular momentum") {
  const Geometry g = build_geometry(bump_annulus());
  const Vec2 c = g.damping().spec().center;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> off(-0.19, 0.19), ang(-0.3, 0.3);
  double curvature_seen = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 start{0.6 + off(rng), -0.3 * 0 - 0.4};
    if (g.damping().in_support(start)) continue;
    const double a = kPi / 2 + ang(rng);
    const PhasePoint p = make_phase_point(g, kKernel, start, {std::cos(a), std::sin(a)}, Medium::Omega1);
    const FlowResult r = flow_segment(g, kKernel, p, 10.0);
    CHECK(r.max_characteristic_drift <= 1e-8);
    const double l0 = cross(p.x - c, p.xi);
    const double l1 = cross(r.end.x - c, r.end.xi);
    CHECK(std::abs(l1 - l0) <= 1e-8);
    curvature_seen = std::max(curvature_seen, std::abs(cross(normalized(p.xi), normalized(r.end.xi))));
  }
  CHECK(curvature_seen > 1e-3);  // the bump does bend rays
}

TEST_CASE("snell_event below critical angle") {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const BoundaryEvent ev = snell_event(g, kKernel, at_interface(g, 0.1, 0.5, Medium::Omega1));
  const Outgoing* r = ev.find(OutcomeTag::Reflected);
  const Outgoing* t = ev.find(OutcomeTag::Transmitted);
  REQUIRE(r);
  REQUIRE(t);
  CHECK(t->point.medium == Medium::Omega2);
  CHECK(ev.incidence_angle == doctest::Approx(std::asin(0.5)).epsilon(1e-13));
  const Vec2 n = g.inner().normal(ev.s);
  const Vec2 tan = g.inner().unit_tangent(ev.s);
  const Vec2 d2 = normalized(t->point.xi);
  const double sin2 = std::abs(dot(d2, tan));
  CHECK(sin2 == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(dot(d2, n) < 0.0);
  CHECK(dot(t->point.xi, tan) == doctest::Approx(dot(ev.incoming_xi, tan)).epsilon(1e-12));
  CHECK(dot(r->point.xi, tan) == doctest::Approx(dot(ev.incoming_xi, tan)).epsilon(1e-12));
  CHECK(std::abs(characteristic_residual(g, kKernel, t->point)) < 1e-12);
  CHECK(ev.side1 == EventSide::Hyperbolic);
  CHECK(ev.side2 == EventSide::Hyperbolic);
}

TEST_CASE("critical angle and total internal reflection") {
  CHECK(std::abs(critical_angle(1.0, 2.0) - kPi / 4) <= 1e-12);
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const BoundaryEvent at = snell_event(g, kKernel, at_interface(g, 0.3, std::sin(kPi / 4), Medium::Omega1));
  REQUIRE(at.find(OutcomeTag::Gliding));
  CHECK(at.side2 == EventSide::Glancing);
  const BoundaryEvent beyond = snell_event(g, kKernel, at_interface(g, 0.3, 0.8, Medium::Omega1));
  CHECK(beyond.outcome.size() == 1);
  CHECK(beyond.find(OutcomeTag::Reflected));
  CHECK(beyond.side2 == EventSide::Elliptic);
}

TEST_CASE("rays from Omega2 always transmit") {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  for (double st = -0.999; st < 1.0; st += 0.037) {
    const BoundaryEvent ev = snell_event(g, kKernel, at_interface(g, 0.6, st, Medium::Omega2));
    const Outgoing* t = ev.find(OutcomeTag::Transmitted);
    REQUIRE(t);
    CHECK(t->point.medium == Medium::Omega1);
    const double sin1 = dot(normalized(t->point.xi), g.inner().unit_tangent(ev.s));
    CHECK(std::abs(sin1 / std::sqrt(1.0) - st / std::sqrt(2.0)) <= 1e-12);
  }
}

TEST_CASE("non-characteristic input is rejected") {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  PhasePoint p = at_interface(g, 0.0, 0.2, Medium::Omega1);
  p.xi = p.xi * 1.01;
  CHECK_THROWS_AS(snell_event(g, kKernel, p), Error);
}

TEST_CASE("classify_interface_pair") {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  CHECK(to_string(classify_interface_pair(g, kKernel, 0.0, 0.0, -1.0)) == "H1xH2");
  CHECK(to_string(classify_interface_pair(g, kKernel, 0.0, std::sqrt(0.5), -1.0)) == "H1xG2");
  CHECK(to_string(classify_interface_pair(g, kKernel, 0.0, 0.85, -1.0)) == "H1xE2");
  CHECK(to_string(classify_interface_pair(g, kKernel, 0.0, 1.0, -1.0)) == "G1xE2");
  CHECK(to_string(classify_interface_pair(g, kKernel, 0.0, 1.2, -1.0)) == "E1xE2");
  CHECK_THROWS_AS(classify_interface_pair(g, kKernel, 0.0, 0.1, 0.0), Error);
}

TEST_CASE("outer reflection") {
  const Geometry g = build_geometry(fixtures::undamped(fixtures::golden_annulus()));
  const PhasePoint normal = make_phase_point(g, kKernel, {1, 0}, {1, 0}, Medium::Omega1);
  const BoundaryEvent e1 = outer_reflection(g, kKernel, normal);
  REQUIRE(e1.outcome.size() == 1);
  CHECK(e1.outcome[0].point.xi.x == -normal.xi.x);
  CHECK(e1.side1 == EventSide::Hyperbolic);

  const PhasePoint oblique = make_phase_point(g, kKernel, {1, 0}, {1, 1}, Medium::Omega1);
  const BoundaryEvent e2 = outer_reflection(g, kKernel, oblique);
  CHECK(e2.incidence_angle == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(std::abs(e2.outcome[0].point.xi.y - oblique.xi.y) <= 1e-12);
  CHECK(e2.outcome[0].point.xi.x == doctest::Approx(-oblique.xi.x).epsilon(1e-12));

  const PhasePoint graze = make_phase_point(g, kKernel, {1, 0}, {1e-9, 1}, Medium::Omega1);
  const BoundaryEvent e3 = outer_reflection(g, kKernel, graze);
  CHECK(e3.side1 == EventSide::Glancing);
  CHECK(e3.outcome.empty());
}

TEST_CASE("glancing outer hit terminates the trace") {
  const Geometry g = build_geometry(fixtures::undamped(fixtures::golden_annulus()));
  // departing tangentially from a boundary point is a glancing contact
  const PhasePoint p = make_phase_point(g, kKernel, {1, 0}, {0, 1}, Medium::Omega1);
  const RayTrace tr = trace_ray(g, kKernel, p, {10.0, 10}, BranchPolicy::Reflected);
  CHECK(tr.terminated == Termination::GlancingUnresolved);
}

TEST_CASE("disk billiard along a diameter") {
  GeometryDescriptor d = fixtures::undamped(fixtures::golden_annulus());
  d.inner = CircleSpec{{0.0, 0.7}, 0.1};
  const Geometry g = build_geometry(d);
  const PhasePoint p = make_phase_point(g, kKernel, {0, 0}, {1, 0}, Medium::Omega1);
  const RayTrace tr = trace_ray(g, kKernel, p, {9.5, 20}, BranchPolicy::Reflected);
  REQUIRE(tr.events.size() >= 4);
  for (std::size_t i = 0; i < tr.events.size(); ++i) {
    const double expected = i % 2 == 0 ? 1.0 : -1.0;
    CHECK(tr.events[i].x.x == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(tr.events[i].x.y) < 1e-12);
  }
  CHECK(tr.terminated == Termination::TimeBudget);
}

TEST_CASE("disk billiard keeps its incidence angle") {
  GeometryDescriptor d = fixtures::undamped(fixtures::golden_annulus());
  d.inner = CircleSpec{{0.0, 0.0}, 0.05};
  const Geometry g = build_geometry(d);
  const PhasePoint p = make_phase_point(g, kKernel, {0.0, -0.9}, {1.0, 0.3}, Medium::Omega1);
  const RayTrace tr = trace_ray(g, kKernel, p, {40.0, 30}, BranchPolicy::Reflected);
  REQUIRE(tr.events.size() >= 10);
  for (const BoundaryEvent& e : tr.events) {
    CHECK(e.curve == CurveId::Outer);
    CHECK(std::abs(e.incidence_angle - tr.events[0].incidence_angle) <= 1e-10);
  }
}

TEST_CASE("start inside supp(b)") {
  const Geometry g = build_geometry(bump_annulus());
  const PhasePoint p = make_phase_point(g, kKernel, {0.6, 0.0}, {1, 0}, Medium::Omega1);
  CHECK(trace_ray(g, kKernel, p, {5.0, 5}, BranchPolicy::Reflected).terminated == Termination::EnteredSuppB);
}

TEST_CASE("radial ray crosses the inclusion along a diameter") {
  const Geometry g = build_geometry(fixtures::undamped(fixtures::golden_annulus()));
  const PhasePoint p = make_phase_point(g, kKernel, {0.8, 0.0}, {-1, 0}, Medium::Omega1);
  const RayTrace tr = trace_ray(g, kKernel, p, {1.0, 10}, BranchPolicy::Transmitted);
  REQUIRE(tr.events.size() >= 2);
  CHECK(tr.events[0].x.x == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(tr.events[0].find(OutcomeTag::Transmitted));
  CHECK(tr.events[1].x.x == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(std::abs(tr.events[1].x.y) < 1e-12);
  CHECK(tr.events[1].from == Medium::Omega2);
  const PhasePoint& out = tr.segments.back().start;
  CHECK(out.medium == Medium::Omega1);
  CHECK(out.xi.x < 0.0);
  CHECK(std::abs(out.xi.y) < 1e-12);
}

TEST_CASE("tree mode enumerates both branches") {
  const Geometry g = build_geometry(fixtures::undamped(fixtures::golden_annulus()));
  const PhasePoint p = make_phase_point(g, kKernel, {0.8, 0.1}, {-1, 0}, Medium::Omega1);
  const std::vector<RayTrace> tree = trace_ray_tree(g, kKernel, p, {3.0, 12});
  CHECK(tree.size() > 1);
  int events = 0;
  for (const RayTrace& t : tree) events += static_cast<int>(t.events.size());
  CHECK(events <= 12);
  for (std::size_t i = 1; i < tree.size(); ++i) CHECK(tree[i].parent >= 0);
}

TEST_CASE("event invariants along random traces") {
  const Geometry g = build_geometry(bump_annulus());
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ang(0, 2 * kPi);
  for (int i = 0; i < 50; ++i) {
    const double a = ang(rng);
    const PhasePoint p = make_phase_point(g, kKernel, {-0.6, 0.1}, {std::cos(a), std::sin(a)}, Medium::Omega1);
    for (BranchPolicy pol : {BranchPolicy::Reflected, BranchPolicy::Transmitted}) {
      const RayTrace tr = trace_ray(g, kKernel, p, {6.0, 20}, pol);
      CHECK(tr.max_characteristic_drift <= 1e-8);
      for (std::size_t k = 0; k < tr.events.size(); ++k) {
        const BoundaryEvent& e = tr.events[k];
        CHECK(norm(tr.segments[k].end.x - e.x) <= 1e-9);
        CHECK(std::abs(g.curve(e.curve).signed_distance(e.x)) <= 1e-10);
        const Vec2 tan = g.curve(e.curve).unit_tangent(e.s);
        for (const Outgoing& o : e.outcome) {
          const double in_t = dot(e.incoming_xi, tan);
          CHECK(std::abs(dot(o.point.xi, tan) - in_t) <= 1e-10 * std::max(1.0, std::abs(in_t)));
        }
        if (k + 1 < tr.segments.size()) CHECK(norm(tr.segments[k + 1].start.x - e.x) <= 1e-9);
      }
    }
  }
}

TEST_CASE("time reversal of a reflection-only trace") {
  const Geometry g = build_geometry(bump_annulus());
  const PhasePoint p = make_phase_point(g, kKernel, {-0.5, -0.5}, {1.0, 0.35}, Medium::Omega1);
  // follow reflections by hand so the bump is crossed rather than observed
  auto run = [&](PhasePoint q, double time) {
    double t_end = q.t + time;
    while (q.t < t_end - 1e-15) {
      FlowResult fr = flow_segment(g, kKernel, q, t_end - q.t);
      q = fr.end;
      if (!fr.hit) break;
      REQUIRE(fr.hit->curve == CurveId::Outer);
      q = outer_reflection(g, kKernel, q).outcome.at(0).point;
    }
    return q;
  };
  GeometryDescriptor d = bump_annulus();
  d.inner = CircleSpec{{-0.05, 0.0}, 0.05};
  (void)d;
  PhasePoint end = run(p, 1.7);
  end.xi = -end.xi;
  const PhasePoint back = run(end, 1.7);
  CHECK(norm(back.x - p.x) <= 1e-7);
}
