#pragma once

#include <optional>
#include <string>
#include <vector>

#include "translab/geometry.hpp"
#include "translab/kernel.hpp"

namespace translab {

enum class Medium { Omega1, Omega2 };

/// Point of the characteristic set: τ² = c(x)|ξ|² with c = k₁(1 - k₀b) in Ω₁
/// and k₂ in Ω₂. τ < 0 so that physical time increases along the flow.
struct PhasePoint {
  Vec2 x{};
  double t = 0.0;
  Vec2 xi{};
  double tau = -1.0;
  Medium medium = Medium::Omega1;
};

double speed_coefficient(const Geometry& geom, const MemoryKernel& kernel, Vec2 x, Medium m);
/// (τ² - c|ξ|²) / τ².
double characteristic_residual(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p);
/// Phase point at x heading along `direction`, with |ξ| fixed by the characteristic condition.
PhasePoint make_phase_point(const Geometry& geom, const MemoryKernel& kernel, Vec2 x, Vec2 direction,
                            Medium medium, double tau = -1.0, double t = 0.0);

/// Quantitative reading of "crosses supp(b) transversally": the arc must
/// enter {b >= eps_rel·max b} at an angle >= theta_min and stay inside for a
/// length >= length_rel·diam(Ω).
struct ObservationRule {
  double eps_rel = 1e-3;
  double theta_min = 0.017453292519943295;  // 1 degree
  double length_rel = 1e-3;
};

struct BoundaryHit {
  CurveId curve = CurveId::Outer;
  double s = 0.0;
};

struct FlowOptions {
  ObservationRule rule{};
  bool stop_when_observed = false;
  double rtol = 1e-12;
  double atol = 1e-13;
};

struct FlowResult {
  std::vector<Vec2> arc;
  PhasePoint end{};
  std::optional<BoundaryHit> hit;
  bool observed = false;  // arc crossed supp(b) transversally (only with stop_when_observed)
  double max_characteristic_drift = 0.0;
};

/// Integrates the bicharacteristic flow from p0 until the first boundary of
/// p0's medium, `max_time` of physical time, or (optionally) observation.
/// Straight-line stepping is exact where c is constant; inside supp(b) an
/// adaptive Dormand–Prince 5(4) integrator is used.
FlowResult flow_segment(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p0,
                        double max_time, const FlowOptions& options = {});

enum class EventSide { Hyperbolic, Glancing, Elliptic };
enum class OutcomeTag { Reflected, Transmitted, Gliding };

struct InterfaceClass {
  EventSide side1 = EventSide::Hyperbolic;
  EventSide side2 = EventSide::Hyperbolic;
  bool operator==(const InterfaceClass&) const = default;
};

std::string to_string(EventSide s);
std::string to_string(OutcomeTag t);
/// "H1xH2", "H1xG2", "H1xE2", "G1xE2", "E1xE2", ...
std::string to_string(InterfaceClass c);

struct Outgoing {
  PhasePoint point{};
  OutcomeTag tag = OutcomeTag::Reflected;
};

struct BoundaryEvent {
  CurveId curve = CurveId::Outer;
  double s = 0.0;
  Vec2 x{};
  double t = 0.0;
  Medium from = Medium::Omega1;
  double incidence_angle = 0.0;  // from the normal, in the incoming medium
  EventSide side1 = EventSide::Hyperbolic;
  std::optional<EventSide> side2;  // interface events only
  Vec2 incoming_xi{};
  std::vector<Outgoing> outcome;

  const Outgoing* find(OutcomeTag tag) const;
};

/// Compares r = |ξ′|² against τ²/c₁ and τ²/k₂ (relative tolerance 1e-9).
InterfaceClass classify_interface_pair(const Geometry& geom, const MemoryKernel& kernel, double s,
                                       double xi_tangential, double tau);

/// Reflection/transmission at ∂Ω₂ with tangential covector continuity.
BoundaryEvent snell_event(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& incoming);
/// Specular reflection at ∂Ω; Glancing within 1e-8 rad of tangency.
BoundaryEvent outer_reflection(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& incoming);

/// Critical incidence angle in Ω₁ for transmission into Ω₂ (b = 0 at the interface).
double critical_angle(double k1, double k2);

enum class Termination { TimeBudget, EventBudget, EnteredSuppB, GlancingUnresolved };
std::string to_string(Termination t);

enum class BranchPolicy { Tree, Reflected, Transmitted };

struct TraceBudget {
  double max_time = 10.0;
  int max_events = 64;
};

struct RaySegment {
  PhasePoint start{};
  PhasePoint end{};
  std::vector<Vec2> arc;
};

struct RayTrace {
  std::vector<RaySegment> segments;
  std::vector<BoundaryEvent> events;
  Termination terminated = Termination::TimeBudget;
  int parent = -1;        // tree mode: index of the branch this one split from
  int parent_event = -1;  // index into the parent's events
  double max_characteristic_drift = 0.0;
};

/// Follows a single branch (policy Reflected or Transmitted).
RayTrace trace_ray(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p0,
                   const TraceBudget& budget, BranchPolicy policy, const ObservationRule& rule = {});

/// Enumerates reflected and transmitted branches depth-first; max_events caps
/// the number of events over the whole tree.
std::vector<RayTrace> trace_ray_tree(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p0,
                                     const TraceBudget& budget, const ObservationRule& rule = {});

}  // namespace translab
