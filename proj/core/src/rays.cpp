#include "translab/rays.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "translab/error.hpp"

namespace translab {

namespace {

constexpr double kGlancingTol = 1e-8;
constexpr double kClassTol = 1e-9;
constexpr double kHitEps = 1e-10;

struct Deriv {
  Vec2 dx;
  Vec2 dxi;
};

// Physical-time form of the Hamiltonian flow of -p, p = τ² - c(x)|ξ|²:
//   dx/dt = c ξ / |τ|,   dξ/dt = -∇c |ξ|² / (2|τ|).
Deriv rhs(const Geometry& geom, const MemoryKernel& kernel, Vec2 x, Vec2 xi, double abs_tau) {
  const BValue b = geom.damping().evaluate(x);
  const double c = geom.k1() * (1.0 - kernel.k0() * b.value);
  const Vec2 grad_c = b.gradient * (-geom.k1() * kernel.k0());
  return {xi * (c / abs_tau), grad_c * (-norm2(xi) / (2.0 * abs_tau))};
}

struct RkState {
  Vec2 x;
  Vec2 xi;
};

// Dormand–Prince 5(4) step; returns the 5th-order solution and error estimate.
std::pair<RkState, double> dp_step(const Geometry& geom, const MemoryKernel& kernel, const RkState& y, double h,
                                   double abs_tau, double atol, double rtol) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  auto f = [&](Vec2 x, Vec2 xi) { return rhs(geom, kernel, x, xi, abs_tau); };
  const Deriv k1 = f(y.x, y.xi);
  const Deriv k2 = f(y.x + k1.dx * (h * a21), y.xi + k1.dxi * (h * a21));
  const Deriv k3 = f(y.x + (k1.dx * a31 + k2.dx * a32) * h, y.xi + (k1.dxi * a31 + k2.dxi * a32) * h);
  const Deriv k4 = f(y.x + (k1.dx * a41 + k2.dx * a42 + k3.dx * a43) * h,
                     y.xi + (k1.dxi * a41 + k2.dxi * a42 + k3.dxi * a43) * h);
  const Deriv k5 = f(y.x + (k1.dx * a51 + k2.dx * a52 + k3.dx * a53 + k4.dx * a54) * h,
                     y.xi + (k1.dxi * a51 + k2.dxi * a52 + k3.dxi * a53 + k4.dxi * a54) * h);
  const Deriv k6 = f(y.x + (k1.dx * a61 + k2.dx * a62 + k3.dx * a63 + k4.dx * a64 + k5.dx * a65) * h,
                     y.xi + (k1.dxi * a61 + k2.dxi * a62 + k3.dxi * a63 + k4.dxi * a64 + k5.dxi * a65) * h);
  RkState out;
  out.x = y.x + (k1.dx * b1 + k3.dx * b3 + k4.dx * b4 + k5.dx * b5 + k6.dx * b6) * h;
  out.xi = y.xi + (k1.dxi * b1 + k3.dxi * b3 + k4.dxi * b4 + k5.dxi * b5 + k6.dxi * b6) * h;
  const Deriv k7 = f(out.x, out.xi);
  const Vec2 ex = (k1.dx * e1 + k3.dx * e3 + k4.dx * e4 + k5.dx * e5 + k6.dx * e6 + k7.dx * e7) * h;
  const Vec2 exi = (k1.dxi * e1 + k3.dxi * e3 + k4.dxi * e4 + k5.dxi * e5 + k6.dxi * e6 + k7.dxi * e7) * h;
  auto sc = [&](double a, double b) { return atol + rtol * std::max(std::abs(a), std::abs(b)); };
  double err = 0.0;
  err = std::max(err, std::abs(ex.x) / sc(y.x.x, out.x.x));
  err = std::max(err, std::abs(ex.y) / sc(y.x.y, out.x.y));
  err = std::max(err, std::abs(exi.x) / sc(y.xi.x, out.xi.x));
  err = std::max(err, std::abs(exi.y) / sc(y.xi.y, out.xi.y));
  return {out, err};
}

struct WallHit {
  double dist = std::numeric_limits<double>::infinity();
  CurveId curve = CurveId::Outer;
  double s = 0.0;
};

WallHit straight_wall_hit(const Geometry& geom, Vec2 x, Vec2 dir, Medium m) {
  WallHit w;
  if (auto h = geom.inner().first_hit(x, dir, kHitEps)) w = {h->t, CurveId::Inner, h->s};
  if (m == Medium::Omega1) {
    if (auto h = geom.outer().first_hit(x, dir, kHitEps); h && h->t < w.dist) w = {h->t, CurveId::Outer, h->s};
  }
  return w;
}

// Signed quantity that changes sign when the trajectory leaves medium m
// through the given curve.
double exit_indicator(const Geometry& geom, CurveId c, Vec2 x, Medium m) {
  if (c == CurveId::Outer) return geom.outer().signed_distance(x);
  const double d = geom.inner().signed_distance(x);
  return m == Medium::Omega1 ? -d : d;
}

}  // namespace

double speed_coefficient(const Geometry& geom, const MemoryKernel& kernel, Vec2 x, Medium m) {
  if (m == Medium::Omega2) return geom.k2();
  return geom.k1() * (1.0 - kernel.k0() * geom.damping().value(x));
}

double characteristic_residual(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p) {
  if (p.tau == 0.0) throw Error(ErrorCode::ZeroTau, "tau must be nonzero");
  const double c = speed_coefficient(geom, kernel, p.x, p.medium);
  return (p.tau * p.tau - c * norm2(p.xi)) / (p.tau * p.tau);
}

PhasePoint make_phase_point(const Geometry& geom, const MemoryKernel& kernel, Vec2 x, Vec2 direction,
                            Medium medium, double tau, double t) {
  if (tau == 0.0) throw Error(ErrorCode::ZeroTau, "tau must be nonzero");
  const double c = speed_coefficient(geom, kernel, x, medium);
  PhasePoint p;
  p.x = x;
  p.t = t;
  p.tau = -std::abs(tau);
  p.medium = medium;
  p.xi = normalized(direction) * (std::abs(tau) / std::sqrt(c));
  return p;
}

FlowResult flow_segment(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p0,
                        double max_time, const FlowOptions& opt) {
  if (p0.tau == 0.0) throw Error(ErrorCode::ZeroTau, "tau must be nonzero");
  if (std::abs(characteristic_residual(geom, kernel, p0)) > 1e-8)
    throw Error(ErrorCode::NonCharacteristicInput, "start point violates the characteristic condition");

  const double abs_tau = std::abs(p0.tau);
  const DampingField& damping = geom.damping();
  const double eps_b = opt.rule.eps_rel * damping.max_value();
  const double l_min = opt.rule.length_rel * geom.diameter();

  FlowResult res;
  res.arc.push_back(p0.x);
  PhasePoint p = p0;
  const double t_end = p0.t + max_time;

  // observation bookkeeping (level set {b >= eps_b})
  bool in_level = false;
  bool entry_ok = false;
  double dwell = 0.0;

  const double residual0 = characteristic_residual(geom, kernel, p0);
  auto drift = [&](const PhasePoint& q) {
    res.max_characteristic_drift =
        std::max(res.max_characteristic_drift, std::abs(characteristic_residual(geom, kernel, q) - residual0));
  };

  double h = 1e-3 * geom.diameter();
  for (int guard = 0; guard < 10'000'000; ++guard) {
    if (p.t >= t_end) break;
    const bool curved = p.medium == Medium::Omega1 && !damping.empty() && damping.in_support(p.x);
    if (!curved) {
      const double c = p.medium == Medium::Omega2 ? geom.k2() : geom.k1();
      const double speed = std::sqrt(c);
      const Vec2 dir = normalized(p.xi);
      const WallHit wall = straight_wall_hit(geom, p.x, dir, p.medium);
      if (!std::isfinite(wall.dist)) {
        // tangential departure from a boundary point: report it as a (glancing) hit in place
        std::optional<CurveId> on;
        for (CurveId c : {CurveId::Outer, CurveId::Inner})
          if (std::abs(geom.curve(c).signed_distance(p.x)) <= 1e-9) on = c;
        if (!on) throw Error(ErrorCode::LeftDomain, "straight flight found no boundary ahead");
        res.hit = BoundaryHit{*on, geom.curve(*on).closest_parameter(p.x)};
        break;
      }
      double dist = wall.dist;
      bool to_support = false;
      if (p.medium == Medium::Omega1 && !damping.empty()) {
        if (auto e = damping.support_entry(p.x, dir); e && *e < dist) {
          dist = *e;
          to_support = true;
        }
      }
      const double time_left = t_end - p.t;
      if (dist / speed > time_left) {
        p.x += dir * (time_left * speed);
        p.t = t_end;
        res.arc.push_back(p.x);
        break;
      }
      p.t += dist / speed;
      if (to_support) {
        p.x += dir * dist;
        res.arc.push_back(p.x);
        // nudge into the closed support so the curved branch engages
        if (!damping.in_support(p.x)) p.x += dir * 1e-13;
        continue;
      }
      p.x = p.x + dir * dist;
      res.arc.push_back(p.x);
      res.hit = BoundaryHit{wall.curve, wall.s};
      break;
    }

    // Curved flight inside supp(b).
    RkState y{p.x, p.xi};
    h = std::min(h, t_end - p.t);
    if (h <= 0) break;
    auto [next, err] = dp_step(geom, kernel, y, h, abs_tau, opt.atol, opt.rtol);
    if (!(err <= 1.0)) {
      const double factor = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
      h *= factor;
      if (h < 1e-14) throw Error(ErrorCode::StiffnessFailure, "step size underflow in Hamiltonian flow");
      continue;
    }
    // boundary crossing within the step?
    std::optional<CurveId> crossed;
    for (CurveId c : {CurveId::Outer, CurveId::Inner}) {
      if (exit_indicator(geom, c, p.x, p.medium) < 0.0 && exit_indicator(geom, c, next.x, p.medium) >= 0.0) {
        crossed = c;
        break;
      }
    }
    double step = h;
    if (crossed) {
      // bisection/secant (Illinois) on the step fraction
      double lo = 0.0, hi = 1.0;
      double flo = exit_indicator(geom, *crossed, p.x, p.medium);
      double fhi = exit_indicator(geom, *crossed, next.x, p.medium);
      RkState best = next;
      int side = 0;
      for (int it = 0; it < 200; ++it) {
        double mid = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        const RkState trial = dp_step(geom, kernel, y, mid * h, abs_tau, opt.atol, opt.rtol).first;
        const double fm = exit_indicator(geom, *crossed, trial.x, p.medium);
        if (fm >= 0.0) {
          hi = mid;
          fhi = fm;
          best = trial;
          if (side == 1) flo *= 0.5;
          side = 1;
        } else {
          lo = mid;
          flo = fm;
          if (side == -1) fhi *= 0.5;
          side = -1;
        }
        if (std::abs(fm) <= 1e-11 && fm >= 0.0) break;
        if ((hi - lo) * h * std::sqrt(geom.k1()) < 1e-13) break;
      }
      next = best;
      step = hi * h;
    }

    const double seg_len = norm(next.x - p.x);
    const BValue b_new = damping.evaluate(next.x);
    p.x = next.x;
    p.xi = next.xi;
    p.t += step;
    res.arc.push_back(p.x);
    drift(p);

    if (opt.stop_when_observed && eps_b > 0) {
      if (b_new.value >= eps_b) {
        if (!in_level) {
          in_level = true;
          dwell = 0.0;
          const double gnorm = norm(b_new.gradient);
          const double sin_angle = gnorm > 0 ? std::abs(dot(normalized(p.xi), b_new.gradient)) / gnorm : 1.0;
          entry_ok = std::asin(std::min(1.0, sin_angle)) >= opt.rule.theta_min;
        } else {
          dwell += seg_len;
        }
        if (entry_ok && dwell >= l_min) {
          res.observed = true;
          break;
        }
      } else {
        in_level = false;
      }
    }

    if (crossed) {
      res.hit = BoundaryHit{*crossed, geom.curve(*crossed).closest_parameter(p.x)};
      break;
    }
    if (err < 1e-300) {
      h *= 5.0;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    }
    h = std::min(h, 0.05 * geom.diameter());
  }
  res.end = p;
  drift(p);
  return res;
}

std::string to_string(EventSide s) {
  switch (s) {
    case EventSide::Hyperbolic: return "H";
    case EventSide::Glancing: return "G";
    case EventSide::Elliptic: return "E";
  }
  return "?";
}

std::string to_string(OutcomeTag t) {
  switch (t) {
    case OutcomeTag::Reflected: return "Reflected";
    case OutcomeTag::Transmitted: return "Transmitted";
    case OutcomeTag::Gliding: return "Gliding";
  }
  return "?";
}

std::string to_string(InterfaceClass c) { return to_string(c.side1) + "1x" + to_string(c.side2) + "2"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TimeBudget: return "TimeBudget";
    case Termination::EventBudget: return "EventBudget";
    case Termination::EnteredSuppB: return "EnteredSuppB";
    case Termination::GlancingUnresolved: return "GlancingUnresolved";
  }
  return "?";
}

const Outgoing* BoundaryEvent::find(OutcomeTag tag) const {
  for (const Outgoing& o : outcome)
    if (o.tag == tag) return &o;
  return nullptr;
}

namespace {

EventSide classify_side(double r, double threshold) {
  if (std::abs(r - threshold) <= kClassTol * threshold) return EventSide::Glancing;
  return r < threshold ? EventSide::Hyperbolic : EventSide::Elliptic;
}

}  // namespace

InterfaceClass classify_interface_pair(const Geometry& geom, const MemoryKernel& kernel, double s,
                                       double xi_tangential, double tau) {
  if (tau == 0.0) throw Error(ErrorCode::ZeroTau, "tau must be nonzero");
  const double c1 = speed_coefficient(geom, kernel, geom.inner().point(s), Medium::Omega1);
  const double r = xi_tangential * xi_tangential;
  return {classify_side(r, tau * tau / c1), classify_side(r, tau * tau / geom.k2())};
}

double critical_angle(double k1, double k2) { return std::asin(std::sqrt(k1 / k2)); }

BoundaryEvent snell_event(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& in) {
  if (std::abs(characteristic_residual(geom, kernel, in)) > 1e-8)
    throw Error(ErrorCode::NonCharacteristicInput, "incoming point violates the characteristic condition");
  BoundaryEvent ev;
  ev.curve = CurveId::Inner;
  ev.s = geom.inner().closest_parameter(in.x);
  ev.x = in.x;
  ev.t = in.t;
  ev.from = in.medium;
  ev.incoming_xi = in.xi;
  const Vec2 n = geom.inner().normal(ev.s);
  const Vec2 tan = geom.inner().unit_tangent(ev.s);
  const double xt = dot(in.xi, tan);
  const double xn = dot(in.xi, n);
  const double tau2 = in.tau * in.tau;
  const double c1 = speed_coefficient(geom, kernel, in.x, Medium::Omega1);
  const double T1 = tau2 / c1;
  const double T2 = tau2 / geom.k2();
  const double r = xt * xt;
  const InterfaceClass cls = classify_interface_pair(geom, kernel, ev.s, xt, in.tau);
  ev.side1 = cls.side1;
  ev.side2 = cls.side2;
  ev.incidence_angle = std::atan2(std::abs(xt), std::abs(xn));
  if (std::numbers::pi / 2 - ev.incidence_angle < kGlancingTol) {
    if (in.medium == Medium::Omega1) ev.side1 = EventSide::Glancing;
    else ev.side2 = EventSide::Glancing;
    return ev;  // no outgoing rays resolved for grazing incidence
  }

  auto make = [&](Vec2 xi, Medium m, OutcomeTag tag) {
    PhasePoint q = in;
    q.xi = xi;
    q.medium = m;
    ev.outcome.push_back({q, tag});
  };
  // Reflected ray stays in the incoming medium.
  make(in.xi - n * (2.0 * xn), in.medium, OutcomeTag::Reflected);
  if (in.medium == Medium::Omega1) {
    if (r <= T2 * (1.0 + kClassTol)) {
      const double normal2 = std::sqrt(std::max(T2 - r, 0.0));
      make(tan * xt - n * normal2, Medium::Omega2,
           cls.side2 == EventSide::Glancing ? OutcomeTag::Gliding : OutcomeTag::Transmitted);
    }
  } else {
    if (r <= T1 * (1.0 + kClassTol)) {
      const double normal1 = std::sqrt(std::max(T1 - r, 0.0));
      make(tan * xt + n * normal1, Medium::Omega1,
           cls.side1 == EventSide::Glancing ? OutcomeTag::Gliding : OutcomeTag::Transmitted);
    }
  }
  return ev;
}

BoundaryEvent outer_reflection(const Geometry& geom, const MemoryKernel& /*kernel*/, const PhasePoint& in) {
  BoundaryEvent ev;
  ev.curve = CurveId::Outer;
  ev.s = geom.outer().closest_parameter(in.x);
  ev.x = in.x;
  ev.t = in.t;
  ev.from = in.medium;
  ev.incoming_xi = in.xi;
  const Vec2 n = geom.outer().normal(ev.s);
  const Vec2 tan = geom.outer().unit_tangent(ev.s);
  const double xn = dot(in.xi, n);
  ev.incidence_angle = std::atan2(std::abs(dot(in.xi, tan)), std::abs(xn));
  if (std::numbers::pi / 2 - ev.incidence_angle < kGlancingTol) {
    ev.side1 = EventSide::Glancing;
    return ev;
  }
  ev.side1 = EventSide::Hyperbolic;
  PhasePoint q = in;
  q.xi = in.xi - n * (2.0 * xn);
  ev.outcome.push_back({q, OutcomeTag::Reflected});
  return ev;
}

namespace {

struct BranchStart {
  PhasePoint p;
  int parent = -1;
  int parent_event = -1;
};

// Runs one branch; pushes split-off branches onto `pending` in tree mode.
RayTrace run_branch(const Geometry& geom, const MemoryKernel& kernel, const BranchStart& start,
                    double t_end, int& events_left, BranchPolicy policy, const ObservationRule& rule,
                    std::vector<BranchStart>* pending, int self_index) {
  RayTrace tr;
  tr.parent = start.parent;
  tr.parent_event = start.parent_event;
  PhasePoint p = start.p;
  if (p.medium == Medium::Omega1 && geom.damping().value(p.x) > 0.0) {
    tr.terminated = Termination::EnteredSuppB;
    return tr;
  }
  FlowOptions opt;
  opt.rule = rule;
  opt.stop_when_observed = true;
  while (true) {
    if (p.t >= t_end) {
      tr.terminated = Termination::TimeBudget;
      break;
    }
    FlowResult fr = flow_segment(geom, kernel, p, t_end - p.t, opt);
    tr.max_characteristic_drift = std::max(tr.max_characteristic_drift, fr.max_characteristic_drift);
    tr.segments.push_back({p, fr.end, std::move(fr.arc)});
    p = fr.end;
    if (fr.observed) {
      tr.terminated = Termination::EnteredSuppB;
      break;
    }
    if (!fr.hit) {
      tr.terminated = Termination::TimeBudget;
      break;
    }
    if (events_left <= 0) {
      tr.terminated = Termination::EventBudget;
      break;
    }
    --events_left;
    BoundaryEvent ev = fr.hit->curve == CurveId::Outer ? outer_reflection(geom, kernel, p)
                                                       : snell_event(geom, kernel, p);
    tr.events.push_back(ev);
    if (ev.outcome.empty()) {
      tr.terminated = Termination::GlancingUnresolved;
      break;
    }
    const Outgoing* refl = ev.find(OutcomeTag::Reflected);
    const Outgoing* trans = ev.find(OutcomeTag::Transmitted);
    const Outgoing* next = refl;
    if (policy == BranchPolicy::Transmitted && trans) next = trans;
    if (policy == BranchPolicy::Tree && trans && pending)
      pending->push_back({trans->point, self_index, static_cast<int>(tr.events.size()) - 1});
    p = next->point;
  }
  return tr;
}

}  // namespace

RayTrace trace_ray(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p0,
                   const TraceBudget& budget, BranchPolicy policy, const ObservationRule& rule) {
  int events_left = budget.max_events;
  const BranchPolicy single = policy == BranchPolicy::Tree ? BranchPolicy::Reflected : policy;
  return run_branch(geom, kernel, {p0}, p0.t + budget.max_time, events_left, single, rule, nullptr, 0);
}

std::vector<RayTrace> trace_ray_tree(const Geometry& geom, const MemoryKernel& kernel, const PhasePoint& p0,
                                     const TraceBudget& budget, const ObservationRule& rule) {
  std::vector<RayTrace> out;
  std::vector<BranchStart> pending{{p0}};
  int events_left = budget.max_events;
  const double t_end = p0.t + budget.max_time;
  while (!pending.empty()) {
    const BranchStart start = pending.back();
    pending.pop_back();
    const int index = static_cast<int>(out.size());
    out.push_back(run_branch(geom, kernel, start, t_end, events_left, BranchPolicy::Tree, rule, &pending, index));
  }
  return out;
}

}  // namespace translab
