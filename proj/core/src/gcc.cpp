#include "translab/gcc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "translab/error.hpp"
#include "translab/parallel.hpp"

namespace translab {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

BoundaryRegion BoundaryRegion::from_samples(CurveId curve, std::vector<bool> flags) {
  BoundaryRegion r;
  r.curve = curve;
  r.samples = std::move(flags);
  const int n = static_cast<int>(r.samples.size());
  if (n == 0) return r;
  const double half = 0.5 / n;
  std::vector<std::pair<double, double>> raw;
  for (int i = 0; i < n; ++i) {
    if (!r.samples[i]) continue;
    const double c = static_cast<double>(i) / n;
    double a = c - half;
    double b = c + half;
    if (a < 0) {
      raw.push_back({a + 1.0, 1.0});
      a = 0.0;
    }
    raw.push_back({a, std::min(b, 1.0)});
  }
  std::sort(raw.begin(), raw.end());
  for (const auto& iv : raw) {
    if (!r.intervals.empty() && iv.first <= r.intervals.back().second + 1e-12)
      r.intervals.back().second = std::max(r.intervals.back().second, iv.second);
    else
      r.intervals.push_back(iv);
  }
  return r;
}

double BoundaryRegion::measure() const {
  double m = 0.0;
  for (const auto& [a, b] : intervals) m += b - a;
  return m;
}

bool BoundaryRegion::contains(double s) const {
  s = wrap_unit(s);
  for (const auto& [a, b] : intervals)
    if (s >= a && s < b) return true;
  return false;
}

bool BoundaryRegion::full() const { return !samples.empty() && std::all_of(samples.begin(), samples.end(), [](bool b) { return b; }); }

BoundaryRegion BoundaryRegion::complement() const {
  std::vector<bool> flags(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) flags[i] = !samples[i];
  return from_samples(curve, std::move(flags));
}

std::vector<std::pair<double, double>> BoundaryRegion::arcs() const {
  std::vector<std::pair<double, double>> out = intervals;
  if (out.size() >= 2 && out.front().first <= 1e-12 && out.back().second >= 1.0 - 1e-12) {
    const std::pair<double, double> merged{out.back().first, out.front().second + 1.0};
    out.erase(out.begin());
    out.pop_back();
    out.push_back(merged);
  }
  return out;
}

namespace {

struct Frame {
  Vec2 x, n, t;
};

Frame frame(const Curve& c, double s) { return {c.point(s), c.normal(s), c.unit_tangent(s)}; }

struct Walk {
  enum Kind { Observed, ReachedGamma1, HitInterface, Blocked } kind = Blocked;
  double s = 0.0;   // interface parameter for HitInterface
  Vec2 dir{};       // unit arrival direction for HitInterface
};

double walk_time_budget(const Geometry& geom, const MemoryKernel& kernel, int events) {
  const double l = std::max(1.0 - kernel.k0() * geom.damping().max_value(), 1e-3);
  return (events + 2) * geom.diameter() / std::sqrt(geom.k1() * l);
}

// Follows an Ω₁ ray with specular reflections at ∂Ω until it is observed in
// supp(b), lands on Γ₁ (if given), reaches ∂Ω₂ or runs out of budget.
Walk walk_omega1(const Geometry& geom, const MemoryKernel& kernel, Vec2 x, Vec2 dir, const BoundaryRegion* gamma1,
                 int max_outer, double max_time, const FlowOptions& opt) {
  if (geom.damping().value(x) > 0.0) return {Walk::Observed};
  PhasePoint p = make_phase_point(geom, kernel, x, dir, Medium::Omega1);
  int outer = 0;
  while (p.t < max_time) {
    FlowResult fr = flow_segment(geom, kernel, p, max_time - p.t, opt);
    p = fr.end;
    if (fr.observed) return {Walk::Observed};
    if (!fr.hit) return {Walk::Blocked};
    if (fr.hit->curve == CurveId::Inner) return {Walk::HitInterface, fr.hit->s, normalized(p.xi)};
    if (gamma1 && gamma1->contains(fr.hit->s)) return {Walk::ReachedGamma1};
    if (outer >= max_outer) return {Walk::Blocked};
    BoundaryEvent ev = outer_reflection(geom, kernel, p);
    if (ev.outcome.empty()) return {Walk::Blocked};
    p = ev.outcome.front().point;
    ++outer;
  }
  return {Walk::Blocked};
}

FlowOptions gcc_flow_options(const GccSampling& sampling) {
  FlowOptions opt;
  opt.rule = sampling.rule;
  opt.stop_when_observed = true;
  opt.rtol = sampling.rtol;
  opt.atol = sampling.rtol * 0.1;
  return opt;
}

}  // namespace

BoundaryRegion compute_gamma1(const Geometry& geom, const MemoryKernel& kernel, const GccSampling& sampling) {
  const int n = sampling.boundary_samples;
  std::vector<bool> flags(n, false);
  if (geom.damping().empty()) return BoundaryRegion::from_samples(CurveId::Outer, std::move(flags));
  const FlowOptions opt = gcc_flow_options(sampling);
  const double l = std::max(1.0 - kernel.k0() * geom.damping().max_value(), 1e-3);
  const double min_speed = std::sqrt(geom.k1() * l);
  const double budget = 3.0 * geom.diameter() / min_speed * (1 + sampling.gamma1_outer_reflections);
  std::vector<char> out(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const Frame f = frame(geom.outer(), static_cast<double>(i) / n);
    const Walk w = walk_omega1(geom, kernel, f.x, -f.n, nullptr, sampling.gamma1_outer_reflections, budget, opt);
    out[i] = w.kind == Walk::Observed;
  });
  for (int i = 0; i < n; ++i) flags[i] = out[i] != 0;
  return BoundaryRegion::from_samples(CurveId::Outer, std::move(flags));
}

BoundaryRegion gamma_of_x0(const Geometry& geom, Vec2 x0, int n_samples) {
  std::vector<bool> flags(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const Frame f = frame(geom.outer(), static_cast<double>(i) / n_samples);
    flags[i] = dot(f.x - x0, f.n) > 0.0;
  }
  return BoundaryRegion::from_samples(CurveId::Outer, std::move(flags));
}

X0Result check_x0(const Geometry& geom, const BoundaryRegion& gamma1, int grid) {
  const int n = static_cast<int>(gamma1.samples.size());
  X0Result res;
  if (n == 0) return res;
  std::vector<Frame> frames(n);
  for (int i = 0; i < n; ++i) frames[i] = frame(geom.outer(), static_cast<double>(i) / n);

  // distance (in samples) from each sample to the nearest change of the Γ₁ flag
  std::vector<int> to_edge(n, n);
  for (int i = 0; i < n; ++i) {
    if (gamma1.samples[i] != gamma1.samples[(i + 1) % n]) {
      for (int d = 0; d <= 2; ++d) {
        to_edge[((i - d) % n + n) % n] = std::min(to_edge[((i - d) % n + n) % n], d);
        to_edge[(i + 1 + d) % n] = std::min(to_edge[(i + 1 + d) % n], d);
      }
    }
  }

  struct Score {
    int far = 0;
    int mism = 0;
    double slack = 0.0;  // summed |⟨x - x₀, n⟩| over mismatched samples, for tie-breaking
    bool operator<(const Score& o) const {
      if (far != o.far) return far < o.far;
      if (mism != o.mism) return mism < o.mism;
      return slack < o.slack;
    }
  };
  auto score = [&](Vec2 x0) {
    Score sc;
    for (int i = 0; i < n; ++i) {
      const double v = dot(frames[i].x - x0, frames[i].n);
      if ((v > 0.0) != static_cast<bool>(gamma1.samples[i])) {
        ++sc.mism;
        sc.slack += std::abs(v);
        if (to_edge[i] > 2) ++sc.far;
      }
    }
    return sc;
  };

  const BoundingBox bb = geom.outer().bounding_box();
  const Vec2 c = (bb.lo + bb.hi) * 0.5;
  const double diam = geom.diameter();
  Vec2 best = c;
  Score best_score = score(c);
  const int nr = grid;
  const int na = 2 * grid;
  for (int ir = 1; ir <= nr; ++ir) {
    // radii spread geometrically from 0.01·diam to 1000·diam
    const double r = 0.01 * diam * std::pow(1e5, static_cast<double>(ir - 1) / (nr - 1));
    for (int ia = 0; ia < na; ++ia) {
      const double a = 2 * kPi * ia / na;
      const Vec2 x0 = c + Vec2{std::cos(a), std::sin(a)} * r;
      const Score sc = score(x0);
      if (sc < best_score) {
        best_score = sc;
        best = x0;
      }
    }
  }
  // pattern search
  double step = std::max(0.05 * norm(best - c), 0.05 * diam);
  while (step > 1e-7 * diam && best_score.mism > 0) {
    bool improved = false;
    for (Vec2 d : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}}) {
      const Vec2 trial = best + d * step;
      const Score sc = score(trial);
      if (sc < best_score) {
        best_score = sc;
        best = trial;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  res.best = best;
  res.mismatches = best_score.mism;
  res.far_mismatches = best_score.far;
  if (best_score.far == 0 && !gamma1.empty()) res.witness = best;
  return res;
}

WeakGccResult check_weak_gcc(const Geometry& geom, const MemoryKernel& kernel, const BoundaryRegion& gamma1,
                             const GccSampling& sampling) {
  WeakGccResult res;
  const int n = static_cast<int>(gamma1.samples.size());
  std::vector<int> points;
  for (int i = 0; i < n; ++i)
    if (gamma1.samples[i]) points.push_back(i);
  if (points.empty()) return res;
  const int na = sampling.angle_samples;
  const FlowOptions opt = gcc_flow_options(sampling);
  const double budget = walk_time_budget(geom, kernel, sampling.max_events);
  std::vector<char> fail(points.size() * na, 0);
  parallel_for(points.size(), [&](std::size_t k) {
    const Frame f = frame(geom.outer(), static_cast<double>(points[k]) / n);
    for (int j = 0; j < na; ++j) {
      const double theta = -kPi / 2 + (j + 0.5) * kPi / na;
      const Vec2 plus = -f.n * std::cos(theta) + f.t * std::sin(theta);
      const Vec2 minus = -f.n * std::cos(theta) - f.t * std::sin(theta);
      const Walk a = walk_omega1(geom, kernel, f.x, plus, nullptr, sampling.max_events, budget, opt);
      if (a.kind == Walk::Observed) continue;
      const Walk b = walk_omega1(geom, kernel, f.x, minus, nullptr, sampling.max_events, budget, opt);
      if (b.kind == Walk::Observed) continue;
      fail[k * na + j] = 1;
    }
  });
  res.samples = static_cast<int>(fail.size());
  for (std::size_t idx = 0; idx < fail.size(); ++idx) {
    if (!fail[idx]) continue;
    ++res.failures;
    if (res.counterexample) continue;
    const std::size_t k = idx / na;
    const int j = static_cast<int>(idx % na);
    const Frame f = frame(geom.outer(), static_cast<double>(points[k]) / n);
    const double theta = -kPi / 2 + (j + 0.5) * kPi / na;
    const Vec2 plus = -f.n * std::cos(theta) + f.t * std::sin(theta);
    res.counterexample = make_phase_point(geom, kernel, f.x, plus, Medium::Omega1);
    res.counterexample_trace = trace_ray(geom, kernel, *res.counterexample,
                                         {budget, sampling.max_events}, BranchPolicy::Reflected, sampling.rule);
  }
  res.ok = res.failures == 0;
  return res;
}

Gamma2Result construct_gamma2(const Geometry& geom, const MemoryKernel& kernel, const BoundaryRegion& gamma1,
                              const GccSampling& sampling) {
  const int ni = sampling.interface_samples;
  const int na = sampling.angle_samples;
  const int ne = ni * na;
  Gamma2Result res;
  if (gamma1.empty() && geom.damping().empty()) {
    res.region = BoundaryRegion::from_samples(CurveId::Inner, std::vector<bool>(ni, false));
    res.converged = true;
    return res;
  }
  const double crit = std::sqrt(geom.k1() / geom.k2());
  auto sigma_of = [&](int j) { return -1.0 + (2.0 * j + 1.0) / na; };
  auto lookup = [&](double s, double sigma) {
    const long i = std::lround(wrap_unit(s) * ni) % ni;
    const int j = std::clamp(static_cast<int>(std::floor((sigma + 1.0) * na / 2.0)), 0, na - 1);
    return static_cast<int>(i) * na + j;
  };

  // Fate of every half-ray: -1 free, -2 blocked, otherwise the event it lands on.
  constexpr int kFree = -1;
  constexpr int kBlocked = -2;
  std::vector<std::array<int, 4>> fate(ne, {kBlocked, kBlocked, kBlocked, kBlocked});
  const FlowOptions opt = gcc_flow_options(sampling);
  const double budget = walk_time_budget(geom, kernel, sampling.max_events);
  parallel_for(ni, [&](std::size_t i) {
    const Frame f = frame(geom.inner(), static_cast<double>(i) / ni);
    for (int j = 0; j < na; ++j) {
      const double sigma = sigma_of(j);
      const double cn = std::sqrt(1.0 - sigma * sigma);
      std::array<int, 4>& out = fate[i * na + j];
      for (int side = 0; side < 2; ++side) {
        const double sg = side == 0 ? sigma : -sigma;
        const Walk w = walk_omega1(geom, kernel, f.x, f.t * sg + f.n * cn, &gamma1, sampling.max_events, budget, opt);
        if (w.kind == Walk::Observed || w.kind == Walk::ReachedGamma1) {
          out[side] = kFree;
        } else if (w.kind == Walk::HitInterface) {
          out[side] = lookup(w.s, dot(w.dir, geom.inner().unit_tangent(w.s)));
        }
      }
      if (std::abs(sigma) < crit) {
        const double s2 = sigma / crit;
        const double c2 = std::sqrt(1.0 - s2 * s2);
        for (int side = 0; side < 2; ++side) {
          const Vec2 d = f.t * (side == 0 ? s2 : -s2) - f.n * c2;
          if (auto h = geom.inner().first_hit(f.x, d, 1e-10)) {
            out[2 + side] = lookup(h->s, dot(d, geom.inner().unit_tangent(h->s)) * crit);
          }
        }
      }
    }
  });

  std::vector<char> obs(ne, 0);
  auto free_of = [&](int target, const std::vector<char>& prev) {
    if (target == kFree) return true;
    if (target == kBlocked) return false;
    return prev[target] != 0;
  };
  auto region_of = [&](const std::vector<char>& o) {
    std::vector<bool> flags(ni);
    for (int i = 0; i < ni; ++i) {
      bool all = true;
      for (int j = 0; j < na && all; ++j) all = o[i * na + j] != 0;
      flags[i] = all;
    }
    return BoundaryRegion::from_samples(CurveId::Inner, std::move(flags));
  };

  for (int k = 1; k <= sampling.max_iterations; ++k) {
    std::vector<char> next(ne, 0);
    for (int e = 0; e < ne; ++e) {
      const double sigma = sigma_of(e % na);
      int count = 0;
      for (int h = 0; h < 4; ++h) count += free_of(fate[e][h], obs);
      if (std::abs(sigma) < crit)
        next[e] = count >= 2;
      else
        next[e] = count >= 1;
    }
    int observed = 0;
    for (int e = 0; e < ne; ++e) {
      if (obs[e] && !next[e]) res.monotone = false;
      observed += next[e];
    }
    const bool same = next == obs;
    obs = std::move(next);
    res.iterations = k;
    const BoundaryRegion r = region_of(obs);
    res.measures.push_back(r.measure());
    res.observed_fraction.push_back(static_cast<double>(observed) / ne);
    if (same) {
      res.converged = true;
      break;
    }
  }
  res.region = region_of(obs);
  return res;
}

Collision collision_map(const Geometry& geom, Vec2 x, Vec2 dir) {
  dir = normalized(dir);
  Collision c;
  double best = std::numeric_limits<double>::infinity();
  for (CurveId id : {CurveId::Outer, CurveId::Inner}) {
    if (auto h = geom.curve(id).first_hit(x, dir, 1e-10); h && h->t < best) {
      best = h->t;
      c.curve = id;
      c.s = h->s;
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::LeftDomain, "billiard flight found no wall");
  c.x = x + dir * best;
  c.incoming = dir;
  // inner normal points out of Ω₂, i.e. into Ω₁; flip so n points out of Ω₁
  Vec2 n = geom.curve(c.curve).normal(c.s);
  if (c.curve == CurveId::Inner) n = -n;
  const double dn = dot(dir, n);
  c.grazing = std::abs(dn) < std::sin(1e-8);
  c.reflected = dir - n * (2.0 * dn);
  return c;
}

double escape_map(const Geometry& geom, Vec2 x, Vec2 xi, bool* grazing) {
  const Collision c = collision_map(geom, x, xi);
  if (grazing) *grazing = c.grazing;
  const Vec2 n = geom.curve(c.curve).normal(c.s);
  return dot(xi, perp(n));
}

std::string to_string(UegVerdict v) {
  switch (v) {
    case UegVerdict::Satisfied: return "Satisfied";
    case UegVerdict::Violated: return "Violated";
    case UegVerdict::Unresolved: return "Unresolved";
  }
  return "?";
}

namespace {

int escape_events(const Geometry& geom, const BoundaryRegion& gamma1, const BoundaryRegion& gamma2, Vec2 x,
                  Vec2 dir, int cap) {
  const DampingField& b = geom.damping();
  for (int k = 0; k < cap; ++k) {
    const Collision c = collision_map(geom, x, dir);
    if (auto e = b.support_entry(x, dir); e && *e < norm(c.x - x)) return k;
    if (c.grazing) return cap;
    if (c.curve == CurveId::Outer && gamma1.contains(c.s)) return k + 1;
    if (c.curve == CurveId::Inner && gamma2.contains(c.s)) return k + 1;
    x = c.x;
    dir = c.reflected;
  }
  return cap;
}

struct ProfileResult {
  std::vector<std::pair<double, double>> profile;
  std::optional<UegWitness> witness;
  int grazing = 0;
  int samples = 0;
  int max_events = 0;
};

ProfileResult sample_profile(const Geometry& geom, const BoundaryRegion& gamma1, const BoundaryRegion& gamma2,
                             const std::vector<std::pair<double, double>>& arcs, int total, int cap) {
  ProfileResult pr;
  double total_len = 0.0;
  for (const auto& [a, b] : arcs) total_len += b - a;
  for (const auto& [a, b] : arcs) {
    const int m = std::max(4, static_cast<int>(std::lround(total * (b - a) / total_len)));
    double prev_m = 0.0, prev_s = 0.0;
    bool have_prev = false;
    for (int k = 0; k < m; ++k) {
      const double s = a + (k + 0.5) / m * (b - a);
      const double sw = wrap_unit(s);
      const Vec2 x = geom.inner().point(sw);
      const Vec2 n2 = geom.inner().normal(sw);
      bool graze = false;
      const double mv = escape_map(geom, x, n2, &graze);
      ++pr.samples;
      pr.max_events = std::max(pr.max_events, escape_events(geom, gamma1, gamma2, x, n2, cap));
      if (graze) {
        ++pr.grazing;
        have_prev = false;
        continue;
      }
      pr.profile.push_back({sw, mv});
      if (have_prev && mv - prev_m < -1e-9 && !pr.witness) pr.witness = UegWitness{prev_s, sw, prev_m, mv};
      prev_m = mv;
      prev_s = sw;
      have_prev = true;
    }
  }
  return pr;
}

}  // namespace

UegResult build_omega1f_and_check_ueg(const Geometry& geom, const BoundaryRegion& gamma1,
                                      const BoundaryRegion& gamma2, const GccSampling& sampling) {
  UegResult res;
  res.omega1f_outer = gamma1.complement();
  res.omega1f_inner = gamma2.complement();
  const auto arcs = res.omega1f_inner.arcs();
  if (arcs.empty()) {
    res.empty_complement = true;
    res.verdict = UegVerdict::Satisfied;
    return res;
  }
  const int cap = 2 * sampling.max_events;
  const ProfileResult base = sample_profile(geom, gamma1, gamma2, arcs, sampling.ueg_samples, cap);
  const ProfileResult refined = sample_profile(geom, gamma1, gamma2, arcs, 2 * sampling.ueg_samples, cap);
  res.m_profile = base.profile;
  res.samples = base.samples;
  res.unresolved_fraction = base.samples ? static_cast<double>(base.grazing) / base.samples : 0.0;
  res.max_escape_events = base.max_events;
  res.max_escape_events_refined = refined.max_events;
  res.escape_growth = refined.max_events > base.max_events;
  res.witness = base.witness;
  if (base.witness)
    res.verdict = UegVerdict::Violated;
  else if (base.grazing > 0)
    res.verdict = UegVerdict::Unresolved;
  else
    res.verdict = UegVerdict::Satisfied;
  return res;
}

GccReport full_report(const Geometry& geom, const MemoryKernel& kernel, const GccSampling& sampling) {
  GccReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
    return ok;
  };
  rep.compat = check_compat(kernel, geom);
  {
    std::ostringstream os;
    os << "k1=" << geom.k1() << " k2=" << geom.k2();
    if (!add("speed_ordering", geom.k2() > geom.k1(), os.str())) {
      rep.hypotheses_satisfied = false;
      return rep;
    }
  }
  add("kernel_positivity", rep.compat.valid, rep.compat.diagnostics);
  {
    double worst = -std::numeric_limits<double>::infinity();
    const double smax = 20.0 * kernel.max_tau();
    for (int i = 0; i <= 2000; ++i) {
      const double s = smax * i / 2000.0;
      worst = std::max(worst, kernel.g(s) + kernel.c_bound() * kernel.g_prime(s));
    }
    std::ostringstream os;
    os << "max_s (g + c g') = " << worst << " with c = " << kernel.c_bound();
    add("kernel_decay", worst <= 1e-12, os.str());
  }
  rep.convexity = check_convexity(geom);
  {
    std::ostringstream os;
    os << "min curvature outer=" << rep.convexity.min_curvature_outer
       << " inner=" << rep.convexity.min_curvature_inner;
    add("strict_convexity", rep.convexity.strictly_convex(), os.str());
  }
  {
    std::ostringstream os;
    os << "dist(supp b, interface)=" << geom.separation();
    add("support_separation", geom.separation() > 0.0, os.str());
  }

  rep.gamma1 = compute_gamma1(geom, kernel, sampling);
  {
    std::ostringstream os;
    os << "measure=" << rep.gamma1->measure();
    add("gamma1_nonempty", !rep.gamma1->empty(), os.str());
  }
  rep.x0 = check_x0(geom, *rep.gamma1, sampling.x0_grid);
  {
    std::ostringstream os;
    os << "best=(" << rep.x0->best.x << "," << rep.x0->best.y << ") mismatches=" << rep.x0->mismatches
       << " far=" << rep.x0->far_mismatches;
    add("x0", rep.x0->witness.has_value(), os.str());
  }
  rep.weak_gcc = check_weak_gcc(geom, kernel, *rep.gamma1, sampling);
  {
    std::ostringstream os;
    os << rep.weak_gcc->failures << " of " << rep.weak_gcc->samples << " sampled rays unobserved";
    add("weak_gcc", rep.weak_gcc->ok, os.str());
  }
  rep.gamma2 = construct_gamma2(geom, kernel, *rep.gamma1, sampling);
  {
    std::ostringstream os;
    os << "measure=" << rep.gamma2->region.measure() << " iterations=" << rep.gamma2->iterations;
    add("gamma2_converged", rep.gamma2->converged, os.str());
  }
  rep.ueg = build_omega1f_and_check_ueg(geom, *rep.gamma1, rep.gamma2->region, sampling);
  {
    std::ostringstream os;
    os << to_string(rep.ueg->verdict) << " unresolved_fraction=" << rep.ueg->unresolved_fraction;
    add("uniformly_escaping", rep.ueg->verdict == UegVerdict::Satisfied, os.str());
  }
  rep.hypotheses_satisfied = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.passed; });
  return rep;
}

}  // namespace translab
