// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Usage: translab_acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <translab/gcc.hpp>
#include <translab/kernel.hpp>
#include <translab/observability.hpp>
#include <translab/rays.hpp>
#include <translab/solver.hpp>

#include "support/fixtures.hpp"

using namespace translab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GeometryDescriptor bump_annulus() {
  GeometryDescriptor d = fixtures::golden_annulus();
  d.damping.center = {0.6, 0.0};
  d.damping.radial_inner = 0.0;
  d.damping.radial_outer = 0.1;
  d.damping.radial_ramp = 0.1;
  return d;
}

Outcome hamiltonian_conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const Geometry g = build_geometry(bump_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  const Vec2 c = g.damping().spec().center;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double drift = 0.0, momentum = 0.0, bend = 0.0;
  int rays = 0;
  while (rays < 1000) {
    const double a = 2 * kPi * unit(rng);
    const Vec2 start = c + Vec2{std::cos(a), std::sin(a)} * 0.25;
    const double b = 2 * kPi * unit(rng);
    const Vec2 aim = c + Vec2{std::cos(b), std::sin(b)} * (0.15 * std::sqrt(unit(rng)));
    const PhasePoint p = make_phase_point(g, k, start, aim - start, Medium::Omega1);
    const FlowResult r = flow_segment(g, k, p, 10.0);
    drift = std::max(drift, r.max_characteristic_drift);
    const double l0 = cross(p.x - c, p.xi), l1 = cross(r.end.x - c, r.end.xi);
    momentum = std::max(momentum, std::abs(l1 - l0) / std::max(1.0, std::abs(l0)));
    bend = std::max(bend, std::abs(cross(normalized(p.xi), normalized(r.end.xi))));
    ++rays;
  }
  const double secs = seconds_since(t0);
  return {drift <= 1e-8 && momentum <= 1e-8 && secs <= 10.0 && bend > 1e-3,
          fmt("%d rays: max symbol drift %.2e, max x^xi drift %.2e, max bend %.3f, %.2f s", rays, drift, momentum,
              bend, secs)};
}

Outcome snell_residual() {
  GeometryDescriptor ellipse = fixtures::golden_annulus();
  ellipse.inner = EllipseSpec{{0.05, -0.02}, 0.35, 0.2, 0.3};
  const std::vector<Geometry> geoms = {build_geometry(fixtures::golden_annulus()), build_geometry(ellipse)};
  const MemoryKernel k = fixtures::golden_kernel();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  double worst = 0.0;
  int hits = 0, transmissions = 0;
  for (; hits < 10000; ++hits) {
    const Geometry& g = geoms[hits % 2];
    const double s = unit(rng);
    const double st = sym(rng);
    const Medium from = unit(rng) < 0.5 ? Medium::Omega1 : Medium::Omega2;
    const Vec2 n = g.inner().normal(s), t = g.inner().unit_tangent(s);
    const double ct = std::sqrt(1.0 - st * st);
    const Vec2 dir = from == Medium::Omega1 ? t * st - n * ct : t * st + n * ct;
    const BoundaryEvent ev = snell_event(g, k, make_phase_point(g, k, g.inner().point(s), dir, from));
    const Outgoing* tr = ev.find(OutcomeTag::Transmitted);
    if (!tr) continue;
    ++transmissions;
    const double s_in = dot(normalized(ev.incoming_xi), t);
    const double s_out = dot(normalized(tr->point.xi), t);
    const double sin1 = from == Medium::Omega1 ? s_in : s_out;
    const double sin2 = from == Medium::Omega1 ? s_out : s_in;
    worst = std::max(worst, std::abs(sin1 / std::sqrt(g.k1()) - sin2 / std::sqrt(g.k2())));
  }
  const double crit = std::abs(critical_angle(1.0, 2.0) - kPi / 4);
  return {worst <= 1e-12 && crit <= 1e-12 && transmissions > 0,
          fmt("%d hits, %d transmissions: max residual %.2e; |critical - pi/4| = %.1e", hits, transmissions, worst,
              crit)};
}

Outcome kernel_bounds() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> amp(0.01, 2.0), logtau(std::log(0.05), std::log(5.0));
  std::uniform_int_distribution<int> count(1, 6);
  double worst = -1e300;
  int k0_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<PronyTerm> terms(count(rng));
    double k0 = 0.0;
    for (PronyTerm& t : terms) {
      t = {amp(rng), std::exp(logtau(rng))};
      k0 += t.amplitude * t.tau;
    }
    const MemoryKernel k = build_kernel(terms);
    if (k.k0() != k0) ++k0_mismatch;
    const double c = k.c_bound();
    for (int i = 0; i <= 2000; ++i) {
      const double s = 50.0 * c * i / 2000.0;
      worst = std::max(worst, k.g(s) + c * k.g_prime(s));
    }
  }
  return {worst <= 1e-12 && k0_mismatch == 0,
          fmt("1000 kernels: max(g + c g') = %.2e, k0 mismatches %d", worst, k0_mismatch)};
}

Outcome g_contraction() {
  GeometryDescriptor d = fixtures::golden_annulus();
  d.relaxed = true;
  d.damping.radial_inner = 0.2;
  d.damping.radial_outer = 0.9;
  d.damping.radial_ramp = 0.1;
  const Geometry g = build_geometry(d);
  bool ok = true;
  std::string detail;
  for (const MemoryKernel& k : {build_kernel({{0.5, 1.0}}), fixtures::golden_kernel(),
                                build_kernel({{0.3, 0.5}, {0.1, 2.0}})}) {
    const double bound = k.k0() * g.max_b_on_interface();
    const double est = estimate_G_norm(k, g, 400, 0.05, 4, 21, 200);
    ok = ok && est <= bound + 1e-3;
    detail += fmt("|G| %.4f <= %.4f; ", est, bound);
  }
  const MemoryKernel k = fixtures::golden_kernel();
  std::mt19937_64 rng(404);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    BoundaryTrace y = BoundaryTrace::zeros(0.0, 0.01, 400, {0.0, 0.25, 0.5, 0.75});
    for (double& v : y.values) v = normal(rng);
    worst = std::max(worst, invert_I_minus_G(k, g, y).residual);
  }
  ok = ok && worst <= 1e-9;
  return {ok, detail + fmt("Neumann residual max %.2e over 20 traces", worst)};
}

Outcome energy_identity() {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  std::vector<double> res;
  int violations = 0;
  std::string detail;
  for (int n : {64, 128, 256}) {
    GridSpec grid;
    grid.nx = grid.ny = n;
    grid.t_end = 2.0;
    const Solver s(g, k, grid);
    InitialData data;
    data.u0 = [](Vec2 x) { return std::exp(-norm2(x - Vec2{0.45, 0.0}) / 0.04); };
    FieldState st = s.init_state(data);
    const EnergyTrace tr = s.run(st);
    for (std::size_t i = 1; i < tr.E.size(); ++i)
      if (tr.E[i] > tr.E[i - 1] + tr.identity_residual[i] + 1e-15 * tr.E[0]) ++violations;
    res.push_back(tr.residual_per_unit_time());
    detail += fmt("%d: %.3e; ", n, res.back());
  }
  const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);
  return {std::min(o1, o2) >= 1.0 && violations == 0,
          detail + fmt("orders %.2f, %.2f; monotonicity violations %d", o1, o2, violations)};
}

Outcome conservative_limit() {
  GeometryDescriptor d = fixtures::undamped(fixtures::golden_annulus());
  d.k2 = d.k1;
  const Geometry g = build_geometry(d);
  GridSpec grid;
  grid.nx = grid.ny = 256;
  grid.t_end = 10.0;
  const Solver s(g, fixtures::golden_kernel(), grid);
  InitialData data;
  data.u0 = [](Vec2 x) { return std::exp(-norm2(x - Vec2{0.3, 0.2}) / 0.04); };
  FieldState st = s.init_state(data);
  const EnergyTrace tr = s.run(st);
  double worst = 0.0;
  for (double e : tr.E) worst = std::max(worst, std::abs(e - tr.E[0]) / tr.E[0]);
  return {worst <= 1e-3, fmt("max |E(t)-E(0)|/E(0) = %.2e over t <= %.2f", worst, tr.times.back())};
}

// Quasi one-dimensional strip: a tall rectangle split by a vertical interface,
// with a modulated pulse travelling in +x and a smooth window in y. Energy is
// measured in the central band, away from the window edges.
Outcome interface_split() {
  GeometryDescriptor d;
  d.outer = RoundedPolygonSpec{{{-1, -4}, {1, -4}, {1, 4}, {-1, 4}}, 0.1};
  d.inner = RoundedPolygonSpec{{{0, -3.8}, {0.9, -3.8}, {0.9, 3.8}, {0, 3.8}}, 0.05};
  d.k1 = 1.0;
  d.k2 = 2.0;
  d.damping.value = 0.0;
  const Geometry g = build_geometry(d);
  GridSpec grid;
  grid.nx = grid.ny = 256;
  grid.t_end = 0.82;
  const Solver s(g, fixtures::golden_kernel(), grid);
  const double sigma = 0.1, kc = 10.0, x0 = -0.5;
  auto window = [](double y) {
    const double a = std::abs(y);
    if (a <= 2.0) return 1.0;
    if (a >= 3.5) return 0.0;
    const double t = (a - 2.0) / 1.5;
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  };
  InitialData data;
  data.u0 = [=](Vec2 p) {
    const double z = (p.x - x0) / sigma;
    return std::exp(-z * z) * std::cos(kc * (p.x - x0)) * window(p.y);
  };
  data.u1 = [=](Vec2 p) {
    const double z = (p.x - x0) / sigma, e = std::exp(-z * z);
    return (2 * z / sigma * e * std::cos(kc * (p.x - x0)) + kc * e * std::sin(kc * (p.x - x0))) * window(p.y);
  };
  FieldState st = s.init_state(data);
  s.run(st);
  const double er = s.energy_split(st, [](Vec2 p) { return std::abs(p.y) < 1.0 && p.x < 0; }).first;
  const double et = s.energy_split(st, [](Vec2 p) { return std::abs(p.y) < 1.0 && p.x > 0; }).first;
  const double r = (1 - std::sqrt(2.0)) / (1 + std::sqrt(2.0));
  const double R = r * r, T = 1 - R;
  const double dr = er / (er + et) / R - 1, dt = et / (er + et) / T - 1;
  return {std::abs(dr) <= 0.02 && std::abs(dt) <= 0.02,
          fmt("R %.5f vs %.5f (%+.2f%%), T %.5f vs %.5f (%+.3f%%)", er / (er + et), R, 100 * dr, et / (er + et), T,
              100 * dt)};
}

struct Fit {
  DecayFit fit;
  double secs = 0.0;
};

Fit decay_run(const GeometryDescriptor& desc, int n, InitialData data) {
  const auto t0 = std::chrono::steady_clock::now();
  const Geometry g = build_geometry(desc);
  GridSpec grid;
  grid.nx = grid.ny = n;
  grid.t_end = 10.0;
  const Solver s(g, fixtures::golden_kernel(), grid);
  normalize_energy(s, data);
  FieldState st = s.init_state(data);
  const EnergyTrace tr = s.run(st);
  return {fit_decay(tr), seconds_since(t0)};
}

Outcome decay_contrast() {
  const Geometry golden = build_geometry(fixtures::golden_annulus());
  const bool satisfied = full_report(golden, fixtures::golden_kernel(), {}).hypotheses_satisfied;
  const InitialData random = random_band_limited(golden, 12.0, 24, 7);
  const Fit p64 = decay_run(fixtures::golden_annulus(), 64, random);
  const Fit p128 = decay_run(fixtures::golden_annulus(), 128, random);
  const InitialData chords = whispering_gallery({0, 0}, 1.0, 15);
  const Fit w_pass = decay_run(fixtures::golden_annulus(), 64, chords);
  const Fit w_trap = decay_run(fixtures::trapped_annulus(), 64, chords);
  const Fit r_trap = decay_run(fixtures::trapped_annulus(), 64, random);
  const double drift = p128.fit.lambda / p64.fit.lambda - 1;
  const double lambda_pass = std::min(p64.fit.lambda, w_pass.fit.lambda);
  const double slowest = std::max({p64.secs, p128.secs, w_pass.secs, w_trap.secs});
  const bool ok = satisfied && p64.fit.lambda > 0 && p128.fit.lambda > 0 && p64.fit.r_squared >= 0.98 &&
                  p128.fit.r_squared >= 0.98 && std::abs(drift) <= 0.25 && w_trap.fit.lambda <= lambda_pass / 5 &&
                  slowest <= 300.0;
  return {ok, fmt("passing: lambda %.4f (r2 %.4f) at 64, %.4f (r2 %.4f) at 128, drift %+.1f%%; chord data: "
                  "passing %.4f, trapped %.4f (limit %.4f); trapped random data %.4f; slowest run %.1f s",
                  p64.fit.lambda, p64.fit.r_squared, p128.fit.lambda, p128.fit.r_squared, 100 * drift,
                  w_pass.fit.lambda, w_trap.fit.lambda, lambda_pass / 5, r_trap.fit.lambda, slowest)};
}

Outcome observability_ratio() {
  const Geometry golden = build_geometry(fixtures::golden_annulus());
  const Geometry trapped = build_geometry(fixtures::trapped_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  const double T = default_horizon(golden);
  EnsembleSpec ens;
  ens.size = 4;
  ens.seed = 3;
  std::vector<double> c;
  for (int n : {64, 128}) {
    GridSpec grid;
    grid.nx = grid.ny = n;
    c.push_back(estimate_observability(golden, k, grid, T, ens).c_obs);
  }
  GridSpec grid;
  grid.nx = grid.ny = 128;
  const ObsEstimate chord = estimate_observability(trapped, k, grid, T, {whispering_gallery({0, 0}, 1.0, 40)});
  const double drift = c[1] / c[0] - 1;
  const double ratio = chord.ratios.empty() ? 0.0 : chord.ratios[0];
  return {std::abs(drift) <= 0.25 && ratio >= 10 * c[1],
          fmt("passing c_obs %.4f (64), %.4f (128), drift %+.1f%%; trapped chord ratio %.3f = %.1fx passing", c[0],
              c[1], 100 * drift, ratio, ratio / c[1])};
}

GccSampling doubled(GccSampling s) {
  s.boundary_samples *= 2;
  s.interface_samples *= 2;
  s.angle_samples *= 2;
  s.ueg_samples *= 2;
  s.x0_grid *= 2;
  return s;
}

Outcome gcc_stability() {
  const MemoryKernel k = fixtures::golden_kernel();
  bool ok = true;
  std::string detail;
  for (const auto& [name, desc] : {std::pair{"golden", fixtures::golden_annulus()},
                                   std::pair{"trapped", fixtures::trapped_annulus()}}) {
    const Geometry g = build_geometry(desc);
    const GccReport base = full_report(g, k, {});
    const GccReport again = full_report(g, k, {});
    const GccReport fine = full_report(g, k, doubled({}));
    bool same = base.hypotheses_satisfied == fine.hypotheses_satisfied && base.checks.size() == fine.checks.size();
    for (std::size_t i = 0; same && i < base.checks.size(); ++i)
      same = base.checks[i].passed == fine.checks[i].passed;
    const bool repeat = again.hypotheses_satisfied == base.hypotheses_satisfied &&
                        again.gamma1->samples == base.gamma1->samples &&
                        again.gamma2->region.samples == base.gamma2->region.samples;
    bool monotone = true;
    for (const GccReport* r : {&base, &fine}) {
      if (!r->gamma2) continue;
      monotone = monotone && r->gamma2->monotone;
      for (std::size_t i = 1; i < r->gamma2->measures.size(); ++i)
        monotone = monotone && r->gamma2->measures[i] >= r->gamma2->measures[i - 1];
    }
    ok = ok && same && repeat && monotone;
    detail += fmt("%s %s/%s, checks %s, rerun %s, gamma2 %s; ", name, base.hypotheses_satisfied ? "Satisfied" : "Violated",
                  fine.hypotheses_satisfied ? "Satisfied" : "Violated", same ? "unchanged" : "CHANGED",
                  repeat ? "identical" : "DIFFERS", monotone ? "monotone" : "NOT monotone");
  }
  const Geometry disk = build_geometry(fixtures::golden_annulus());
  bool full = true;
  for (int n : {64, 512, 4096}) {
    const BoundaryRegion r = gamma_of_x0(disk, {0, 0}, n);
    full = full && r.full() && r.measure() == 1.0;
  }
  ok = ok && full;
  return {ok, detail + fmt("Gamma(center) %s", full ? "full" : "NOT full")};
}

Outcome invisible_probe_check() {
  const Geometry golden = build_geometry(fixtures::golden_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  const double T = default_horizon(golden);
  std::vector<double> lows;
  bool visible = true;
  for (int n : {64, 128}) {
    GridSpec grid;
    grid.nx = grid.ny = n;
    const ProbeReport p = invisible_probe(golden, k, grid, T, 10, 1e-6);
    double low = 1e300;
    for (const ProbeEntry& m : p.modes) low = std::min(low, m.ratio);
    visible = visible && p.all_visible && p.modes.size() == 10;
    lows.push_back(low);
  }
  return {visible && lows[1] >= 0.5 * lows[0],
          fmt("min D/E over 10 modes: %.4e (64), %.4e (128), ratio %.3f", lows[0], lows[1], lows[1] / lows[0])};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"hamiltonian-conservation", hamiltonian_conservation},
      {"snell-residual", snell_residual},
      {"kernel-bounds", kernel_bounds},
      {"g-contraction", g_contraction},
      {"energy-identity", energy_identity},
      {"conservative-limit", conservative_limit},
      {"interface-split", interface_split},
      {"decay-contrast", decay_contrast},
      {"observability-ratio", observability_ratio},
      {"gcc-stability", gcc_stability},
      {"invisible-probe", invisible_probe_check},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %-25s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
