#include "report_json.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "translab/error.hpp"

namespace translab::cli {

using nlohmann::json;

namespace {

const char* medium_name(Medium m) { return m == Medium::Omega1 ? "omega1" : "omega2"; }

json phase_json(const PhasePoint& p) {
  return {{"x", to_json(p.x)}, {"t", p.t}, {"xi", to_json(p.xi)}, {"tau", p.tau}, {"medium", medium_name(p.medium)}};
}

json samples_json(const std::vector<bool>& flags) {
  std::string s;
  s.reserve(flags.size());
  for (bool b : flags) s.push_back(b ? '1' : '0');
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

json to_json(Vec2 v) { return json::array({v.x, v.y}); }

json to_json(const BoundaryRegion& r, const Geometry& geom) {
  const Curve& c = geom.curve(r.curve);
  json arcs = json::array();
  for (const auto& [lo, hi] : r.arcs()) {
    arcs.push_back({{"s_lo", lo}, {"s_hi", hi}, {"x_lo", to_json(c.point(lo - std::floor(lo)))},
                    {"x_hi", to_json(c.point(hi - std::floor(hi)))}});
  }
  json intervals = json::array();
  for (const auto& [lo, hi] : r.intervals) intervals.push_back(json::array({lo, hi}));
  return {{"curve", to_string(r.curve)},
          {"measure", r.measure()},
          {"intervals", intervals},
          {"arcs", arcs},
          {"samples", samples_json(r.samples)}};
}

json to_json(const GccReport& r, const Geometry& geom) {
  json j;
  j["hypotheses_satisfied"] = r.hypotheses_satisfied;
  json checks = json::array();
  for (const HypothesisCheck& c : r.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  j["convexity"] = {{"outer_convex", r.convexity.outer_convex},
                    {"inner_convex", r.convexity.inner_convex},
                    {"min_curvature_outer", r.convexity.min_curvature_outer},
                    {"min_curvature_inner", r.convexity.min_curvature_inner}};
  j["kernel_compat"] = {{"l", r.compat.l},
                        {"contraction_bound", r.compat.contraction_bound},
                        {"speed_ordering", r.compat.speed_ordering},
                        {"valid", r.compat.valid},
                        {"diagnostics", r.compat.diagnostics}};
  j["gamma1"] = r.gamma1 ? to_json(*r.gamma1, geom) : json();
  if (r.x0) {
    j["x0"] = {{"witness", r.x0->witness ? to_json(*r.x0->witness) : json()},
               {"best", to_json(r.x0->best)},
               {"mismatches", r.x0->mismatches},
               {"far_mismatches", r.x0->far_mismatches}};
  } else {
    j["x0"] = nullptr;
  }
  if (r.weak_gcc) {
    json w = {{"ok", r.weak_gcc->ok}, {"samples", r.weak_gcc->samples}, {"failures", r.weak_gcc->failures}};
    w["counterexample"] = r.weak_gcc->counterexample ? phase_json(*r.weak_gcc->counterexample) : json();
    w["counterexample_trace"] = r.weak_gcc->counterexample_trace ? to_json(*r.weak_gcc->counterexample_trace, 0) : json();
    j["weak_gcc"] = w;
  } else {
    j["weak_gcc"] = nullptr;
  }
  if (r.gamma2) {
    j["gamma2"] = {{"region", to_json(r.gamma2->region, geom)},
                   {"iterations", r.gamma2->iterations},
                   {"converged", r.gamma2->converged},
                   {"monotone", r.gamma2->monotone},
                   {"measures", r.gamma2->measures},
                   {"observed_fraction", r.gamma2->observed_fraction}};
  } else {
    j["gamma2"] = nullptr;
  }
  if (r.ueg) {
    const UegResult& u = *r.ueg;
    json ueg = {{"verdict", to_string(u.verdict)},
                {"empty_complement", u.empty_complement},
                {"omega1f_outer", to_json(u.omega1f_outer, geom)},
                {"omega1f_inner", to_json(u.omega1f_inner, geom)},
                {"unresolved_fraction", u.unresolved_fraction},
                {"samples", u.samples},
                {"max_escape_events", u.max_escape_events},
                {"max_escape_events_refined", u.max_escape_events_refined},
                {"escape_growth", u.escape_growth}};
    ueg["witness"] = u.witness ? json{{"s_a", u.witness->s_a}, {"s_b", u.witness->s_b}, {"m_a", u.witness->m_a},
                                      {"m_b", u.witness->m_b}}
                               : json();
    json profile = json::array();
    for (const auto& [s, m] : u.m_profile) profile.push_back(json::array({s, m}));
    ueg["m_profile"] = profile;
    j["ueg"] = ueg;
  } else {
    j["ueg"] = nullptr;
  }
  return j;
}

json to_json(const RayTrace& t, int branch) {
  json segs = json::array();
  for (const RaySegment& s : t.segments) {
    json arc = json::array();
    for (Vec2 p : s.arc) arc.push_back(to_json(p));
    segs.push_back({{"start", phase_json(s.start)}, {"end", phase_json(s.end)}, {"arc", arc}});
  }
  json events = json::array();
  for (const BoundaryEvent& e : t.events) {
    json out = json::array();
    for (const Outgoing& o : e.outcome) out.push_back({{"tag", to_string(o.tag)}, {"point", phase_json(o.point)}});
    std::string kind = e.curve == CurveId::Outer ? "outer-" + to_string(e.side1)
                                                 : to_string(InterfaceClass{e.side1, e.side2.value_or(e.side1)});
    events.push_back({{"curve", to_string(e.curve)},
                      {"s", e.s},
                      {"x", to_json(e.x)},
                      {"t", e.t},
                      {"from", medium_name(e.from)},
                      {"incidence_angle", e.incidence_angle},
                      {"kind", kind},
                      {"incoming_xi", to_json(e.incoming_xi)},
                      {"outcome", out}});
  }
  return {{"branch", branch},
          {"parent", t.parent},
          {"parent_event", t.parent_event},
          {"terminated", to_string(t.terminated)},
          {"max_characteristic_drift", t.max_characteristic_drift},
          {"segments", segs},
          {"events", events}};
}

json to_json(const DecayFit& f) {
  return {{"lambda", f.lambda}, {"C", f.C}, {"r_squared", f.r_squared}, {"t_lo", f.t_lo}, {"t_hi", f.t_hi}};
}

json to_json(const ObsEstimate& e) {
  return {{"T", e.T},
          {"ensemble_size", e.ensemble_size},
          {"c_obs", e.c_obs},
          {"ratios", e.ratios},
          {"near_invisible", e.near_invisible},
          {"excluded", e.excluded}};
}

json to_json(const ProbeReport& p) {
  json modes = json::array();
  for (const ProbeEntry& m : p.modes)
    modes.push_back({{"index", m.index}, {"omega2", m.omega2}, {"ratio", m.ratio}, {"visible", m.visible}});
  return {{"T", p.T}, {"eps_vis", p.eps_vis}, {"all_visible", p.all_visible}, {"modes", modes}};
}

std::string arcs_csv(const json& report) {
  std::ostringstream os;
  os << "region,curve,s_lo,s_hi,x_lo,y_lo,x_hi,y_hi\n";
  auto emit = [&](const char* name, const json& region) {
    if (region.is_null()) return;
    for (const json& a : region.at("arcs")) {
      os << name << ',' << region.at("curve").get<std::string>() << ',' << fmt(a.at("s_lo")) << ','
         << fmt(a.at("s_hi")) << ',' << fmt(a.at("x_lo")[0]) << ',' << fmt(a.at("x_lo")[1]) << ','
         << fmt(a.at("x_hi")[0]) << ',' << fmt(a.at("x_hi")[1]) << '\n';
    }
  };
  emit("gamma1", report.value("gamma1", json()));
  if (!report.value("gamma2", json()).is_null()) emit("gamma2", report.at("gamma2").at("region"));
  if (!report.value("ueg", json()).is_null()) {
    emit("omega1f_outer", report.at("ueg").at("omega1f_outer"));
    emit("omega1f_inner", report.at("ueg").at("omega1f_inner"));
  }
  return os.str();
}

std::string escape_csv(const json& report) {
  std::ostringstream os;
  os << "s,M\n";
  if (!report.value("ueg", json()).is_null())
    for (const json& p : report.at("ueg").at("m_profile")) os << fmt(p[0]) << ',' << fmt(p[1]) << '\n';
  return os.str();
}

std::string polylines_csv(const std::vector<json>& traces) {
  std::ostringstream os;
  os << "branch,segment,vertex,x,y,event,kind\n";
  for (const json& t : traces) {
    const int branch = t.at("branch").get<int>();
    const json& segs = t.at("segments");
    const json& events = t.at("events");
    int vertex = 0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const json& arc = segs[k].at("arc");
      for (std::size_t i = 0; i < arc.size(); ++i) {
        const bool flagged = i + 1 == arc.size() && k < events.size();
        os << branch << ',' << k << ',' << vertex++ << ',' << fmt(arc[i][0]) << ',' << fmt(arc[i][1]) << ','
           << (flagged ? 1 : 0) << ',' << (flagged ? events[k].at("kind").get<std::string>() : std::string()) << '\n';
      }
    }
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingArtifact, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::MissingArtifact, "write failed for " + path);
}

void write_snapshot(const std::string& stem, const Solver& solver, const Snapshot& snap) {
  const GridSpec& g = solver.grid();
  {
    std::ofstream out(stem + ".bin", std::ios::binary);
    if (!out) throw Error(ErrorCode::MissingArtifact, "cannot write " + stem + ".bin");
    out.write(reinterpret_cast<const char*>(snap.w.data()), static_cast<std::streamsize>(snap.w.size() * sizeof(double)));
  }
  const Vec2 origin = solver.node_position(0, 0);
  const json header = {{"version", 1},
                       {"t", snap.t},
                       {"nx", g.nx + 1},
                       {"ny", g.ny + 1},
                       {"x0", origin.x},
                       {"y0", origin.y},
                       {"hx", solver.hx()},
                       {"hy", solver.hy()},
                       {"dtype", "float64"},
                       {"endian", std::endian::native == std::endian::little ? "little" : "big"},
                       {"layout", "row-major, index j*nx + i, x = x0 + i*hx, y = y0 + j*hy"},
                       {"data", stem.substr(stem.find_last_of('/') + 1) + ".bin"}};
  write_text(stem + ".json", header.dump(2) + "\n");
}

}  // namespace translab::cli
