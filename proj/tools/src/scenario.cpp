#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>

#include "translab/cli.hpp"
#include "translab/error.hpp"

namespace translab::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigParseError, (path.empty() ? std::string("<root>") : path) + ": " + what);
}

/// Read-only view of a JSON object that remembers where it sits in the file.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  void only(std::initializer_list<const char*> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) fail(sub(it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  Node object(const char* key) const { return Node(j_.at(key), sub(key)); }
  const json& raw(const char* key) const { return j_.at(key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(sub(key), "expected a number");
    return v.get<double>();
  }
  double number(const char* key) const {
    if (!has(key)) fail(sub(key), "required key is missing");
    return number(key, 0.0);
  }
  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(sub(key), "expected an integer");
    return v.get<int>();
  }
  std::uint64_t u64(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(sub(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(sub(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(sub(key), "expected a string");
    return v.get<std::string>();
  }
  Vec2 point(const char* key, Vec2 fallback) const {
    if (!has(key)) return fallback;
    return as_point(j_.at(key), sub(key));
  }
  Vec2 point(const char* key) const {
    if (!has(key)) fail(sub(key), "required key is missing");
    return point(key, Vec2{});
  }

  static Vec2 as_point(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(where, "expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

CurveSpec parse_curve(const Node& n) {
  const std::string type = n.string("type", "");
  if (type == "circle") {
    n.only({"type", "center", "radius"});
    return CircleSpec{n.point("center", {}), n.number("radius")};
  }
  if (type == "ellipse") {
    n.only({"type", "center", "semi_x", "semi_y", "rotation"});
    return EllipseSpec{n.point("center", {}), n.number("semi_x"), n.number("semi_y"), n.number("rotation", 0.0)};
  }
  if (type == "rounded_polygon") {
    n.only({"type", "vertices", "corner_radius"});
    RoundedPolygonSpec p;
    if (!n.has("vertices") || !n.raw("vertices").is_array()) fail(n.sub("vertices"), "expected an array of [x, y]");
    const json& vs = n.raw("vertices");
    for (std::size_t i = 0; i < vs.size(); ++i)
      p.vertices.push_back(Node::as_point(vs[i], n.sub("vertices") + "[" + std::to_string(i) + "]"));
    p.corner_radius = n.number("corner_radius", p.corner_radius);
    return p;
  }
  fail(n.sub("type"), "expected circle, ellipse or rounded_polygon");
}

BumpSpec parse_damping(const Node& n) {
  n.only({"center", "value", "radial_inner", "radial_outer", "radial_ramp", "angular", "angular_ramp", "profile"});
  BumpSpec b;
  b.center = n.point("center", b.center);
  b.value = n.number("value", b.value);
  b.radial_inner = n.number("radial_inner", b.radial_inner);
  b.radial_outer = n.number("radial_outer", b.radial_outer);
  b.radial_ramp = n.number("radial_ramp", b.radial_ramp);
  if (n.has("angular")) {
    const Vec2 a = n.point("angular");
    b.angular = std::pair{a.x, a.y};
  }
  b.angular_ramp = n.number("angular_ramp", b.angular_ramp);
  const std::string profile = n.string("profile", "exponential");
  if (profile == "exponential")
    b.profile = BumpProfile::Exponential;
  else if (profile == "polynomial")
    b.profile = BumpProfile::Polynomial;
  else
    fail(n.sub("profile"), "expected exponential or polynomial");
  return b;
}

GeometryDescriptor parse_geometry(const Node& n) {
  n.only({"outer", "inner", "k1", "k2", "damping", "smoothness_samples", "relaxed"});
  GeometryDescriptor d;
  if (!n.has("outer")) fail(n.sub("outer"), "required key is missing");
  if (!n.has("inner")) fail(n.sub("inner"), "required key is missing");
  d.outer = parse_curve(n.object("outer"));
  d.inner = parse_curve(n.object("inner"));
  d.k1 = n.number("k1");
  d.k2 = n.number("k2");
  if (n.has("damping")) d.damping = parse_damping(n.object("damping"));
  d.smoothness_samples = n.integer("smoothness_samples", d.smoothness_samples);
  d.relaxed = n.boolean("relaxed", false);
  return d;
}

std::vector<PronyTerm> parse_kernel(const Node& n) {
  n.only({"terms"});
  if (!n.has("terms") || !n.raw("terms").is_array()) fail(n.sub("terms"), "expected an array of {amplitude, tau}");
  std::vector<PronyTerm> terms;
  const json& ts = n.raw("terms");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Node t(ts[i], n.sub("terms") + "[" + std::to_string(i) + "]");
    t.only({"amplitude", "tau"});
    terms.push_back({t.number("amplitude"), t.number("tau")});
  }
  return terms;
}

GccSampling parse_sampling(const Node& n) {
  n.only({"boundary_samples", "interface_samples", "angle_samples", "ueg_samples", "gamma1_outer_reflections",
          "max_events", "max_iterations", "x0_grid", "rtol", "observation"});
  GccSampling s;
  s.boundary_samples = n.integer("boundary_samples", s.boundary_samples);
  s.interface_samples = n.integer("interface_samples", s.interface_samples);
  s.angle_samples = n.integer("angle_samples", s.angle_samples);
  s.ueg_samples = n.integer("ueg_samples", s.ueg_samples);
  s.gamma1_outer_reflections = n.integer("gamma1_outer_reflections", s.gamma1_outer_reflections);
  s.max_events = n.integer("max_events", s.max_events);
  s.max_iterations = n.integer("max_iterations", s.max_iterations);
  s.x0_grid = n.integer("x0_grid", s.x0_grid);
  s.rtol = n.number("rtol", s.rtol);
  if (n.has("observation")) {
    const Node o = n.object("observation");
    o.only({"eps_rel", "theta_min", "length_rel"});
    s.rule.eps_rel = o.number("eps_rel", s.rule.eps_rel);
    s.rule.theta_min = o.number("theta_min", s.rule.theta_min);
    s.rule.length_rel = o.number("length_rel", s.rule.length_rel);
  }
  if (s.boundary_samples < 8 || s.interface_samples < 8 || s.angle_samples < 2 || s.ueg_samples < 8)
    fail(n.path(), "sampling densities are too small");
  return s;
}

GridSpec parse_grid(const Node& n) {
  n.only({"nx", "ny", "dt", "s_max", "ns", "t_end", "sample_every", "track_prony"});
  GridSpec g;
  g.nx = n.integer("nx", g.nx);
  g.ny = n.integer("ny", g.nx);
  g.dt = n.number("dt", g.dt);
  g.s_max = n.number("s_max", g.s_max);
  g.ns = n.integer("ns", g.ns);
  g.t_end = n.number("t_end", g.t_end);
  g.sample_every = n.integer("sample_every", g.sample_every);
  g.track_prony = n.boolean("track_prony", g.track_prony);
  return g;
}

DataSpec parse_data(const Node& n) {
  n.only({"type", "seed", "frequency_cap", "modes", "center", "direction", "wavenumber", "width", "order", "radius",
          "normalize"});
  DataSpec d;
  const std::string type = n.string("type", "random");
  if (type == "random")
    d.kind = DataSpec::Kind::Random;
  else if (type == "packet")
    d.kind = DataSpec::Kind::Packet;
  else if (type == "whispering")
    d.kind = DataSpec::Kind::Whispering;
  else if (type == "gaussian")
    d.kind = DataSpec::Kind::Gaussian;
  else
    fail(n.sub("type"), "expected random, packet, whispering or gaussian");
  if (n.has("seed")) d.seed = n.u64("seed", 0);
  d.frequency_cap = n.number("frequency_cap", d.frequency_cap);
  d.modes = n.integer("modes", d.modes);
  d.center = n.point("center", d.center);
  d.direction = n.point("direction", d.direction);
  d.wavenumber = n.number("wavenumber", d.wavenumber);
  d.width = n.number("width", d.width);
  d.order = n.integer("order", d.order);
  d.radius = n.number("radius", d.radius);
  d.normalize = n.boolean("normalize", d.normalize);
  if (d.modes < 1) fail(n.sub("modes"), "must be positive");
  if (!(d.width > 0.0)) fail(n.sub("width"), "must be positive");
  if (d.order < 0) fail(n.sub("order"), "must be nonnegative");
  return d;
}

ObservabilitySpec parse_observability(const Node& n) {
  n.only({"T", "ensemble_size", "modes", "frequency_cap", "seed", "probe", "probe_modes", "eps_vis"});
  ObservabilitySpec o;
  o.T = n.number("T", o.T);
  o.ensemble.size = n.integer("ensemble_size", o.ensemble.size);
  o.ensemble.modes = n.integer("modes", o.ensemble.modes);
  o.ensemble.frequency_cap = n.number("frequency_cap", o.ensemble.frequency_cap);
  if (n.has("seed")) o.seed = n.u64("seed", 0);
  o.probe = n.boolean("probe", o.probe);
  o.probe_modes = n.integer("probe_modes", o.probe_modes);
  o.eps_vis = n.number("eps_vis", o.eps_vis);
  if (o.ensemble.size < 1) fail(n.sub("ensemble_size"), "must be positive");
  return o;
}

Medium parse_medium(const Node& n) {
  const std::string m = n.string("medium", "omega1");
  if (m == "omega1") return Medium::Omega1;
  if (m == "omega2") return Medium::Omega2;
  fail(n.sub("medium"), "expected omega1 or omega2");
}

RaySpec parse_rays(const Node& n) {
  n.only({"starts", "max_time", "max_events", "policy"});
  RaySpec r;
  if (!n.has("starts") || !n.raw("starts").is_array()) fail(n.sub("starts"), "expected an array of ray starts");
  const json& ss = n.raw("starts");
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const Node s(ss[i], n.sub("starts") + "[" + std::to_string(i) + "]");
    s.only({"x", "direction", "medium"});
    r.starts.push_back({s.point("x"), s.point("direction"), parse_medium(s)});
  }
  r.budget.max_time = n.number("max_time", r.budget.max_time);
  r.budget.max_events = n.integer("max_events", r.budget.max_events);
  const std::string policy = n.string("policy", "tree");
  if (policy == "tree")
    r.policy = BranchPolicy::Tree;
  else if (policy == "reflected")
    r.policy = BranchPolicy::Reflected;
  else if (policy == "transmitted")
    r.policy = BranchPolicy::Transmitted;
  else
    fail(n.sub("policy"), "expected tree, reflected or transmitted");
  return r;
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::GccCheck: return "gcc-check";
    case Task::Simulate: return "simulate";
    case Task::Observability: return "observability";
    case Task::FullPipeline: return "full-pipeline";
    case Task::Trace: return "trace";
    case Task::Plots: return "plots";
  }
  return "?";
}

std::optional<Task> parse_task(const std::string& name) {
  for (Task t : {Task::GccCheck, Task::Simulate, Task::Observability, Task::FullPipeline, Task::Trace, Task::Plots})
    if (to_string(t) == name) return t;
  return std::nullopt;
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigParseError, std::string("invalid JSON: ") + e.what());
  }
  const Node root(j, "");
  root.only({"version", "task", "seed", "output", "geometry", "kernel", "gcc", "grid", "data", "snapshots", "fit",
             "observability", "rays"});
  Scenario s;
  if (!root.has("version")) fail("version", "required key is missing");
  s.version = root.integer("version", 0);
  if (s.version != kSchemaVersion)
    fail("version", "unsupported schema version " + std::to_string(s.version) + " (expected " +
                        std::to_string(kSchemaVersion) + ")");
  if (root.has("task")) {
    const auto t = parse_task(root.string("task", ""));
    if (!t) fail("task", "unknown task");
    s.task = t;
  }
  s.seed = root.u64("seed", s.seed);
  s.output_dir = root.string("output", s.output_dir);
  if (root.has("geometry")) s.geometry = parse_geometry(root.object("geometry"));
  if (root.has("kernel")) s.kernel = parse_kernel(root.object("kernel"));
  if (root.has("gcc")) s.sampling = parse_sampling(root.object("gcc"));
  if (root.has("grid")) s.grid = parse_grid(root.object("grid"));
  if (root.has("data")) s.data = parse_data(root.object("data"));
  if (root.has("snapshots")) {
    const json& a = root.raw("snapshots");
    if (!a.is_array()) fail("snapshots", "expected an array of times");
    for (const json& t : a) {
      if (!t.is_number()) fail("snapshots", "expected an array of times");
      s.snapshot_times.push_back(t.get<double>());
    }
  }
  if (root.has("fit")) {
    const Node f = root.object("fit");
    f.only({"t_lo", "t_hi"});
    s.fit_t_lo = f.number("t_lo", 0.0);
    s.fit_t_hi = f.number("t_hi", 0.0);
  }
  if (root.has("observability")) s.observability = parse_observability(root.object("observability"));
  if (root.has("rays")) s.rays = parse_rays(root.object("rays"));
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParseError, "cannot read configuration file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const Error& e) {
    // prefix the file name, dropping the "<code>: " head of the original message
    const std::size_t head = to_string(e.code()).size() + 2;
    throw Error(e.code(), path + ": " + std::string(e.what()).substr(head));
  }
}

void require_sections(const Scenario& s, Task task) {
  auto need = [&](bool present, const char* section) {
    if (!present)
      throw Error(ErrorCode::ConfigParseError,
                  std::string("task ") + to_string(task) + " needs a '" + section + "' section");
  };
  if (task == Task::Plots) return;
  need(s.geometry.has_value(), "geometry");
  need(s.kernel.has_value(), "kernel");
  if (task == Task::Simulate || task == Task::Observability || task == Task::FullPipeline)
    need(s.grid.has_value(), "grid");
  if (task == Task::Trace) need(s.rays.has_value(), "rays");
}

}  // namespace translab::cli
