#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "report_json.hpp"
#include "translab/cli.hpp"
#include "translab/error.hpp"

namespace translab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Context {
  const Scenario& s;
  Task task;
  fs::path out;
  std::ostream& log;
};

json header(const Context& c) {
  return {{"version", kSchemaVersion}, {"task", to_string(c.task)}, {"seed", c.s.seed}};
}

void write_json(const fs::path& path, const json& j) { write_text(path.string(), j.dump(2) + "\n"); }

InitialData make_data(const DataSpec& d, const Geometry& geom, const Solver& solver, std::uint64_t seed) {
  switch (d.kind) {
    case DataSpec::Kind::Random: {
      const double cap = d.frequency_cap > 0.0 ? d.frequency_cap
                                               : 2 * std::numbers::pi / (8.0 * std::max(solver.hx(), solver.hy()));
      return random_band_limited(geom, cap, d.modes, d.seed.value_or(seed));
    }
    case DataSpec::Kind::Packet:
      return wave_packet(geom, d.center, d.direction, d.wavenumber, d.width);
    case DataSpec::Kind::Whispering: {
      double radius = d.radius;
      if (!(radius > 0.0)) {
        const auto* circle = std::get_if<CircleSpec>(&geom.descriptor().outer);
        if (!circle)
          throw Error(ErrorCode::ConfigParseError, "data.radius is required unless the outer boundary is a circle");
        radius = circle->radius;
      }
      return whispering_gallery(d.center, radius, d.order);
    }
    case DataSpec::Kind::Gaussian: {
      InitialData data;
      data.u0 = [c = d.center, w = d.width](Vec2 x) { return std::exp(-norm2(x - c) / (w * w)); };
      return data;
    }
  }
  return {};
}

const char* data_kind(DataSpec::Kind k) {
  switch (k) {
    case DataSpec::Kind::Random: return "random";
    case DataSpec::Kind::Packet: return "packet";
    case DataSpec::Kind::Whispering: return "whispering";
    case DataSpec::Kind::Gaussian: return "gaussian";
  }
  return "?";
}

json grid_json(const Solver& solver) {
  const GridSpec& g = solver.grid();
  return {{"nx", g.nx},
          {"ny", g.ny},
          {"hx", solver.hx()},
          {"hy", solver.hy()},
          {"dt", solver.dt()},
          {"steps", solver.steps()},
          {"t_end", solver.dt() * solver.steps()},
          {"ns", solver.ns()},
          {"s_max", solver.s_max()},
          {"sample_every", solver.sample_every()}};
}

bool run_gcc(const Context& c, const Geometry& geom, const MemoryKernel& kernel, json& summary) {
  const GccReport rep = full_report(geom, kernel, c.s.sampling);
  json j = header(c);
  j.update(to_json(rep, geom));
  write_json(c.out / "gcc_report.json", j);
  write_text((c.out / "gcc_arcs.csv").string(), arcs_csv(j));
  summary["hypotheses_satisfied"] = rep.hypotheses_satisfied;
  json failed = json::array();
  for (const HypothesisCheck& h : rep.checks)
    if (!h.passed) failed.push_back(h.name);
  summary["failed_checks"] = failed;
  c.log << "gcc-check: hypotheses " << (rep.hypotheses_satisfied ? "satisfied" : "violated");
  if (!failed.empty()) c.log << " (" << failed.dump() << ")";
  c.log << "\n";
  return rep.hypotheses_satisfied;
}

void run_simulate(const Context& c, const Geometry& geom, const MemoryKernel& kernel, json& summary) {
  const Solver solver(geom, kernel, *c.s.grid);
  InitialData data = make_data(c.s.data, geom, solver, c.s.seed);
  double raw_energy = 0.0;
  if (c.s.data.normalize) raw_energy = normalize_energy(solver, data);
  FieldState state = solver.init_state(data);
  Solver::RunOptions options;
  options.snapshot_times = c.s.snapshot_times;
  std::vector<Snapshot> snaps;
  const EnergyTrace trace = solver.run(state, options, &snaps);
  write_text((c.out / "energy.csv").string(), trace.to_csv());

  json snap_list = json::array();
  if (!snaps.empty()) fs::create_directories(c.out / "snapshots");
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(3) << std::setfill('0') << i;
    write_snapshot((c.out / "snapshots" / name.str()).string(), solver, snaps[i]);
    snap_list.push_back({{"t", snaps[i].t}, {"header", "snapshots/" + name.str() + ".json"}});
  }

  json j = header(c);
  j["grid"] = grid_json(solver);
  j["data"] = {{"type", data_kind(c.s.data.kind)}, {"normalized", c.s.data.normalize}, {"raw_energy", raw_energy}};
  j["E0"] = trace.E.front();
  j["E_final"] = trace.E.back();
  j["D_final"] = trace.D.back();
  j["residual_per_unit_time"] = trace.residual_per_unit_time();
  j["tail_bound"] = trace.tail_bound;
  if (trace.E.front() > 0.0) {
    const DecayFit fit = fit_decay(trace, c.s.fit_t_lo, c.s.fit_t_hi);
    j["decay"] = to_json(fit);
    summary["lambda"] = fit.lambda;
    summary["r_squared"] = fit.r_squared;
    c.log << "simulate: lambda = " << fit.lambda << " (r^2 = " << fit.r_squared << ")\n";
  } else {
    j["decay"] = nullptr;
    c.log << "simulate: zero initial energy, no decay fit\n";
  }
  j["snapshots"] = snap_list;
  write_json(c.out / "simulate_report.json", j);
}

void run_observability(const Context& c, const Geometry& geom, const MemoryKernel& kernel, json& summary) {
  const ObservabilitySpec& o = c.s.observability;
  const double T = o.T > 0.0 ? o.T : default_horizon(geom);
  EnsembleSpec ensemble = o.ensemble;
  ensemble.seed = o.seed.value_or(c.s.seed);
  const ObsEstimate est = estimate_observability(geom, kernel, *c.s.grid, T, ensemble);
  json j = header(c);
  j["ensemble_seed"] = ensemble.seed;
  j["estimate"] = to_json(est);
  summary["c_obs"] = est.c_obs;
  c.log << "observability: c_obs = " << est.c_obs << " over " << est.ratios.size() << " members, T = " << T << "\n";
  if (o.probe) {
    const ProbeReport probe = invisible_probe(geom, kernel, *c.s.grid, T, o.probe_modes, o.eps_vis);
    j["probe"] = to_json(probe);
    summary["all_modes_visible"] = probe.all_visible;
    c.log << "observability: lowest " << probe.modes.size() << " modes "
          << (probe.all_visible ? "all visible" : "include an invisible mode") << "\n";
  } else {
    j["probe"] = nullptr;
  }
  write_json(c.out / "observability_report.json", j);
}

void run_trace(const Context& c, const Geometry& geom, const MemoryKernel& kernel) {
  const RaySpec& r = *c.s.rays;
  std::string lines;
  std::vector<json> traces;
  int branch = 0;
  for (std::size_t i = 0; i < r.starts.size(); ++i) {
    const RayStart& st = r.starts[i];
    const PhasePoint p0 = make_phase_point(geom, kernel, st.x, st.direction, st.medium);
    std::vector<RayTrace> tree;
    if (r.policy == BranchPolicy::Tree)
      tree = trace_ray_tree(geom, kernel, p0, r.budget, c.s.sampling.rule);
    else
      tree.push_back(trace_ray(geom, kernel, p0, r.budget, r.policy, c.s.sampling.rule));
    for (const RayTrace& t : tree) {
      json j = to_json(t, branch++);
      j["start"] = i;
      lines += j.dump() + "\n";
      traces.push_back(std::move(j));
    }
  }
  write_text((c.out / "rays.jsonl").string(), lines);
  write_text((c.out / "rays.csv").string(), polylines_csv(traces));
  c.log << "trace: " << branch << " branches from " << r.starts.size() << " starts\n";
}

}  // namespace

int execute(Scenario s, const Overrides& o, std::ostream& log) {
  const std::optional<Task> task = o.task ? o.task : s.task;
  if (!task) throw Error(ErrorCode::ConfigParseError, "no task given on the command line or in the configuration");
  if (o.out) s.output_dir = *o.out;
  if (o.seed) s.seed = *o.seed;
  require_sections(s, *task);

  const fs::path out = s.output_dir;
  if (*task == Task::Plots) {
    for (const std::string& p : emit_plots(plot_inputs_in(out.string()), out.string())) log << "plots: wrote " << p << "\n";
    return 0;
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out))
    throw Error(ErrorCode::ConfigParseError, "output directory " + out.string() + " is not writable");

  const Context c{s, *task, out, log};
  const Geometry geom = build_geometry(*s.geometry);
  const MemoryKernel kernel = build_kernel(*s.kernel);
  json summary = header(c);
  int status = 0;
  switch (*task) {
    case Task::GccCheck:
      status = run_gcc(c, geom, kernel, summary) ? 0 : 2;
      break;
    case Task::Simulate:
      run_simulate(c, geom, kernel, summary);
      break;
    case Task::Observability:
      run_observability(c, geom, kernel, summary);
      break;
    case Task::FullPipeline:
      status = run_gcc(c, geom, kernel, summary) ? 0 : 2;
      run_simulate(c, geom, kernel, summary);
      run_observability(c, geom, kernel, summary);
      break;
    case Task::Trace:
      run_trace(c, geom, kernel);
      break;
    case Task::Plots:
      break;
  }
  summary["exit_status"] = status;
  write_json(out / "report.json", summary);
  return status;
}

int run_scenario(const std::string& path, const Overrides& overrides, std::ostream& log, std::ostream& err) {
  try {
    return execute(load_scenario(path), overrides, log);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace translab::cli
