#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include <translab/cli.hpp>
#include <translab/error.hpp>

using namespace translab;
using namespace translab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json golden_config() {
  return json::parse(R"({
    "version": 1,
    "seed": 7,
    "geometry": {
      "outer": {"type": "circle", "center": [0, 0], "radius": 1.0},
      "inner": {"type": "circle", "center": [0, 0], "radius": 0.3},
      "k1": 1.0, "k2": 2.0,
      "damping": {"center": [0, 0], "value": 1.0, "radial_inner": 0.65, "radial_outer": 1.05, "radial_ramp": 0.1}
    },
    "kernel": {"terms": [{"amplitude": 1.5, "tau": 0.3}]},
    "gcc": {"boundary_samples": 128, "interface_samples": 128, "angle_samples": 32, "ueg_samples": 64},
    "grid": {"nx": 24, "ny": 24, "t_end": 3.0},
    "data": {"type": "random", "frequency_cap": 8.0},
    "snapshots": [1.0],
    "observability": {"ensemble_size": 2, "probe_modes": 3, "T": 2.0}
  })");
}

json trapped_config() {
  json j = golden_config();
  j["geometry"]["damping"] = json::parse(R"({"center": [0, 0], "value": 1.0, "radial_inner": 0.5,
      "radial_outer": 0.7, "radial_ramp": 0.05, "angular": [-2.0, 2.0], "angular_ramp": 0.2})");
  return j;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("translab_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const json& j) const {
    const fs::path p = path / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode parse_error_of(const json& j) {
  try {
    parse_scenario(j.dump());
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::MissingArtifact;
}

int run(const std::string& config, Task task, const fs::path& out, std::string* err_text = nullptr) {
  std::ostringstream log, err;
  Overrides o;
  o.task = task;
  o.out = out.string();
  const int status = run_scenario(config, o, log, err);
  if (err_text) *err_text = err.str();
  return status;
}

}  // namespace

TEST_CASE("scenario parsing fills every section") {
  const Scenario s = parse_scenario(golden_config().dump());
  CHECK(s.version == 1);
  CHECK(s.seed == 7);
  REQUIRE(s.geometry);
  CHECK(s.geometry->k2 == 2.0);
  CHECK(std::get<CircleSpec>(s.geometry->inner).radius == 0.3);
  CHECK(s.geometry->damping.radial_outer == 1.05);
  REQUIRE(s.kernel);
  CHECK(s.kernel->at(0).tau == 0.3);
  CHECK(s.sampling.angle_samples == 32);
  REQUIRE(s.grid);
  CHECK(s.grid->nx == 24);
  CHECK(s.grid->ny == 24);
  CHECK(s.data.kind == DataSpec::Kind::Random);
  CHECK(s.snapshot_times == std::vector<double>{1.0});
  CHECK(s.observability.ensemble.size == 2);
  CHECK(!s.observability.seed);
}

TEST_CASE("scenario parsing rejects malformed input") {
  json j = golden_config();
  j.erase("version");
  CHECK(parse_error_of(j) == ErrorCode::ConfigParseError);

  j = golden_config();
  j["version"] = 2;
  CHECK(parse_error_of(j) == ErrorCode::ConfigParseError);

  j = golden_config();
  j["geometry"]["kk"] = 1.0;
  CHECK(parse_error_of(j) == ErrorCode::ConfigParseError);

  j = golden_config();
  j["geometry"]["outer"]["type"] = "square";
  CHECK(parse_error_of(j) == ErrorCode::ConfigParseError);

  j = golden_config();
  j["grid"]["nx"] = "many";
  CHECK(parse_error_of(j) == ErrorCode::ConfigParseError);

  CHECK_THROWS_AS(parse_scenario("{ not json"), Error);
}

TEST_CASE("missing kernel section for simulate is a configuration error") {
  TempDir dir("nokernel");
  json j = golden_config();
  j.erase("kernel");
  const std::string cfg = dir.write("cfg.json", j);
  std::string err;
  CHECK(run(cfg, Task::Simulate, dir.path / "out", &err) == 1);
  CHECK(err.find("ConfigParseError") != std::string::npos);
  CHECK(err.find("kernel") != std::string::npos);
  CHECK_THROWS_AS(require_sections(parse_scenario(j.dump()), Task::Simulate), Error);
  CHECK(run(dir.path.string() + "/absent.json", Task::Simulate, dir.path / "out") == 1);
}

TEST_CASE("golden full pipeline passes and is reproducible") {
  TempDir dir("golden");
  const std::string cfg = dir.write("cfg.json", golden_config());
  REQUIRE(run(cfg, Task::FullPipeline, dir.path / "a") == 0);
  const json report = json::parse(slurp(dir.path / "a" / "report.json"));
  CHECK(report.at("hypotheses_satisfied") == true);
  CHECK(report.at("lambda").get<double>() > 0.0);
  CHECK(report.at("exit_status") == 0);
  for (const char* f : {"gcc_report.json", "gcc_arcs.csv", "energy.csv", "simulate_report.json",
                        "observability_report.json", "snapshots/snapshot_000.json", "snapshots/snapshot_000.bin"})
    CHECK_MESSAGE(fs::exists(dir.path / "a" / f), f);

  const json header = json::parse(slurp(dir.path / "a" / "snapshots" / "snapshot_000.json"));
  CHECK(header.at("t").get<double>() == doctest::Approx(1.0).epsilon(0.05));
  const auto n = header.at("nx").get<std::size_t>() * header.at("ny").get<std::size_t>();
  CHECK(fs::file_size(dir.path / "a" / "snapshots" / "snapshot_000.bin") == n * sizeof(double));

  REQUIRE(run(cfg, Task::FullPipeline, dir.path / "b") == 0);
  for (const char* f : {"report.json", "gcc_report.json", "simulate_report.json", "observability_report.json",
                        "energy.csv"})
    CHECK_MESSAGE(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f), f);
}

TEST_CASE("seed override changes the random data") {
  TempDir dir("seed");
  const std::string cfg = dir.write("cfg.json", golden_config());
  std::ostringstream log;
  Overrides o;
  o.task = Task::Simulate;
  o.out = (dir.path / "a").string();
  REQUIRE(execute(load_scenario(cfg), o, log) == 0);
  o.out = (dir.path / "b").string();
  o.seed = 8;
  REQUIRE(execute(load_scenario(cfg), o, log) == 0);
  CHECK(slurp(dir.path / "a" / "energy.csv") != slurp(dir.path / "b" / "energy.csv"));
  CHECK(json::parse(slurp(dir.path / "b" / "report.json")).at("seed") == 8);
}

TEST_CASE("trapped fixture reports a weak-GCC witness and exit 2") {
  TempDir dir("trapped");
  const std::string cfg = dir.write("cfg.json", trapped_config());
  REQUIRE(run(cfg, Task::GccCheck, dir.path / "out") == 2);
  const json rep = json::parse(slurp(dir.path / "out" / "gcc_report.json"));
  CHECK(rep.at("hypotheses_satisfied") == false);
  CHECK(rep.at("weak_gcc").at("ok") == false);
  CHECK(!rep.at("weak_gcc").at("counterexample").is_null());
  CHECK(rep.at("weak_gcc").at("failures").get<int>() > 0);
}

TEST_CASE("trace and plot outputs") {
  TempDir dir("trace");
  json j = golden_config();
  j["rays"] = json::parse(R"({"starts": [{"x": [-0.5, 0.0], "direction": [1, 0]}],
                               "max_time": 1.0, "max_events": 4, "policy": "transmitted"})");
  const std::string cfg = dir.write("cfg.json", j);
  REQUIRE(run(cfg, Task::Trace, dir.path / "out") == 0);
  std::istringstream lines(slurp(dir.path / "out" / "rays.jsonl"));
  std::string line;
  std::vector<json> records;
  while (std::getline(lines, line)) records.push_back(json::parse(line));
  REQUIRE(records.size() == 1);
  // radial ray: crosses the inclusion straight through the center
  const json& events = records[0].at("events");
  REQUIRE(events.size() >= 2);
  CHECK(events[0].at("kind") == "H1xH2");
  CHECK(events[0].at("x")[0].get<double>() == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(events[1].at("x")[0].get<double>() == doctest::Approx(0.3).epsilon(1e-9));

  REQUIRE(run(cfg, Task::Plots, dir.path / "out") == 0);
  const std::string poly = slurp(dir.path / "out" / "rays_polylines.csv");
  CHECK(poly.rfind("branch,segment,vertex,x,y,event,kind\n", 0) == 0);
  CHECK(poly.find(",1,H1xH2\n") != std::string::npos);
  CHECK(slurp(dir.path / "out" / "rays.csv") == poly);

  const std::vector<std::string> written =
      emit_plots({(dir.path / "out" / "rays.jsonl").string()}, (dir.path / "plots").string());
  CHECK(written.size() == 1);
}

TEST_CASE("plots from energy and gcc artifacts") {
  TempDir dir("plots");
  const std::string cfg = dir.write("cfg.json", golden_config());
  REQUIRE(run(cfg, Task::GccCheck, dir.path / "out") == 0);
  REQUIRE(run(cfg, Task::Simulate, dir.path / "out") == 0);
  const auto written = emit_plots(plot_inputs_in((dir.path / "out").string()), (dir.path / "plots").string());
  CHECK(written.size() == 3);
  const std::string log_e = slurp(dir.path / "plots" / "energy_log.csv");
  CHECK(log_e.rfind("t,logE\n0,", 0) == 0);
  const std::string arcs = slurp(dir.path / "plots" / "gcc_report_arcs.csv");
  CHECK(arcs.rfind("region,curve,s_lo,s_hi,x_lo,y_lo,x_hi,y_hi\n", 0) == 0);
  // full shell: Γ₁ is all of ∂Ω
  CHECK(arcs.find("gamma1,outer,0,1,") != std::string::npos);
}

TEST_CASE("missing artifacts") {
  TempDir dir("missing");
  CHECK_THROWS_AS(plot_inputs_in(dir.path.string()), Error);
  try {
    emit_plots({(dir.path / "nope.jsonl").string()}, dir.path.string());
    FAIL("expected MissingArtifact");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingArtifact);
  }
  const std::string cfg = dir.write("cfg.json", golden_config());
  CHECK(run(cfg, Task::Plots, dir.path / "empty") == 1);
}
