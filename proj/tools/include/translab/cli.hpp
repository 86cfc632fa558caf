#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "translab/gcc.hpp"
#include "translab/geometry.hpp"
#include "translab/kernel.hpp"
#include "translab/observability.hpp"
#include "translab/rays.hpp"
#include "translab/solver.hpp"

namespace translab::cli {

inline constexpr int kSchemaVersion = 1;

enum class Task { GccCheck, Simulate, Observability, FullPipeline, Trace, Plots };

std::string to_string(Task t);
/// "gcc-check", "simulate", "observability", "full-pipeline", "trace", "plots".
std::optional<Task> parse_task(const std::string& name);

/// Initial data for simulate / full-pipeline runs.
struct DataSpec {
  enum class Kind { Random, Packet, Whispering, Gaussian };
  Kind kind = Kind::Random;
  std::optional<std::uint64_t> seed;  // falls back to the scenario seed
  double frequency_cap = 0.0;         // random: 0 selects 2π/(8h)
  int modes = 24;                     // random
  Vec2 center{};                      // packet, whispering, gaussian
  Vec2 direction{1.0, 0.0};           // packet
  double wavenumber = 10.0;           // packet
  double width = 0.1;                 // packet, gaussian
  int order = 15;                     // whispering
  double radius = 0.0;                // whispering; 0 takes the outer circle radius
  bool normalize = true;              // scale to E(0) = 1
};

struct ObservabilitySpec {
  double T = 0.0;  // 0 selects 4·diam/√k₁
  EnsembleSpec ensemble{};            // ensemble.seed is ignored
  std::optional<std::uint64_t> seed;  // falls back to the scenario seed
  bool probe = true;
  int probe_modes = 10;
  double eps_vis = 1e-6;
};

struct RayStart {
  Vec2 x{};
  Vec2 direction{1.0, 0.0};
  Medium medium = Medium::Omega1;
};

struct RaySpec {
  std::vector<RayStart> starts;
  TraceBudget budget{};
  BranchPolicy policy = BranchPolicy::Tree;
};

struct Scenario {
  int version = kSchemaVersion;
  std::optional<Task> task;
  std::optional<GeometryDescriptor> geometry;
  std::optional<std::vector<PronyTerm>> kernel;
  GccSampling sampling{};
  std::optional<GridSpec> grid;
  DataSpec data{};
  std::vector<double> snapshot_times;
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
  ObservabilitySpec observability{};
  std::optional<RaySpec> rays;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

/// Parses a JSON scenario; throws ConfigParseError naming the offending key.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Throws ConfigParseError when a section required by `task` is absent.
void require_sections(const Scenario& s, Task task);

struct Overrides {
  std::optional<Task> task;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

/// Runs the task and writes its artifacts. Returns 0, or 2 when the
/// hypothesis checks fail (the report is still written). Throws on errors.
int execute(Scenario scenario, const Overrides& overrides, std::ostream& log);

/// Loads and executes; errors are printed to `err` and mapped to exit code 1.
int run_scenario(const std::string& path, const Overrides& overrides, std::ostream& log, std::ostream& err);

/// Converts existing artifacts into plot-ready files in `out_dir`:
///   *.jsonl ray traces   -> <stem>_polylines.csv
///   energy CSV           -> <stem>_log.csv (t, log E)
///   GCC report JSON      -> <stem>_arcs.csv and <stem>_escape.csv
/// Returns the written paths. Throws MissingArtifact for absent inputs.
std::vector<std::string> emit_plots(const std::vector<std::string>& inputs, const std::string& out_dir);

/// Artifacts a task leaves in the output directory.
std::vector<std::string> plot_inputs_in(const std::string& dir);

}  // namespace translab::cli
