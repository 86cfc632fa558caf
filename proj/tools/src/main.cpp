#include <CLI11.hpp>
#include <iostream>

#include "translab/cli.hpp"
#include "translab/parallel.hpp"

int main(int argc, char** argv) {
  using namespace translab::cli;
  CLI::App app{"Viscoelastic transmission wave lab"};
  app.set_version_flag("--version", "transmission-lab 0.1.0");

  std::string task_name, config, out;
  std::uint64_t seed = 0;
  app.add_option("task", task_name, "gcc-check | simulate | observability | full-pipeline | trace | plots")
      ->required();
  auto* config_opt = app.add_option("--config,-c", config, "JSON scenario file")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out,-o", out, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed (overrides the config)");
  app.footer("Environment: TRANSLAB_WORKERS caps the number of worker threads (currently " +
             std::to_string(translab::worker_count()) + ").\nExit status: 0 success, 2 hypotheses violated, 1 error.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const auto task = parse_task(task_name);
  if (!task) {
    std::cerr << "error: unknown task '" << task_name << "'\n";
    return 1;
  }
  Overrides overrides;
  overrides.task = task;
  if (*out_opt) overrides.out = out;
  if (*seed_opt) overrides.seed = seed;

  if (!*config_opt) {
    if (*task != Task::Plots || !overrides.out) {
      std::cerr << "error: --config is required" << (*task == Task::Plots ? " (or --out for plots)" : "") << "\n";
      return 1;
    }
    try {
      for (const std::string& p : emit_plots(plot_inputs_in(*overrides.out), *overrides.out))
        std::cout << "plots: wrote " << p << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return run_scenario(config, overrides, std::cout, std::cerr);
}
