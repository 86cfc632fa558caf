#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "report_json.hpp"
#include "translab/cli.hpp"
#include "translab/error.hpp"

namespace translab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const fs::path& p) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MissingArtifact, p.string() + " is not valid JSON: " + e.what());
  }
}

std::string log_energy_csv(const std::string& csv, const fs::path& p) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::ostringstream os;
  os << "t,logE\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t, e;
    if (!std::getline(row, t, ',') || !std::getline(row, e, ','))
      throw Error(ErrorCode::MissingArtifact, p.string() + ": malformed row '" + line + "'");
    const double E = std::stod(e);
    if (E > 0.0) os << t << ',' << std::setprecision(17) << std::log(E) << '\n';
  }
  return os.str();
}

}  // namespace

std::vector<std::string> emit_plots(const std::vector<std::string>& inputs, const std::string& out_dir) {
  if (inputs.empty()) throw Error(ErrorCode::MissingArtifact, "no artifacts to convert");
  for (const std::string& in : inputs)
    if (!fs::is_regular_file(in)) throw Error(ErrorCode::MissingArtifact, in + " does not exist");
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto put = [&](const fs::path& p, const std::string& text) {
    write_text(p.string(), text);
    written.push_back(p.string());
  };
  for (const std::string& in : inputs) {
    const fs::path path(in);
    const std::string stem = path.stem().string();
    const std::string text = read_all(path);
    if (path.extension() == ".jsonl") {
      std::vector<json> traces;
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line))
        if (!line.empty()) traces.push_back(parse_json(line, path));
      put(fs::path(out_dir) / (stem + "_polylines.csv"), polylines_csv(traces));
    } else if (path.extension() == ".csv" && text.rfind("t,E,", 0) == 0) {
      put(fs::path(out_dir) / (stem + "_log.csv"), log_energy_csv(text, path));
    } else if (path.extension() == ".json") {
      const json j = parse_json(text, path);
      if (!j.is_object() || !j.contains("gamma1"))
        throw Error(ErrorCode::MissingArtifact, in + " is not a GCC report");
      put(fs::path(out_dir) / (stem + "_arcs.csv"), arcs_csv(j));
      put(fs::path(out_dir) / (stem + "_escape.csv"), escape_csv(j));
    } else {
      throw Error(ErrorCode::MissingArtifact, in + " is not a recognised artifact");
    }
  }
  return written;
}

std::vector<std::string> plot_inputs_in(const std::string& dir) {
  std::vector<std::string> found;
  for (const char* name : {"gcc_report.json", "energy.csv", "rays.jsonl"}) {
    const fs::path p = fs::path(dir) / name;
    if (fs::is_regular_file(p)) found.push_back(p.string());
  }
  if (found.empty())
    throw Error(ErrorCode::MissingArtifact, "no gcc_report.json, energy.csv or rays.jsonl in " + dir);
  return found;
}

}  // namespace translab::cli
