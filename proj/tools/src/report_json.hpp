#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "translab/gcc.hpp"
#include "translab/observability.hpp"
#include "translab/rays.hpp"
#include "translab/solver.hpp"

namespace translab::cli {

nlohmann::json to_json(Vec2 v);
nlohmann::json to_json(const BoundaryRegion& r, const Geometry& geom);
nlohmann::json to_json(const GccReport& r, const Geometry& geom);
nlohmann::json to_json(const RayTrace& t, int branch);
nlohmann::json to_json(const DecayFit& f);
nlohmann::json to_json(const ObsEstimate& e);
nlohmann::json to_json(const ProbeReport& p);

/// region,curve,s_lo,s_hi,x_lo,y_lo,x_hi,y_hi, one row per connected arc of
/// Γ₁, Γ₂ and the two boundary pieces of Ω₁ᶠ.
std::string arcs_csv(const nlohmann::json& gcc_report);
/// s,M samples of the escape map along ∂Ω₂∖Γ₂.
std::string escape_csv(const nlohmann::json& gcc_report);
/// branch,segment,vertex,x,y,event,kind; the last vertex of segment k is
/// flagged with event k when that event exists.
std::string polylines_csv(const std::vector<nlohmann::json>& traces);

/// Writes w as little-endian float64 (row-major, y outer) next to a JSON header.
void write_snapshot(const std::string& stem, const Solver& solver, const Snapshot& snap);

void write_text(const std::string& path, const std::string& text);

}  // namespace translab::cli
