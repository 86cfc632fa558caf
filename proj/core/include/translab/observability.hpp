#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "translab/geometry.hpp"
#include "translab/kernel.hpp"
#include "translab/solver.hpp"

namespace translab {

struct DecayFit {
  double lambda = 0.0;
  double C = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

/// Least-squares line through (t, log E) on [t_lo, t_hi]; λ = -slope and
/// C = exp(intercept) / E(0). A window with t_hi <= t_lo selects
/// [t_end/2, t_end].
DecayFit fit_decay(const EnergyTrace& trace, double t_lo = 0.0, double t_hi = 0.0);

/// Random band-limited data: a smooth cutoff vanishing on ∂Ω times a sum of
/// `modes` plane waves with wave vectors uniform in |k| <= frequency_cap
/// (0 selects 2π/(8h)).
struct EnsembleSpec {
  int size = 8;
  std::uint64_t seed = 1;
  int modes = 24;
  double frequency_cap = 0.0;
};

InitialData random_band_limited(const Geometry& geom, double frequency_cap, int modes, std::uint64_t seed);

/// Gaussian wave packet exp(-|x-c|²/σ²)·cos(k·(x-c)) moving along `direction`
/// with speed √k₁ (u₁ = -√k₁ ∂_d u₀ at leading order).
InitialData wave_packet(const Geometry& geom, Vec2 center, Vec2 direction, double wavenumber, double width);

/// Whispering-gallery field J_m(j_{m,1} r/R)·cos(mθ) on the disk of radius R
/// about `center`, zero outside. It vanishes on r = R and concentrates near
/// the caustic r = m R / j_{m,1}; u₁ = 0.
InitialData whispering_gallery(Vec2 center, double radius, int order);

/// First positive zero of the Bessel function J_m.
double bessel_first_zero(int order);

/// Rescales data so that the discrete energy at t = 0 is one; returns E(0)
/// before scaling (0 leaves the data untouched).
double normalize_energy(const Solver& solver, InitialData& data);

struct ObsEstimate {
  double T = 0.0;
  std::vector<double> ratios;          // E(0) / D(0,T), one per included member
  std::vector<int> near_invisible;     // members with D(0,T) < 1e-14·E(0)
  std::vector<int> excluded;           // members with E(0) = 0
  double c_obs = 0.0;                  // max ratio
  int ensemble_size = 0;
};

/// Default horizon 4·diam(Ω)/√k₁.
double default_horizon(const Geometry& geom);

ObsEstimate estimate_observability(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, double T,
                                   const EnsembleSpec& ensemble);
/// Same statistics over caller-supplied members.
ObsEstimate estimate_observability(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, double T,
                                   const std::vector<InitialData>& members);

struct Eigenmode {
  double omega2 = 0.0;         // eigenvalue of the undamped operator
  std::vector<double> field;   // grid-node values, zero on Dirichlet nodes, unit discrete L²
  double residual = 0.0;       // ‖Kx - ω²x‖ / (ω²‖x‖)
};

/// Lowest `count` eigenpairs of the undamped divergence-form operator
/// (c = k₁ on Ω₁, k₂ on Ω₂) by block inverse iteration with Rayleigh-Ritz.
std::vector<Eigenmode> compute_eigenmodes(const Solver& solver, int count, double tol = 1e-9, int max_iterations = 500);

struct ProbeEntry {
  int index = 0;
  double omega2 = 0.0;
  double ratio = 0.0;  // D(0,T) / E(0)
  bool visible = false;
};

struct ProbeReport {
  double T = 0.0;
  double eps_vis = 1e-6;
  std::vector<ProbeEntry> modes;
  bool all_visible = false;
};

ProbeReport invisible_probe(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, double T,
                            int count = 10, double eps_vis = 1e-6);

}  // namespace translab
