#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "translab/geometry.hpp"
#include "translab/kernel.hpp"
#include "translab/rays.hpp"

namespace translab {

/// Union of parameter intervals on one curve, assembled from flags at the
/// samples s_i = i/n (each flagged sample covers [s_i - 1/2n, s_i + 1/2n)).
struct BoundaryRegion {
  CurveId curve = CurveId::Outer;
  std::vector<std::pair<double, double>> intervals;  // disjoint, sorted, within [0,1]
  std::vector<bool> samples;

  static BoundaryRegion from_samples(CurveId curve, std::vector<bool> flags);
  double measure() const;
  bool contains(double s) const;
  bool empty() const { return intervals.empty(); }
  bool full() const;
  BoundaryRegion complement() const;
  /// Connected arcs of the region on the circle [0,1), merging across s = 0.
  std::vector<std::pair<double, double>> arcs() const;
};

struct GccSampling {
  int boundary_samples = 512;
  int interface_samples = 512;
  int angle_samples = 128;
  int ueg_samples = 256;
  int gamma1_outer_reflections = 0;
  int max_events = 32;
  int max_iterations = 64;
  int x0_grid = 48;
  ObservationRule rule{};
  double rtol = 1e-10;
};

/// Inward-normal rays from ∂Ω that enter supp(b) before reaching ∂Ω₂.
BoundaryRegion compute_gamma1(const Geometry& geom, const MemoryKernel& kernel, const GccSampling& sampling);

/// Γ(x₀) = {x ∈ ∂Ω : ⟨x - x₀, n(x)⟩ > 0} on n samples.
BoundaryRegion gamma_of_x0(const Geometry& geom, Vec2 x0, int n_samples);

struct X0Result {
  std::optional<Vec2> witness;
  Vec2 best{};
  int mismatches = 0;       // samples where Γ(best) and Γ₁ disagree
  int far_mismatches = 0;   // of those, samples more than 2 samples from a Γ₁ endpoint
};

/// Grid search (then pattern refinement) for x₀ with Γ(x₀) = Γ₁ up to 2/n in parameter.
X0Result check_x0(const Geometry& geom, const BoundaryRegion& gamma1, int grid = 48);

struct WeakGccResult {
  bool ok = true;
  int samples = 0;
  int failures = 0;
  std::optional<PhasePoint> counterexample;  // start of γ⁺ for the first failing sample
  std::optional<RayTrace> counterexample_trace;
};

WeakGccResult check_weak_gcc(const Geometry& geom, const MemoryKernel& kernel, const BoundaryRegion& gamma1,
                             const GccSampling& sampling);

struct Gamma2Result {
  BoundaryRegion region;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;                   // every iterate contains the previous one (sample level)
  std::vector<double> measures;           // Γ₂ᵏ measure per iteration
  std::vector<double> observed_fraction;  // observed interface phase samples per iteration
};

Gamma2Result construct_gamma2(const Geometry& geom, const MemoryKernel& kernel, const BoundaryRegion& gamma1,
                              const GccSampling& sampling);

/// Billiard collision map in Ω₁: straight flight (b ignored) to the next hit on
/// ∂Ω ∪ ∂Ω₂, both treated as specular walls.
struct Collision {
  CurveId curve = CurveId::Outer;
  double s = 0.0;
  Vec2 x{};
  Vec2 incoming{};
  Vec2 reflected{};
  bool grazing = false;
};
Collision collision_map(const Geometry& geom, Vec2 x, Vec2 dir);

/// 𝓜(x, ξ) = ⟨ξ, n(Π_x 𝓕(x, ξ))^⊥⟩.
double escape_map(const Geometry& geom, Vec2 x, Vec2 xi, bool* grazing = nullptr);

enum class UegVerdict { Satisfied, Violated, Unresolved };
std::string to_string(UegVerdict v);

struct UegWitness {
  double s_a = 0.0, s_b = 0.0;
  double m_a = 0.0, m_b = 0.0;
};

struct UegResult {
  BoundaryRegion omega1f_outer;  // ∂Ω∖Γ₁
  BoundaryRegion omega1f_inner;  // ∂Ω₂∖Γ₂
  UegVerdict verdict = UegVerdict::Satisfied;
  bool empty_complement = false;
  std::optional<UegWitness> witness;
  double unresolved_fraction = 0.0;
  int samples = 0;
  int max_escape_events = 0;
  int max_escape_events_refined = 0;
  bool escape_growth = false;
  std::vector<std::pair<double, double>> m_profile;  // (s, 𝓜) samples
};

UegResult build_omega1f_and_check_ueg(const Geometry& geom, const BoundaryRegion& gamma1,
                                      const BoundaryRegion& gamma2, const GccSampling& sampling);

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct GccReport {
  std::vector<HypothesisCheck> checks;
  ConvexityReport convexity{};
  KernelGeometryCompat compat{};
  std::optional<BoundaryRegion> gamma1;
  std::optional<X0Result> x0;
  std::optional<WeakGccResult> weak_gcc;
  std::optional<Gamma2Result> gamma2;
  std::optional<UegResult> ueg;
  bool hypotheses_satisfied = false;
};

GccReport full_report(const Geometry& geom, const MemoryKernel& kernel, const GccSampling& sampling);

}  // namespace translab
