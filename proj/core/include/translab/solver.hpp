#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "translab/geometry.hpp"
#include "translab/kernel.hpp"

namespace translab {

struct GridSpec {
  int nx = 128;
  int ny = 128;
  double dt = 0.0;        // <= 0 selects 0.5·h/√max(k1,k2)
  double s_max = 0.0;     // <= 0 selects 12·max τ
  int ns = 0;             // history nodes s_k = kΔs, k = 1..ns; <= 0 matches Δs = dt
  double t_end = 10.0;
  int sample_every = 0;   // steps between trace samples; <= 0 gives ~200 samples
  bool track_prony = false;
};

inline constexpr double kCflSafety = 0.5;

using ScalarField = std::function<double(Vec2)>;
using HistoryField = std::function<double(Vec2, double)>;

/// u₀,u₁ on Ω₁ and v₀,v₁ on Ω₂ (v₀,v₁ default to u₀,u₁); φ₀(x,s) is the past
/// history u(x,-s), defaulting to u₀ so that no memory is stored initially.
struct InitialData {
  ScalarField u0;
  ScalarField u1;
  ScalarField v0;
  ScalarField v1;
  HistoryField phi0;
  /// Grid-node values (Solver::node_count() entries) used instead of the
  /// functions when non-empty; Dirichlet entries are ignored.
  std::vector<double> w0_nodes;
  std::vector<double> w1_nodes;
};

/// η(x, t, s_k) on the nodes of the damping patch, transported by
/// η_t + η_s = u_t with η(s=0) = 0 (first-order upwind in s). Optionally
/// carries the Prony auxiliary fields ψ_j = ∫ g_j(s) η ds by their exact ODE.
class MemoryHistory {
 public:
  MemoryHistory() = default;
  MemoryHistory(const MemoryKernel& kernel, std::size_t nodes, double s_max, int ns, bool track_prony);

  std::size_t nodes() const { return nodes_; }
  int ns() const { return ns_; }
  double ds() const { return ds_; }
  double s(int k) const { return (k + 1) * ds_; }  // k = 0..ns-1
  double weight(int k) const { return q_[k]; }
  double g(int k) const { return g_[k]; }
  double g_prime(int k) const { return gp_[k]; }

  /// k = ns addresses the spare slot at s_max + Δs.
  double& eta(int k, std::size_t node) { return eta_[static_cast<std::size_t>(k) * nodes_ + node]; }
  double eta(int k, std::size_t node) const { return eta_[static_cast<std::size_t>(k) * nodes_ + node]; }
  const double* eta_slice(int k) const { return eta_.data() + static_cast<std::size_t>(k) * nodes_; }

  /// Σ_k q_k g(s_k) η_k per node (the s-quadrature of ∫ g η ds).
  const std::vector<double>& weighted_sum() const { return weighted_; }

  /// One forward-Euler / upwind step with source u_t (patch-node values).
  /// When dt equals Δs the step is the exact shift η_k ← η_{k-1} + dt·u_t;
  /// if `l_dw` holds L_B(dt·u_t), the cached norms ‖∇η_k‖²_b are then updated
  /// by the same recursion instead of being recomputed.
  void advance(const std::vector<double>& ut, double dt, const std::vector<double>* l_dw = nullptr);
  bool matched(double dt) const { return std::abs(dt - ds_) <= 1e-12 * ds_; }

  /// ⟨η_k, L_B η_k⟩ per slot when known (see advance).
  const std::vector<double>* norms() const { return norms_valid_ ? &norms_ : nullptr; }
  void set_norms(std::vector<double> norms) {
    norms_ = std::move(norms);
    norms_valid_ = true;
  }
  /// Recomputes cached sums (and drops cached norms) after η has been written directly.
  void refresh();

  bool tracks_prony() const { return !psi_.empty(); }
  /// ψ_j node values carried by the exact ODE.
  const std::vector<double>& prony_aux(std::size_t j) const { return psi_[j]; }
  /// Σ_k q_k g_j(s_k) η_k, the s-grid counterpart of ψ_j.
  std::vector<double> prony_quadrature(std::size_t j) const;
  /// Initializes ψ_j from the current η by s-quadrature.
  void sync_prony();

 private:
  std::vector<PronyTerm> terms_;
  std::size_t nodes_ = 0;
  int ns_ = 0;
  double ds_ = 0.0;
  std::vector<double> q_, g_, gp_;
  std::vector<double> eta_;
  std::vector<double> weighted_;
  std::vector<std::vector<double>> psi_;
  std::vector<double> norms_;
  bool norms_valid_ = false;
};

struct FieldState {
  double t = 0.0;
  long step = 0;
  std::vector<double> w;  // grid nodes (row-major, (nx+1)·(ny+1)); zero on Dirichlet nodes
  std::vector<double> v;  // velocity at t - dt/2
  MemoryHistory history;
  double damping_integral = 0.0;  // D(0, t)
  double damping_rate = 0.0;      // at the current η
};

struct EnergySample {
  double E = 0.0;
  double damping_rate = 0.0;
};

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> E;
  std::vector<double> D;
  std::vector<double> identity_residual;  // |ΔE + ΔD/2| over the preceding interval (0 for the first)
  double tail_bound = 0.0;                // k₁·(∫_{s_max}^∞ g)·max ‖∇η‖²_b over the run

  double residual_per_unit_time() const;
  std::string to_csv() const;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> w;
};

struct NodeInfo {
  bool active = false;  // interior of Ω (unknown); otherwise Dirichlet
  bool omega2 = false;
};

/// Cartesian finite-difference discretization of the autonomous memory system
/// in conservative form: w_tt = div(c∇w) + k₁ div(b Σ_k q_k g(s_k) ∇η_k),
/// c = k₁(1 - k₀b) on Ω₁ and k₂ on Ω₂ sampled at face midpoints (harmonic
/// mean on faces cut by the interface), homogeneous Dirichlet data on ∂Ω,
/// leapfrog in time. The geometry is referenced, not copied.
class Solver {
 public:
  Solver(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid);
  Solver(Geometry&&, const MemoryKernel&, const GridSpec&) = delete;

  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double s_max() const { return s_max_; }
  int ns() const { return ns_; }
  int steps() const { return steps_; }
  int sample_every() const { return sample_every_; }
  Vec2 node_position(int i, int j) const { return {x0_ + i * hx_, y0_ + j * hy_}; }
  std::size_t node_index(int i, int j) const { return static_cast<std::size_t>(j) * (grid_.nx + 1) + i; }
  std::size_t node_count() const { return nodes_.size(); }
  const NodeInfo& node(std::size_t n) const { return nodes_[n]; }
  std::size_t patch_size() const { return patch_.size(); }
  const std::vector<std::size_t>& patch_nodes() const { return patch_; }

  FieldState init_state(const InitialData& data) const;
  void step(FieldState& state) const;
  EnergySample energy(const FieldState& state) const;
  /// Energy of (w, w_t) with an explicitly supplied velocity field.
  double energy_with_velocity(const FieldState& state, const std::vector<double>& wt) const;
  /// Splits E into the part carried by nodes/faces satisfying `pred` and the rest.
  std::pair<double, double> energy_split(const FieldState& state, const std::function<bool(Vec2)>& pred) const;
  double damping_rate(const MemoryHistory& h) const;

  /// Applies K (the elastic operator, with c = k₁(1 - k₀b) on Ω₁ iff with_damping,
  /// otherwise c = k₁) to a grid field.
  void apply_stiffness(const std::vector<double>& w, std::vector<double>& out, bool with_damping = true) const;

  struct MatrixEntry {
    std::size_t row, col;  // grid node indices of active nodes
    double value;
  };
  /// Entries of K restricted to active nodes (symmetric).
  std::vector<MatrixEntry> stiffness_entries(bool with_damping) const;

  struct RunOptions {
    std::vector<double> snapshot_times;
  };
  EnergyTrace run(FieldState& state, const RunOptions& options = {}, std::vector<Snapshot>* snapshots = nullptr) const;

 private:
  struct Face {
    std::size_t a, b;  // node indices
    double coef;       // c_f / h²
    bool dirichlet_b;  // node b is a Dirichlet node
  };
  struct BFace {
    std::size_t pa, pb;  // patch indices
    double coef;         // B_f / h²
  };
  void acceleration(const FieldState& s, std::vector<double>& a) const;
  std::vector<double> memory_face_energy(const FieldState& s, bool staggered) const;
  std::vector<double> slot_norms(const MemoryHistory& h) const;

  const Geometry* geom_;
  MemoryKernel kernel_;
  GridSpec grid_;
  double dt_ = 0.0;
  double s_max_ = 0.0;
  int ns_ = 0;
  bool matched_ = false;
  int steps_ = 0;
  int sample_every_ = 1;
  double x0_ = 0.0, y0_ = 0.0, hx_ = 0.0, hy_ = 0.0;
  std::vector<NodeInfo> nodes_;
  std::vector<Face> faces_;          // elastic faces incident to at least one active node
  std::vector<Face> faces_undamped_; // same faces with b removed (for eigenmodes)
  std::vector<std::size_t> patch_;   // grid node index of each patch node
  std::vector<long> patch_of_node_;  // -1 if not in patch
  std::vector<BFace> bfaces_;
};

/// Convenience wrapper: init_state + run.
EnergyTrace run(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, const InitialData& data);

/// Max relative discrepancy between ψ_j carried by the exact Prony ODE and the
/// s-grid quadrature Σ q_k g_j(s_k) η_k (requires track_prony).
double cross_check_prony(const FieldState& state, const MemoryKernel& kernel);

}  // namespace translab
