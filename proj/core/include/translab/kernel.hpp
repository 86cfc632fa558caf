#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "translab/geometry.hpp"

namespace translab {

struct PronyTerm {
  double amplitude = 0.0;
  double tau = 1.0;
};

/// Relaxation kernel g(s) = Σ_j a_j exp(-s/τ_j).
class MemoryKernel {
 public:
  const std::vector<PronyTerm>& terms() const { return terms_; }
  /// ∫₀^∞ g = Σ a_j τ_j.
  double k0() const { return k0_; }
  /// Constant c of g <= -c g′, namely max τ_j.
  double c_bound() const { return c_bound_; }
  double max_tau() const { return c_bound_; }

  double g(double s) const;
  double g_prime(double s) const;
  /// ∫_{s}^∞ g.
  double tail_mass(double s) const;

 private:
  friend MemoryKernel build_kernel(std::vector<PronyTerm> terms);
  std::vector<PronyTerm> terms_;
  double k0_ = 0.0;
  double c_bound_ = 0.0;
};

MemoryKernel build_kernel(std::vector<PronyTerm> terms);

struct KernelGeometryCompat {
  double l = 0.0;                  // 1 - k0·‖b‖_∞
  double contraction_bound = 0.0;  // k0·‖b|∂Ω₂‖_∞
  bool speed_ordering = false;     // k1(1 - k0 b) <= k2 on closure(Ω₁)
  bool valid = false;              // l > 0
  std::string diagnostics;
};

KernelGeometryCompat check_compat(const MemoryKernel& kernel, const Geometry& geom);

/// Samples of a function on (uniform time grid) × (boundary parameters).
/// values[i * params.size() + j] is the value at (times[i], params[j]).
struct BoundaryTrace {
  std::vector<double> times;
  std::vector<double> params;
  std::vector<double> values;

  static BoundaryTrace zeros(double t0, double dt, std::size_t nt, std::vector<double> params);
  std::size_t nt() const { return times.size(); }
  std::size_t np() const { return params.size(); }
  double& at(std::size_t i, std::size_t j) { return values[i * params.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * params.size() + j]; }
  /// Discrete L² norm over t (weight dt) and boundary samples (weight 1/np).
  double l2_norm() const;
};

/// Boundary memory operator (Gf)(t, x′) = b(x′) ∫ g(t - s) f(s, x′) ds with g
/// extended by zero for negative arguments, by trapezoidal quadrature.
BoundaryTrace apply_G(const MemoryKernel& kernel, const Geometry& geom, const BoundaryTrace& f);
/// Adjoint of apply_G in the discrete L² inner product.
BoundaryTrace apply_G_adjoint(const MemoryKernel& kernel, const Geometry& geom, const BoundaryTrace& f);

struct NeumannResult {
  BoundaryTrace x;
  int terms = 0;
  double residual = 0.0;  // ‖(I - G)x - y‖ / ‖y‖
};

/// Solves (I - G)x = y by the Neumann series Σ Gᵏy; throws NotAContraction when
/// k0·‖b|∂Ω₂‖_∞ >= 1.
NeumannResult invert_I_minus_G(const MemoryKernel& kernel, const Geometry& geom, const BoundaryTrace& y,
                               double rel_tol = 1e-10, int max_terms = 10000);

/// Power iteration on GᵀG; returns the estimated operator norm of G.
double estimate_G_norm(const MemoryKernel& kernel, const Geometry& geom, std::size_t nt, double dt,
                       std::size_t np, unsigned long long seed, int iterations = 200);

/// CSV with columns t,s,value.
std::string trace_to_csv(const BoundaryTrace& trace);

}  // namespace translab
