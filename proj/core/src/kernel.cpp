#include "translab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "translab/error.hpp"

namespace translab {

MemoryKernel build_kernel(std::vector<PronyTerm> terms) {
  if (terms.empty()) throw Error(ErrorCode::EmptyKernel, "kernel needs at least one Prony term");
  MemoryKernel k;
  bool any_positive = false;
  for (const PronyTerm& t : terms) {
    if (t.amplitude < 0) throw Error(ErrorCode::NegativeAmplitude, "Prony amplitude must be >= 0");
    if (!(t.tau > 0)) throw Error(ErrorCode::NonpositiveRelaxationTime, "Prony relaxation time must be > 0");
    any_positive = any_positive || t.amplitude > 0;
    k.k0_ += t.amplitude * t.tau;
    k.c_bound_ = std::max(k.c_bound_, t.tau);
  }
  if (!any_positive) throw Error(ErrorCode::EmptyKernel, "all Prony amplitudes vanish");
  k.terms_ = std::move(terms);
  return k;
}

double MemoryKernel::g(double s) const {
  double v = 0.0;
  for (const PronyTerm& t : terms_) v += t.amplitude * std::exp(-s / t.tau);
  return v;
}

double MemoryKernel::g_prime(double s) const {
  double v = 0.0;
  for (const PronyTerm& t : terms_) v -= t.amplitude / t.tau * std::exp(-s / t.tau);
  return v;
}

double MemoryKernel::tail_mass(double s) const {
  double v = 0.0;
  for (const PronyTerm& t : terms_) v += t.amplitude * t.tau * std::exp(-s / t.tau);
  return v;
}

KernelGeometryCompat check_compat(const MemoryKernel& kernel, const Geometry& geom) {
  KernelGeometryCompat c;
  const double bmax = geom.damping().max_value();
  c.l = 1.0 - kernel.k0() * bmax;
  c.contraction_bound = kernel.k0() * geom.max_b_on_interface();
  c.valid = c.l > 0.0;
  // k1(1 - k0 b) is largest where b = 0.
  c.speed_ordering = geom.k1() <= geom.k2();
  std::ostringstream os;
  os << "l=" << c.l << " (k0=" << kernel.k0() << ", max b=" << bmax << ")";
  if (!c.valid) os << "; l <= 0 violates positivity of the elastic coefficient";
  if (!c.speed_ordering) os << "; k1(1-k0 b) exceeds k2 where b=0";
  c.diagnostics = os.str();
  return c;
}

BoundaryTrace BoundaryTrace::zeros(double t0, double dt, std::size_t nt, std::vector<double> params) {
  BoundaryTrace tr;
  tr.times.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) tr.times[i] = t0 + dt * static_cast<double>(i);
  tr.params = std::move(params);
  tr.values.assign(nt * tr.params.size(), 0.0);
  return tr;
}

double BoundaryTrace::l2_norm() const {
  if (times.size() < 2 || params.empty()) return 0.0;
  const double dt = times[1] - times[0];
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s * dt / static_cast<double>(params.size()));
}

namespace {

double uniform_step(const BoundaryTrace& f) {
  if (f.times.size() < 2) throw Error(ErrorCode::NonuniformTimeGrid, "need at least two time samples");
  const double dt = f.times[1] - f.times[0];
  if (!(dt > 0)) throw Error(ErrorCode::NonuniformTimeGrid, "time grid must increase");
  for (std::size_t i = 1; i < f.times.size(); ++i) {
    const double d = f.times[i] - f.times[i - 1];
    if (std::abs(d - dt) > 1e-9 * dt)
      throw Error(ErrorCode::NonuniformTimeGrid, "time step varies at index " + std::to_string(i));
  }
  if (f.values.size() != f.times.size() * f.params.size())
    throw Error(ErrorCode::NonuniformTimeGrid, "value array does not match grid shape");
  return dt;
}

std::vector<double> boundary_b(const Geometry& geom, const std::vector<double>& params) {
  std::vector<double> b(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) b[j] = geom.damping().value(geom.inner().point(params[j]));
  return b;
}

}  // namespace

// Each Prony term is convolved recursively: P_i = q P_{i-1} + f_i with
// q = exp(-dt/τ). Trapezoid weights halve the k = 0 and k = i nodes.
BoundaryTrace apply_G(const MemoryKernel& kernel, const Geometry& geom, const BoundaryTrace& f) {
  const double dt = uniform_step(f);
  BoundaryTrace out = f;
  std::fill(out.values.begin(), out.values.end(), 0.0);
  const std::vector<double> b = boundary_b(geom, f.params);
  const std::size_t nt = f.nt();
  const std::size_t np = f.np();
  for (std::size_t j = 0; j < np; ++j) {
    if (b[j] == 0.0) continue;
    for (const PronyTerm& term : kernel.terms()) {
      const double q = std::exp(-dt / term.tau);
      const double scale = b[j] * term.amplitude * dt;
      double P = f.at(0, j);
      double qi = 1.0;
      for (std::size_t i = 1; i < nt; ++i) {
        P = q * P + f.at(i, j);
        qi *= q;
        out.at(i, j) += scale * (P - 0.5 * f.at(i, j) - 0.5 * qi * f.at(0, j));
      }
    }
  }
  return out;
}

BoundaryTrace apply_G_adjoint(const MemoryKernel& kernel, const Geometry& geom, const BoundaryTrace& h) {
  const double dt = uniform_step(h);
  BoundaryTrace out = h;
  std::fill(out.values.begin(), out.values.end(), 0.0);
  const std::vector<double> b = boundary_b(geom, h.params);
  const std::size_t nt = h.nt();
  const std::size_t np = h.np();
  for (std::size_t j = 0; j < np; ++j) {
    if (b[j] == 0.0) continue;
    for (const PronyTerm& term : kernel.terms()) {
      const double q = std::exp(-dt / term.tau);
      const double scale = b[j] * term.amplitude * dt;
      double Q = 0.0;
      for (std::size_t k = nt; k-- > 1;) {
        Q = q * Q + h.at(k, j);
        out.at(k, j) += scale * (Q - 0.5 * h.at(k, j));
      }
      Q = q * Q + h.at(0, j);
      out.at(0, j) += scale * 0.5 * (Q - h.at(0, j));
    }
  }
  return out;
}

NeumannResult invert_I_minus_G(const MemoryKernel& kernel, const Geometry& geom, const BoundaryTrace& y,
                               double rel_tol, int max_terms) {
  uniform_step(y);
  const double bound = kernel.k0() * geom.max_b_on_interface();
  if (bound >= 1.0)
    throw Error(ErrorCode::NotAContraction,
                "k0 * max b on interface = " + std::to_string(bound) + " >= 1");
  NeumannResult res;
  res.x = y;
  res.terms = 1;
  const double ynorm = y.l2_norm();
  if (ynorm == 0.0) return res;
  BoundaryTrace term = y;
  while (res.terms < max_terms) {
    term = apply_G(kernel, geom, term);
    // (I - G)x_K - y = -G^{K+1} y, which is exactly the next term.
    if (term.l2_norm() <= rel_tol * ynorm) break;
    for (std::size_t i = 0; i < term.values.size(); ++i) res.x.values[i] += term.values[i];
    ++res.terms;
  }
  BoundaryTrace gx = apply_G(kernel, geom, res.x);
  BoundaryTrace r = res.x;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = res.x.values[i] - gx.values[i] - y.values[i];
  res.residual = r.l2_norm() / ynorm;
  return res;
}

double estimate_G_norm(const MemoryKernel& kernel, const Geometry& geom, std::size_t nt, double dt,
                       std::size_t np, unsigned long long seed, int iterations) {
  std::vector<double> params(np);
  for (std::size_t j = 0; j < np; ++j) params[j] = (j + 0.5) / static_cast<double>(np);
  BoundaryTrace v = BoundaryTrace::zeros(0.0, dt, nt, params);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& x : v.values) x = normal(rng);
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double vn = v.l2_norm();
    if (vn == 0.0) return 0.0;
    for (double& x : v.values) x /= vn;
    const BoundaryTrace gv = apply_G(kernel, geom, v);
    estimate = gv.l2_norm();
    v = apply_G_adjoint(kernel, geom, gv);
  }
  return estimate;
}

std::string trace_to_csv(const BoundaryTrace& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "t,s,value\n";
  for (std::size_t i = 0; i < trace.nt(); ++i)
    for (std::size_t j = 0; j < trace.np(); ++j)
      os << trace.times[i] << ',' << trace.params[j] << ',' << trace.at(i, j) << '\n';
  return os.str();
}

}  // namespace translab
