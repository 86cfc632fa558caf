#include "translab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "translab/error.hpp"

namespace translab {

MemoryHistory::MemoryHistory(const MemoryKernel& kernel, std::size_t nodes, double s_max, int ns, bool track_prony)
    : terms_(kernel.terms()), nodes_(nodes), ns_(ns), ds_(s_max / ns) {
  q_.assign(ns, ds_);
  q_.back() = 0.5 * ds_;
  g_.resize(ns);
  gp_.resize(ns);
  for (int k = 0; k < ns; ++k) {
    g_[k] = kernel.g(s(k));
    gp_[k] = kernel.g_prime(s(k));
  }
  eta_.assign(static_cast<std::size_t>(ns + 1) * nodes, 0.0);
  weighted_.assign(nodes, 0.0);
  if (track_prony) psi_.assign(terms_.size(), std::vector<double>(nodes, 0.0));
}

void MemoryHistory::refresh() {
  norms_valid_ = false;
  std::fill(weighted_.begin(), weighted_.end(), 0.0);
  for (int k = 0; k < ns_; ++k) {
    const double c = q_[k] * g_[k];
    const double* e = eta_slice(k);
    for (std::size_t i = 0; i < nodes_; ++i) weighted_[i] += c * e[i];
  }
}

void MemoryHistory::advance(const std::vector<double>& ut, double dt, const std::vector<double>* l_dw) {
  std::fill(weighted_.begin(), weighted_.end(), 0.0);
  const bool shift = matched(dt);
  const bool recurse = shift && l_dw && norms_valid_;
  double self = 0.0;
  if (recurse)
    for (std::size_t i = 0; i < nodes_; ++i) self += dt * ut[i] * (*l_dw)[i];
  if (!recurse) norms_valid_ = false;
  const double r = dt / ds_;
  // Descending k so that η_{k-1} still holds the old level. Slot ns is a
  // spare node past s_max that never enters the quadrature.
  for (int k = ns_; k >= 0; --k) {
    double* e = eta_.data() + static_cast<std::size_t>(k) * nodes_;
    const double c = k < ns_ ? q_[k] * g_[k] : 0.0;
    if (k == 0) {
      for (std::size_t i = 0; i < nodes_; ++i) {
        e[i] = shift ? dt * ut[i] : e[i] + dt * ut[i] - r * e[i];
        weighted_[i] += c * e[i];
      }
      if (recurse) norms_[0] = self;
    } else {
      const double* prev = e - nodes_;
      double cross = 0.0;
      if (shift) {
        for (std::size_t i = 0; i < nodes_; ++i) {
          if (recurse) cross += prev[i] * (*l_dw)[i];
          e[i] = prev[i] + dt * ut[i];
          weighted_[i] += c * e[i];
        }
      } else {
        for (std::size_t i = 0; i < nodes_; ++i) {
          e[i] += dt * ut[i] - r * (e[i] - prev[i]);
          weighted_[i] += c * e[i];
        }
      }
      if (recurse) norms_[k] = norms_[k - 1] + 2.0 * cross + self;
    }
  }
  for (std::size_t j = 0; j < psi_.size(); ++j) {
    const double tau = terms_[j].tau;
    const double decay = std::exp(-dt / tau);
    const double gain = terms_[j].amplitude * tau * tau * (1.0 - decay);
    for (std::size_t i = 0; i < nodes_; ++i) psi_[j][i] = decay * psi_[j][i] + gain * ut[i];
  }
}

std::vector<double> MemoryHistory::prony_quadrature(std::size_t j) const {
  std::vector<double> out(nodes_, 0.0);
  const PronyTerm& term = terms_[j];
  for (int k = 0; k < ns_; ++k) {
    const double c = q_[k] * term.amplitude * std::exp(-s(k) / term.tau);
    const double* e = eta_slice(k);
    for (std::size_t i = 0; i < nodes_; ++i) out[i] += c * e[i];
  }
  return out;
}

void MemoryHistory::sync_prony() {
  for (std::size_t j = 0; j < psi_.size(); ++j) psi_[j] = prony_quadrature(j);
}

double EnergyTrace::residual_per_unit_time() const {
  if (times.size() < 2) return 0.0;
  double sum = 0.0;
  for (double r : identity_residual) sum += r;
  return sum / (times.back() - times.front());
}

std::string EnergyTrace::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,E,D,identity_residual\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    os << times[i] << ',' << E[i] << ',' << D[i] << ',' << identity_residual[i] << '\n';
  return os.str();
}

namespace {

double speed(const Geometry& geom, const MemoryKernel& kernel, Vec2 x, bool with_damping) {
  if (geom.inner().signed_distance(x) < 0.0) return geom.k2();
  if (!with_damping) return geom.k1();
  return geom.k1() * (1.0 - kernel.k0() * geom.damping().value(x));
}

}  // namespace

Solver::Solver(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid)
    : geom_(&geom), kernel_(kernel), grid_(grid) {
  if (grid.nx < 4 || grid.ny < 4) throw Error(ErrorCode::CflViolation, "grid needs at least 4 cells per direction");
  if (grid.ns == 1) throw Error(ErrorCode::CflViolation, "history grid needs at least 2 nodes");
  if (!(grid.t_end > 0.0)) throw Error(ErrorCode::CflViolation, "t_end must be positive");

  const BoundingBox bb = geom.outer().bounding_box();
  const double pad = 0.01 * std::max(bb.hi.x - bb.lo.x, bb.hi.y - bb.lo.y);
  x0_ = bb.lo.x - pad;
  y0_ = bb.lo.y - pad;
  hx_ = (bb.hi.x - bb.lo.x + 2 * pad) / grid.nx;
  hy_ = (bb.hi.y - bb.lo.y + 2 * pad) / grid.ny;

  s_max_ = grid.s_max > 0.0 ? grid.s_max : 12.0 * kernel.max_tau();
  const double kmax = std::max(geom.k1(), geom.k2());
  const double cfl = kCflSafety * std::min(hx_, hy_) / std::sqrt(kmax);
  if (grid.dt > 0.0 && grid.dt > cfl * (1 + 1e-12))
    throw Error(ErrorCode::CflViolation, "dt = " + std::to_string(grid.dt) + " exceeds the bound " +
                                             std::to_string(cfl) + " = 0.5·h/sqrt(max k)");
  if (grid.ns > 0) {
    ns_ = grid.ns;
    const double ds = s_max_ / ns_;
    if (grid.dt > 0.0) {
      if (grid.dt > ds * (1 + 1e-12))
        throw Error(ErrorCode::CflViolation, "dt = " + std::to_string(grid.dt) + " exceeds the history step " +
                                                 std::to_string(ds) + " = s_max/ns");
      dt_ = grid.dt;
      steps_ = std::max(1, static_cast<int>(std::lround(grid.t_end / dt_)));
    } else {
      steps_ = static_cast<int>(std::ceil(grid.t_end / std::min(cfl, ds) - 1e-9));
      dt_ = grid.t_end / steps_;
    }
  } else {
    // Matched history grid: Δs = dt, so the upwind step is an exact shift in s.
    if (grid.dt > 0.0) {
      dt_ = grid.dt;
      steps_ = std::max(1, static_cast<int>(std::lround(grid.t_end / dt_)));
    } else {
      steps_ = static_cast<int>(std::ceil(grid.t_end / cfl - 1e-9));
      dt_ = grid.t_end / steps_;
    }
    ns_ = std::max(2, static_cast<int>(std::ceil(s_max_ / dt_ - 1e-9)));
    s_max_ = ns_ * dt_;
    matched_ = true;
  }
  sample_every_ = grid.sample_every > 0 ? grid.sample_every : std::max(1, (steps_ + 199) / 200);

  const int nxn = grid.nx + 1, nyn = grid.ny + 1;
  nodes_.resize(static_cast<std::size_t>(nxn) * nyn);
  for (int j = 0; j < nyn; ++j)
    for (int i = 0; i < nxn; ++i) {
      const Vec2 p = node_position(i, j);
      NodeInfo& n = nodes_[node_index(i, j)];
      n.active = geom.outer().signed_distance(p) < 0.0;
      n.omega2 = n.active && geom.inner().signed_distance(p) < 0.0;
    }

  const double tol = 1e-9 * geom.diameter();
  auto face_coef = [&](Vec2 a, Vec2 b, bool with_damping) {
    const Vec2 m = 0.5 * (a + b);
    if (std::abs(geom.inner().signed_distance(m)) < tol) {
      const double c1 = with_damping ? geom.k1() * (1.0 - kernel.k0() * geom.damping().value(m)) : geom.k1();
      return 2.0 * c1 * geom.k2() / (c1 + geom.k2());
    }
    return speed(geom, kernel, m, with_damping);
  };

  patch_of_node_.assign(nodes_.size(), -1);
  struct RawBFace {
    std::size_t a, b;
    double coef;
  };
  std::vector<RawBFace> raw;
  auto add_face = [&](int ia, int ja, int ib, int jb, double h) {
    std::size_t a = node_index(ia, ja), b = node_index(ib, jb);
    if (!nodes_[a].active && !nodes_[b].active) return;
    if (!nodes_[a].active) std::swap(a, b), std::swap(ia, ib), std::swap(ja, jb);
    const Vec2 pa = node_position(ia, ja), pb = node_position(ib, jb);
    const double inv = 1.0 / (h * h);
    const bool dir_b = !nodes_[b].active;
    faces_.push_back({a, b, face_coef(pa, pb, true) * inv, dir_b});
    faces_undamped_.push_back({a, b, face_coef(pa, pb, false) * inv, dir_b});
    const Vec2 m = 0.5 * (pa + pb);
    const double bm = geom.inner().signed_distance(m) < 0.0 ? 0.0 : geom.damping().value(m);
    if (bm > 0.0 && (nodes_[a].omega2 || nodes_[b].omega2))
      throw Error(ErrorCode::SupportTouchesInterface, "b > 0 on a grid face adjacent to the inclusion");
    if (bm > 0.0) {
      raw.push_back({a, b, bm * inv});
      for (std::size_t n : {a, b})
        if (patch_of_node_[n] < 0) {
          patch_of_node_[n] = static_cast<long>(patch_.size());
          patch_.push_back(n);
        }
    }
  };
  for (int j = 0; j < nyn; ++j)
    for (int i = 0; i < nxn; ++i) {
      if (i + 1 < nxn) add_face(i, j, i + 1, j, hx_);
      if (j + 1 < nyn) add_face(i, j, i, j + 1, hy_);
    }
  for (const RawBFace& f : raw)
    bfaces_.push_back({static_cast<std::size_t>(patch_of_node_[f.a]), static_cast<std::size_t>(patch_of_node_[f.b]),
                       f.coef});
}

void Solver::apply_stiffness(const std::vector<double>& w, std::vector<double>& out, bool with_damping) const {
  out.assign(nodes_.size(), 0.0);
  const auto& faces = with_damping ? faces_ : faces_undamped_;
  for (const Face& f : faces) {
    const double wb = f.dirichlet_b ? 0.0 : w[f.b];
    const double flux = f.coef * (w[f.a] - wb);
    out[f.a] += flux;
    if (!f.dirichlet_b) out[f.b] -= flux;
  }
}

std::vector<Solver::MatrixEntry> Solver::stiffness_entries(bool with_damping) const {
  std::vector<MatrixEntry> out;
  const auto& faces = with_damping ? faces_ : faces_undamped_;
  out.reserve(4 * faces.size());
  for (const Face& f : faces) {
    out.push_back({f.a, f.a, f.coef});
    if (!f.dirichlet_b) {
      out.push_back({f.b, f.b, f.coef});
      out.push_back({f.a, f.b, -f.coef});
      out.push_back({f.b, f.a, -f.coef});
    }
  }
  return out;
}

void Solver::acceleration(const FieldState& s, std::vector<double>& a) const {
  apply_stiffness(s.w, a, true);
  const std::vector<double>& H = s.history.weighted_sum();
  const double k1 = geom_->k1();
  for (const BFace& f : bfaces_) {
    const double flux = k1 * f.coef * (H[f.pa] - H[f.pb]);
    a[patch_[f.pa]] += flux;
    a[patch_[f.pb]] -= flux;
  }
  for (std::size_t n = 0; n < a.size(); ++n) a[n] = nodes_[n].active ? -a[n] : 0.0;
}

std::vector<double> Solver::slot_norms(const MemoryHistory& h) const {
  std::vector<double> out(h.ns() + 1, 0.0);
  for (int k = 0; k <= h.ns(); ++k) {
    const double* e = h.eta_slice(k);
    double norm = 0.0;
    for (const BFace& f : bfaces_) {
      const double d = e[f.pa] - e[f.pb];
      norm += f.coef * d * d;
    }
    out[k] = norm;
  }
  return out;
}

double Solver::damping_rate(const MemoryHistory& h) const {
  const std::vector<double>* cached = h.norms();
  const std::vector<double> fresh = cached ? std::vector<double>{} : slot_norms(h);
  const std::vector<double>& norms = cached ? *cached : fresh;
  double rate = 0.0;
  for (int k = 0; k < h.ns(); ++k) rate += h.weight(k) * (-h.g_prime(k)) * norms[k];
  return geom_->k1() * hx_ * hy_ * rate;
}

FieldState Solver::init_state(const InitialData& data) const {
  const bool from_nodes = !data.w0_nodes.empty();
  if (from_nodes && (data.w0_nodes.size() != nodes_.size() ||
                     (!data.w1_nodes.empty() && data.w1_nodes.size() != nodes_.size())))
    throw Error(ErrorCode::InterfaceMismatch, "node data does not match the grid");
  if (!from_nodes && !data.u0) throw Error(ErrorCode::InterfaceMismatch, "initial displacement u0 is missing");
  if (!from_nodes && data.v0) {
    const int n = 256;
    for (int i = 0; i < n; ++i) {
      const Vec2 x = geom_->inner().point(static_cast<double>(i) / n);
      const double gap = std::abs(data.u0(x) - data.v0(x));
      if (gap > 1e-8) {
        std::ostringstream os;
        os << "u0 - v0 = " << gap << " at (" << x.x << ", " << x.y << ") on the interface";
        throw Error(ErrorCode::InterfaceMismatch, os.str());
      }
    }
  }
  FieldState s;
  s.w.assign(nodes_.size(), 0.0);
  s.v.assign(nodes_.size(), 0.0);
  std::vector<double> u1(nodes_.size(), 0.0);
  const int nxn = grid_.nx + 1, nyn = grid_.ny + 1;
  for (int j = 0; j < nyn; ++j)
    for (int i = 0; i < nxn; ++i) {
      const std::size_t n = node_index(i, j);
      if (!nodes_[n].active) continue;
      if (from_nodes) {
        s.w[n] = data.w0_nodes[n];
        u1[n] = data.w1_nodes.empty() ? 0.0 : data.w1_nodes[n];
        continue;
      }
      const Vec2 p = node_position(i, j);
      const bool in2 = nodes_[n].omega2;
      const ScalarField& disp = in2 && data.v0 ? data.v0 : data.u0;
      const ScalarField& vel = in2 && data.v1 ? data.v1 : data.u1;
      s.w[n] = disp(p);
      u1[n] = vel ? vel(p) : 0.0;
    }

  s.history = MemoryHistory(kernel_, patch_.size(), s_max_, ns_, grid_.track_prony);
  if (data.phi0) {
    for (std::size_t p = 0; p < patch_.size(); ++p) {
      const std::size_t n = patch_[p];
      if (!nodes_[n].active) continue;
      const Vec2 x = node_position(static_cast<int>(n % nxn), static_cast<int>(n / nxn));
      for (int k = 0; k <= s.history.ns(); ++k) s.history.eta(k, p) = s.w[n] - data.phi0(x, s.history.s(k));
    }
  }
  s.history.refresh();
  s.history.sync_prony();
  if (s.history.matched(dt_)) s.history.set_norms(slot_norms(s.history));

  std::vector<double> a;
  acceleration(s, a);
  for (std::size_t n = 0; n < nodes_.size(); ++n) s.v[n] = nodes_[n].active ? u1[n] - 0.5 * dt_ * a[n] : 0.0;
  s.damping_rate = damping_rate(s.history);
  for (double x : s.w)
    if (!std::isfinite(x)) throw Error(ErrorCode::NanDetected, "initial data is not finite");
  return s;
}

void Solver::step(FieldState& s) const {
  std::vector<double> a;
  acceleration(s, a);
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    s.v[n] += dt_ * a[n];
    s.w[n] += dt_ * s.v[n];
  }
  // The history is driven by the increment w^{n+1} - w^n; using the centered
  // velocity here makes the coupling unstable at grid frequencies.
  std::vector<double> ut(patch_.size());
  for (std::size_t p = 0; p < patch_.size(); ++p) ut[p] = s.v[patch_[p]];
  if (s.history.matched(dt_)) {
    std::vector<double> l_dw(patch_.size(), 0.0);
    for (const BFace& f : bfaces_) {
      const double flux = f.coef * dt_ * (ut[f.pa] - ut[f.pb]);
      l_dw[f.pa] += flux;
      l_dw[f.pb] -= flux;
    }
    s.history.advance(ut, dt_, &l_dw);
  } else {
    s.history.advance(ut, dt_);
  }
  // E is sampled at half steps (it pairs w^n with w^{n-1}), so the loss over
  // one step is centered on the history level the step started from.
  s.damping_integral += dt_ * s.damping_rate;
  s.damping_rate = damping_rate(s.history);
  s.step += 1;
  s.t = s.step * dt_;
}

std::vector<double> Solver::memory_face_energy(const FieldState& s, bool staggered) const {
  // With a matched history grid the conserved form pairs η^n with
  // η^{n-1} = shift(η^n) - dt·v^{n-1/2}, mirroring ½⟨w^n, K w^{n-1}⟩.
  const bool pair = staggered && matched_;
  const MemoryHistory& h = s.history;
  std::vector<double> vp(patch_.size(), 0.0);
  if (pair)
    for (std::size_t p = 0; p < patch_.size(); ++p) vp[p] = dt_ * s.v[patch_[p]];
  std::vector<double> out(bfaces_.size(), 0.0);
  for (int k = 0; k < h.ns(); ++k) {
    const double c = h.weight(k) * h.g(k);
    const double* e = h.eta_slice(k);
    const double* next = h.eta_slice(k + 1);
    for (std::size_t i = 0; i < bfaces_.size(); ++i) {
      const BFace& f = bfaces_[i];
      const double d = e[f.pa] - e[f.pb];
      const double d_prev = pair ? (next[f.pa] - vp[f.pa]) - (next[f.pb] - vp[f.pb]) : d;
      out[i] += c * f.coef * d * d_prev;
    }
  }
  const double scale = 0.5 * geom_->k1() * hx_ * hy_;
  for (double& x : out) x *= scale;
  return out;
}

EnergySample Solver::energy(const FieldState& s) const {
  const double mass = hx_ * hy_;
  double kin = 0.0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) kin += s.v[n] * s.v[n];
  double el = 0.0;
  for (const Face& f : faces_) {
    const double wb = f.dirichlet_b ? 0.0 : s.w[f.b];
    const double vb = f.dirichlet_b ? 0.0 : s.v[f.b];
    const double dw = s.w[f.a] - wb;
    el += f.coef * dw * (dw - dt_ * (s.v[f.a] - vb));
  }
  double mem = 0.0;
  for (double x : memory_face_energy(s, true)) mem += x;
  return {0.5 * mass * (kin + el) + mem, s.damping_rate};
}

double Solver::energy_with_velocity(const FieldState& s, const std::vector<double>& wt) const {
  const double mass = hx_ * hy_;
  double kin = 0.0;
  for (std::size_t n = 0; n < nodes_.size(); ++n)
    if (nodes_[n].active) kin += wt[n] * wt[n];
  double el = 0.0;
  for (const Face& f : faces_) {
    const double dw = s.w[f.a] - (f.dirichlet_b ? 0.0 : s.w[f.b]);
    el += f.coef * dw * dw;
  }
  double mem = 0.0;
  for (double x : memory_face_energy(s, false)) mem += x;
  return 0.5 * mass * (kin + el) + mem;
}

std::pair<double, double> Solver::energy_split(const FieldState& s, const std::function<bool(Vec2)>& pred) const {
  const double mass = hx_ * hy_;
  const int nxn = grid_.nx + 1;
  auto pos = [&](std::size_t n) { return node_position(static_cast<int>(n % nxn), static_cast<int>(n / nxn)); };
  double in = 0.0, out = 0.0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const double e = 0.5 * mass * s.v[n] * s.v[n];
    (pred(pos(n)) ? in : out) += e;
  }
  for (const Face& f : faces_) {
    const double wb = f.dirichlet_b ? 0.0 : s.w[f.b];
    const double vb = f.dirichlet_b ? 0.0 : s.v[f.b];
    const double dw = s.w[f.a] - wb;
    const double e = 0.5 * mass * f.coef * dw * (dw - dt_ * (s.v[f.a] - vb));
    (pred(0.5 * (pos(f.a) + pos(f.b))) ? in : out) += e;
  }
  const std::vector<double> mem = memory_face_energy(s, true);
  for (std::size_t i = 0; i < bfaces_.size(); ++i) {
    const BFace& f = bfaces_[i];
    (pred(0.5 * (pos(patch_[f.pa]) + pos(patch_[f.pb]))) ? in : out) += mem[i];
  }
  return {in, out};
}

EnergyTrace Solver::run(FieldState& s, const RunOptions& options, std::vector<Snapshot>* snapshots) const {
  EnergyTrace trace;
  std::vector<double> pending = options.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_snap = 0;
  const long first = s.step;
  const long last = first + steps_;

  auto tail_slice_norm = [&] {
    const MemoryHistory& h = s.history;
    const double* e = h.eta_slice(h.ns() - 1);
    double norm = 0.0;
    for (const BFace& f : bfaces_) {
      const double d = e[f.pa] - e[f.pb];
      norm += f.coef * d * d;
    }
    return hx_ * hy_ * norm;
  };
  double max_tail = 0.0;

  auto sample = [&] {
    const EnergySample e = energy(s);
    if (!std::isfinite(e.E) || !std::isfinite(s.damping_integral)) {
      std::ostringstream os;
      os << "non-finite energy at t = " << s.t << " (step " << s.step << ")";
      throw Error(ErrorCode::NanDetected, os.str());
    }
    double residual = 0.0;
    if (!trace.E.empty()) residual = std::abs(e.E - trace.E.back() + 0.5 * (s.damping_integral - trace.D.back()));
    trace.times.push_back(s.t);
    trace.E.push_back(e.E);
    trace.D.push_back(s.damping_integral);
    trace.identity_residual.push_back(residual);
    if (s.history.ns() > 0 && !bfaces_.empty()) max_tail = std::max(max_tail, tail_slice_norm());
  };
  auto snap = [&] {
    while (snapshots && next_snap < pending.size() && pending[next_snap] <= s.t + 0.5 * dt_) {
      snapshots->push_back({s.t, s.w});
      ++next_snap;
    }
  };

  sample();
  snap();
  while (s.step < last) {
    step(s);
    if ((s.step - first) % sample_every_ == 0 || s.step == last) sample();
    snap();
  }
  trace.tail_bound = geom_->k1() * kernel_.tail_mass(s_max_) * max_tail;
  return trace;
}

EnergyTrace run(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, const InitialData& data) {
  Solver solver(geom, kernel, grid);
  FieldState state = solver.init_state(data);
  return solver.run(state);
}

double cross_check_prony(const FieldState& state, const MemoryKernel& kernel) {
  const MemoryHistory& h = state.history;
  if (!h.tracks_prony()) return std::numeric_limits<double>::quiet_NaN();
  double diff = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < kernel.terms().size(); ++j) {
    const std::vector<double>& aux = h.prony_aux(j);
    const std::vector<double> quad = h.prony_quadrature(j);
    for (std::size_t i = 0; i < aux.size(); ++i) {
      diff = std::max(diff, std::abs(aux[i] - quad[i]));
      scale = std::max(scale, std::abs(aux[i]));
    }
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace translab
