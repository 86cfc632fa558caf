#include "translab/observability.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <memory>
#include <cmath>
#include <numbers>
#include <random>

#include "translab/error.hpp"
#include "translab/parallel.hpp"

namespace translab {

DecayFit fit_decay(const EnergyTrace& trace, double t_lo, double t_hi) {
  if (trace.times.empty()) throw Error(ErrorCode::NonpositiveEnergy, "empty energy trace");
  if (!(trace.E.front() > 0.0)) throw Error(ErrorCode::NonpositiveEnergy, "E(0) must be positive");
  if (t_hi <= t_lo) {
    t_lo = 0.5 * (trace.times.front() + trace.times.back());
    t_hi = trace.times.back();
  }
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double t = trace.times[i];
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
    if (!(trace.E[i] > 0.0))
      throw Error(ErrorCode::NonpositiveEnergy, "E(" + std::to_string(t) + ") = " + std::to_string(trace.E[i]));
    ts.push_back(t);
    ys.push_back(std::log(trace.E[i]));
  }
  if (ts.size() < 2) throw Error(ErrorCode::NonpositiveEnergy, "fewer than two samples in the fit window");
  const double n = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tm) * (ts[i] - tm);
    sty += (ts[i] - tm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  const double slope = sty / stt;
  const double intercept = ym - slope * tm;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (intercept + slope * ts[i]);
    ss_res += r * r;
  }
  DecayFit fit;
  fit.lambda = -slope;
  fit.C = std::exp(intercept) / trace.E.front();
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  return fit;
}

namespace {

double boundary_cutoff(const Geometry& geom, Vec2 x) {
  const double delta = 0.1 * geom.diameter();
  const double s = std::clamp(-geom.outer().signed_distance(x) / delta, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

}  // namespace

InitialData random_band_limited(const Geometry& geom, double frequency_cap, int modes, std::uint64_t seed) {
  struct Wave {
    Vec2 k;
    double amp, phase, sign;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto waves = std::make_shared<std::vector<Wave>>();
  for (int m = 0; m < modes; ++m) {
    const double r = frequency_cap * std::sqrt(unit(rng));
    const double th = 2 * std::numbers::pi * unit(rng);
    Wave w;
    w.k = {r * std::cos(th), r * std::sin(th)};
    w.amp = normal(rng) / std::sqrt(static_cast<double>(modes));
    w.phase = 2 * std::numbers::pi * unit(rng);
    w.sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    waves->push_back(w);
  }
  const double c = std::sqrt(geom.k1());
  const Geometry* g = &geom;
  InitialData data;
  data.u0 = [waves, g](Vec2 x) {
    double sum = 0.0;
    for (const Wave& w : *waves) sum += w.amp * std::cos(dot(w.k, x) + w.phase);
    return boundary_cutoff(*g, x) * sum;
  };
  data.u1 = [waves, g, c](Vec2 x) {
    double sum = 0.0;
    for (const Wave& w : *waves) sum += w.sign * w.amp * c * norm(w.k) * std::sin(dot(w.k, x) + w.phase);
    return boundary_cutoff(*g, x) * sum;
  };
  return data;
}

InitialData wave_packet(const Geometry& geom, Vec2 center, Vec2 direction, double wavenumber, double width) {
  const Vec2 d = normalized(direction);
  const double c = std::sqrt(geom.k1());
  InitialData data;
  data.u0 = [=](Vec2 x) {
    const Vec2 r = x - center;
    return std::exp(-norm2(r) / (width * width)) * std::cos(wavenumber * dot(d, r));
  };
  data.u1 = [=](Vec2 x) {
    const Vec2 r = x - center;
    const double env = std::exp(-norm2(r) / (width * width));
    const double phase = wavenumber * dot(d, r);
    // -c ∂_d u₀
    const double ddu = env * (-2.0 * dot(d, r) / (width * width) * std::cos(phase) - wavenumber * std::sin(phase));
    return -c * ddu;
  };
  return data;
}

double bessel_first_zero(int order) {
  if (order < 0) throw Error(ErrorCode::InvalidDescriptor, "Bessel order must be nonnegative");
  auto j = [order](double x) { return std::cyl_bessel_j(order, x); };
  // j_{m,1} > m, and J_m keeps one sign on (0, j_{m,1}).
  const double step = 0.05;
  double lo = order + step;
  while (j(lo) * j(lo + step) > 0.0) lo += step;
  double hi = lo + step;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (j(lo) * j(mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

InitialData whispering_gallery(Vec2 center, double radius, int order) {
  const double k = bessel_first_zero(order) / radius;
  InitialData data;
  data.u0 = [=](Vec2 x) {
    const Vec2 r = x - center;
    const double rho = norm(r);
    if (rho >= radius) return 0.0;
    return std::cyl_bessel_j(order, k * rho) * std::cos(order * std::atan2(r.y, r.x));
  };
  return data;
}

double normalize_energy(const Solver& solver, InitialData& data) {
  const double e0 = solver.energy(solver.init_state(data)).E;
  if (!(e0 > 0.0)) return e0;
  const double scale = 1.0 / std::sqrt(e0);
  auto wrap = [scale](ScalarField& f) {
    if (f) f = [inner = f, scale](Vec2 x) { return scale * inner(x); };
  };
  wrap(data.u0);
  wrap(data.u1);
  wrap(data.v0);
  wrap(data.v1);
  if (data.phi0) data.phi0 = [inner = data.phi0, scale](Vec2 x, double s) { return scale * inner(x, s); };
  for (double& x : data.w0_nodes) x *= scale;
  for (double& x : data.w1_nodes) x *= scale;
  return e0;
}

double default_horizon(const Geometry& geom) { return 4.0 * geom.diameter() / std::sqrt(geom.k1()); }

ObsEstimate estimate_observability(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, double T,
                                   const std::vector<InitialData>& members) {
  GridSpec g = grid;
  g.t_end = T;
  const Solver solver(geom, kernel, g);
  struct Outcome {
    double e0 = 0.0, d = 0.0;
  };
  std::vector<Outcome> out(members.size());
  parallel_for(members.size(), [&](std::size_t i) {
    InitialData data = members[i];
    if (!(normalize_energy(solver, data) > 0.0)) return;
    FieldState s = solver.init_state(data);
    const EnergyTrace trace = solver.run(s);
    out[i] = {trace.E.front(), trace.D.back()};
  });
  ObsEstimate est;
  est.T = T;
  est.ensemble_size = static_cast<int>(members.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i].e0 > 0.0)) {
      est.excluded.push_back(static_cast<int>(i));
    } else if (out[i].d < 1e-14 * out[i].e0) {
      est.near_invisible.push_back(static_cast<int>(i));
    } else {
      est.ratios.push_back(out[i].e0 / out[i].d);
      est.c_obs = std::max(est.c_obs, est.ratios.back());
    }
  }
  return est;
}

ObsEstimate estimate_observability(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, double T,
                                   const EnsembleSpec& ensemble) {
  GridSpec g = grid;
  g.t_end = T;
  const Solver probe(geom, kernel, g);
  const double cap = ensemble.frequency_cap > 0.0
                         ? ensemble.frequency_cap
                         : 2 * std::numbers::pi / (8.0 * std::max(probe.hx(), probe.hy()));
  std::vector<InitialData> members;
  std::seed_seq seq{static_cast<std::uint32_t>(ensemble.seed), static_cast<std::uint32_t>(ensemble.seed >> 32)};
  std::vector<std::uint64_t> seeds(ensemble.size);
  {
    std::vector<std::uint32_t> raw(2 * ensemble.size);
    seq.generate(raw.begin(), raw.end());
    for (int i = 0; i < ensemble.size; ++i) seeds[i] = (std::uint64_t(raw[2 * i]) << 32) | raw[2 * i + 1];
  }
  for (int i = 0; i < ensemble.size; ++i)
    members.push_back(random_band_limited(geom, cap, ensemble.modes, seeds[i]));
  return estimate_observability(geom, kernel, grid, T, members);
}

std::vector<Eigenmode> compute_eigenmodes(const Solver& solver, int count, double tol, int max_iterations) {
  if (count <= 0) return {};
  std::vector<long> index(solver.node_count(), -1);
  std::vector<std::size_t> active;
  for (std::size_t n = 0; n < solver.node_count(); ++n)
    if (solver.node(n).active) {
      index[n] = static_cast<long>(active.size());
      active.push_back(n);
    }
  const Eigen::Index m = static_cast<Eigen::Index>(active.size());
  const int block = std::min<int>(count + 6, static_cast<int>(m));
  if (block < count) throw Error(ErrorCode::EigensolverFailure, "grid has fewer unknowns than requested modes");

  std::vector<Eigen::Triplet<double>> trip;
  for (const Solver::MatrixEntry& e : solver.stiffness_entries(false))
    trip.emplace_back(index[e.row], index[e.col], e.value);
  Eigen::SparseMatrix<double> K(m, m);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "factorization of K failed");

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(m, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < m; ++i) X(i, j) = normal(rng);

  Eigen::VectorXd theta;
  std::vector<double> residual(count, 1.0);
  bool converged = false;
  for (int it = 0; it < max_iterations && !converged; ++it) {
    Eigen::MatrixXd Y = ldlt.solve(X);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "back substitution failed");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, block);
    const Eigen::MatrixXd KQ = K * Q;
    const Eigen::MatrixXd H = Q.transpose() * KQ;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "Rayleigh-Ritz step failed");
    theta = es.eigenvalues();
    X = Q * es.eigenvectors();
    const Eigen::MatrixXd R = KQ * es.eigenvectors() - X * theta.asDiagonal();
    converged = true;
    for (int j = 0; j < count; ++j) {
      residual[j] = R.col(j).norm() / (std::abs(theta(j)) * X.col(j).norm());
      if (residual[j] > tol) converged = false;
    }
  }
  if (!converged)
    throw Error(ErrorCode::EigensolverFailure,
                "inverse iteration did not reach residual " + std::to_string(tol) + " in " +
                    std::to_string(max_iterations) + " iterations");

  const double mass = solver.hx() * solver.hy();
  std::vector<Eigenmode> modes(count);
  for (int j = 0; j < count; ++j) {
    Eigenmode& mode = modes[j];
    mode.omega2 = theta(j);
    mode.residual = residual[j];
    mode.field.assign(solver.node_count(), 0.0);
    const double scale = 1.0 / (X.col(j).norm() * std::sqrt(mass));
    // Fix the sign so that the largest entry is positive (reproducible output).
    Eigen::Index arg = 0;
    X.col(j).cwiseAbs().maxCoeff(&arg);
    const double sign = X(arg, j) < 0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < m; ++i) mode.field[active[i]] = sign * scale * X(i, j);
  }
  return modes;
}

ProbeReport invisible_probe(const Geometry& geom, const MemoryKernel& kernel, const GridSpec& grid, double T,
                            int count, double eps_vis) {
  GridSpec g = grid;
  g.t_end = T;
  const Solver solver(geom, kernel, g);
  const std::vector<Eigenmode> modes = compute_eigenmodes(solver, count);
  ProbeReport report;
  report.T = T;
  report.eps_vis = eps_vis;
  report.modes.resize(modes.size());
  parallel_for(modes.size(), [&](std::size_t i) {
    InitialData data;
    data.w0_nodes = modes[i].field;
    FieldState s = solver.init_state(data);
    const EnergyTrace trace = solver.run(s);
    ProbeEntry& e = report.modes[i];
    e.index = static_cast<int>(i);
    e.omega2 = modes[i].omega2;
    e.ratio = trace.E.front() > 0.0 ? trace.D.back() / trace.E.front() : 0.0;
    e.visible = e.ratio >= eps_vis;
  });
  report.all_visible = !report.modes.empty();
  for (const ProbeEntry& e : report.modes) report.all_visible = report.all_visible && e.visible;
  return report;
}

}  // namespace translab
