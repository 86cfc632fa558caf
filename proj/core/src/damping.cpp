#include "translab/damping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "translab/error.hpp"

namespace translab {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double f = std::clamp(dot(p - a, e) / norm2(e), 0.0, 1.0);
  return norm(p - (a + e * f));
}

}  // namespace

DampingField::DampingField(const BumpSpec& spec) : spec_(spec) {
  if (spec_.value < 0) throw Error(ErrorCode::InvalidDescriptor, "damping value must be >= 0");
  if (empty()) return;
  if (!(spec_.radial_ramp > 0) || !(spec_.radial_outer > spec_.radial_inner))
    throw Error(ErrorCode::InvalidDescriptor, "damping radial plateau/ramp invalid");
  if (spec_.radial_inner > 0 && spec_.radial_inner < spec_.radial_ramp)
    throw Error(ErrorCode::InvalidDescriptor, "inner radial ramp would cross the bump center");
  rho_lo_ = spec_.radial_inner > 0 ? spec_.radial_inner - spec_.radial_ramp : 0.0;
  rho_hi_ = spec_.radial_outer + spec_.radial_ramp;
  half_support_angle_ = kPi;
  if (spec_.angular) {
    const auto [lo, hi] = *spec_.angular;
    if (!(hi > lo) || !(spec_.angular_ramp > 0))
      throw Error(ErrorCode::InvalidDescriptor, "damping angular window invalid");
    mid_angle_ = 0.5 * (lo + hi);
    half_support_angle_ = 0.5 * (hi - lo) + spec_.angular_ramp;
    if (half_support_angle_ >= kPi)
      throw Error(ErrorCode::InvalidDescriptor, "angular window plus ramps must be < 2π");
    if (rho_lo_ <= 0)
      throw Error(ErrorCode::InvalidDescriptor, "angular windows need a positive inner support radius");
  }
}

double DampingField::smoothstep(double t) const {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  if (spec_.profile == BumpProfile::Polynomial) return t * t * t * (t * (6 * t - 15) + 10);
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double DampingField::smoothstep_derivative(double t) const {
  if (t <= 0 || t >= 1) return 0.0;
  if (spec_.profile == BumpProfile::Polynomial) return 30 * t * t * (t - 1) * (t - 1);
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  const double da = a / (t * t);
  const double db = -b / ((1.0 - t) * (1.0 - t));
  const double s = a + b;
  return (da * s - a * (da + db)) / (s * s);
}

BValue DampingField::evaluate(Vec2 x) const {
  if (empty()) return {};
  const Vec2 rel = x - spec_.center;
  const double rho = norm(rel);
  if (rho >= rho_hi_ || (rho_lo_ > 0 && rho <= rho_lo_)) return {};

  const double w = spec_.radial_ramp;
  double R = 1.0;
  double dR = 0.0;
  if (rho > spec_.radial_outer) {
    R = smoothstep((rho_hi_ - rho) / w);
    dR = -smoothstep_derivative((rho_hi_ - rho) / w) / w;
  } else if (spec_.radial_inner > 0 && rho < spec_.radial_inner) {
    R = smoothstep((rho - rho_lo_) / w);
    dR = smoothstep_derivative((rho - rho_lo_) / w) / w;
  }

  double A = 1.0;
  double dA = 0.0;
  if (spec_.angular) {
    const double delta = wrap_pi(std::atan2(rel.y, rel.x) - mid_angle_);
    const double arg = (half_support_angle_ - std::abs(delta)) / spec_.angular_ramp;
    A = smoothstep(arg);
    dA = -std::copysign(1.0, delta) * smoothstep_derivative(arg) / spec_.angular_ramp;
  }

  const double v = spec_.value * R * A;
  if (v == 0.0) return {};
  BValue out;
  out.value = v;
  if (rho > 0) {
    const Vec2 rhat = rel / rho;
    out.gradient = (rhat * (dR * A) + perp(rhat) * (R * dA / rho)) * spec_.value;
  }
  return out;
}

bool DampingField::in_support(Vec2 x) const {
  if (empty()) return false;
  const Vec2 rel = x - spec_.center;
  const double rho = norm(rel);
  if (rho > rho_hi_ || rho < rho_lo_) return false;
  if (!spec_.angular) return true;
  return std::abs(wrap_pi(std::atan2(rel.y, rel.x) - mid_angle_)) <= half_support_angle_;
}

double DampingField::support_distance(Vec2 x) const {
  if (empty()) return 1e300;
  const Vec2 rel = x - spec_.center;
  const double rho = norm(rel);
  const bool angular_in =
      !spec_.angular || std::abs(wrap_pi(std::atan2(rel.y, rel.x) - mid_angle_)) <= half_support_angle_;
  if (angular_in) {
    if (rho < rho_lo_) return rho_lo_ - rho;
    if (rho > rho_hi_) return rho - rho_hi_;
    return 0.0;
  }
  double best = 1e300;
  for (double a : {mid_angle_ - half_support_angle_, mid_angle_ + half_support_angle_}) {
    const Vec2 e{std::cos(a), std::sin(a)};
    best = std::min(best, point_segment_distance(x, spec_.center + e * rho_lo_, spec_.center + e * rho_hi_));
  }
  return best;
}

std::vector<double> DampingField::boundary_crossings(Vec2 origin, Vec2 dir) const {
  std::vector<double> ts;
  const Vec2 q = origin - spec_.center;
  auto circle = [&](double r) {
    if (r <= 0) return;
    const double B = dot(q, dir);
    const double C = norm2(q) - r * r;
    const double disc = B * B - C;
    if (disc < 0) return;
    const double sq = std::sqrt(disc);
    ts.push_back(-B - sq);
    ts.push_back(-B + sq);
  };
  circle(rho_lo_);
  circle(rho_hi_);
  if (spec_.angular) {
    for (double a : {mid_angle_ - half_support_angle_, mid_angle_ + half_support_angle_}) {
      const Vec2 e{std::cos(a), std::sin(a)};
      const double den = cross(dir, e);
      if (std::abs(den) > 1e-300) ts.push_back(cross(-q, e) / den);
    }
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

std::optional<double> DampingField::support_entry(Vec2 origin, Vec2 dir) const {
  if (empty()) return std::nullopt;
  if (in_support(origin)) return 0.0;
  std::vector<double> ts = boundary_crossings(origin, dir);
  std::vector<double> cand;
  for (double t : ts)
    if (t > 0) cand.push_back(t);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const double next = i + 1 < cand.size() ? cand[i + 1] : cand[i] + 1.0;
    if (next - cand[i] <= 0) continue;
    if (in_support(origin + dir * (0.5 * (cand[i] + next)))) return cand[i];
  }
  return std::nullopt;
}

double DampingField::support_exit(Vec2 origin, Vec2 dir) const {
  std::vector<double> ts = boundary_crossings(origin, dir);
  std::vector<double> cand;
  for (double t : ts)
    if (t > 1e-15) cand.push_back(t);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const double next = i + 1 < cand.size() ? cand[i + 1] : cand[i] + 1.0;
    if (next - cand[i] <= 0) continue;
    if (!in_support(origin + dir * (0.5 * (cand[i] + next)))) return cand[i];
  }
  return cand.empty() ? 0.0 : cand.back();
}

}  // namespace translab
