#include "translab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "translab/error.hpp"

namespace translab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double wrap_angle_positive(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  // proper crossings only; near-collinear pairs (straight polygon edges) are not crossings
  const double scale = norm(p2 - p1) + norm(q2 - q1);
  const double eps = 1e-12 * scale * scale;
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  auto opposite = [eps](double a, double b) { return (a > eps && b < -eps) || (a < -eps && b > eps); };
  return opposite(d1, d2) && opposite(d3, d4);
}

}  // namespace

double wrap_unit(double s) {
  s -= std::floor(s);
  return s >= 1.0 ? 0.0 : s;
}

Curve::Curve(CurveSpec spec, int smoothness_samples)
    : spec_(std::move(spec)), samples_(smoothness_samples) {
  if (samples_ < 8) throw Error(ErrorCode::InvalidDescriptor, "smoothness_samples must be >= 8");
  std::visit(
      [this](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CircleSpec>) {
          if (!(s.radius > 0)) throw Error(ErrorCode::InvalidDescriptor, "circle radius must be > 0");
          length_ = kTwoPi * s.radius;
        } else if constexpr (std::is_same_v<T, EllipseSpec>) {
          if (!(s.semi_x > 0 && s.semi_y > 0))
            throw Error(ErrorCode::InvalidDescriptor, "ellipse semi-axes must be > 0");
          length_ = 0.0;
          length_ = arc_length(0.0, 1.0);
        } else {
          build_rounded_polygon(s);
        }
      },
      spec_);
}

void Curve::build_rounded_polygon(const RoundedPolygonSpec& spec) {
  std::vector<Vec2> v = spec.vertices;
  const std::size_t n = v.size();
  if (n < 3) throw Error(ErrorCode::InvalidDescriptor, "rounded polygon needs >= 3 vertices");
  if (!(spec.corner_radius > 0))
    throw Error(ErrorCode::InvalidDescriptor, "corner radius must be > 0");
  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) area += cross(v[i], v[(i + 1) % n]);
  if (area < 0) std::reverse(v.begin(), v.end());

  const double r = spec.corner_radius;
  struct Corner {
    Vec2 p_in, p_out, center;
    double start, sweep;
  };
  std::vector<Corner> corners(n);
  std::vector<double> tangent_len(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 prev = v[(i + n - 1) % n];
    const Vec2 next = v[(i + 1) % n];
    const Vec2 e_in = normalized(v[i] - prev);
    const Vec2 e_out = normalized(next - v[i]);
    const double turn = std::atan2(cross(e_in, e_out), dot(e_in, e_out));
    if (std::abs(turn) < 1e-12)
      throw Error(ErrorCode::InvalidDescriptor, "collinear vertex in rounded polygon");
    const double L = r * std::tan(std::abs(turn) / 2.0);
    tangent_len[i] = L;
    Corner c;
    c.p_in = v[i] - e_in * L;
    c.p_out = v[i] + e_out * L;
    c.center = turn > 0 ? c.p_in + perp(e_in) * r : c.p_in - perp(e_in) * r;
    const Vec2 rel = c.p_in - c.center;
    c.start = std::atan2(rel.y, rel.x);
    c.sweep = turn;
    corners[i] = c;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double edge = norm(v[(i + 1) % n] - v[i]);
    if (tangent_len[i] + tangent_len[(i + 1) % n] > edge * (1.0 - 1e-12))
      throw Error(ErrorCode::InvalidDescriptor, "corner radius too large for polygon edges");
  }
  double offset = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Piece arc;
    arc.is_arc = true;
    arc.center = corners[i].center;
    arc.radius = r;
    arc.start_angle = corners[i].start;
    arc.sweep = corners[i].sweep;
    arc.length = r * std::abs(arc.sweep);
    arc.offset = offset;
    offset += arc.length;
    pieces_.push_back(arc);

    Piece line;
    line.a = corners[i].p_out;
    line.b = corners[(i + 1) % n].p_in;
    line.length = norm(line.b - line.a);
    line.offset = offset;
    offset += line.length;
    pieces_.push_back(line);
  }
  length_ = offset;
}

std::pair<const Curve::Piece*, double> Curve::locate(double s) const {
  const double u = wrap_unit(s) * length_;
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), u,
                             [](double value, const Piece& p) { return value < p.offset; });
  const Piece* piece = it == pieces_.begin() ? &pieces_.front() : &*(it - 1);
  return {piece, std::clamp(u - piece->offset, 0.0, piece->length)};
}

Vec2 Curve::point(double s) const {
  return std::visit(
      [&](const auto& sp) -> Vec2 {
        using T = std::decay_t<decltype(sp)>;
        const double th = kTwoPi * s;
        if constexpr (std::is_same_v<T, CircleSpec>) {
          return sp.center + Vec2{std::cos(th), std::sin(th)} * sp.radius;
        } else if constexpr (std::is_same_v<T, EllipseSpec>) {
          return sp.center +
                 rotate({sp.semi_x * std::cos(th), sp.semi_y * std::sin(th)}, sp.rotation);
        } else {
          auto [p, u] = locate(s);
          if (!p->is_arc) return p->a + (p->b - p->a) * (u / p->length);
          const double phi = p->start_angle + std::copysign(u / p->radius, p->sweep);
          return p->center + Vec2{std::cos(phi), std::sin(phi)} * p->radius;
        }
      },
      spec_);
}

Vec2 Curve::derivative(double s) const {
  return std::visit(
      [&](const auto& sp) -> Vec2 {
        using T = std::decay_t<decltype(sp)>;
        const double th = kTwoPi * s;
        if constexpr (std::is_same_v<T, CircleSpec>) {
          return Vec2{-std::sin(th), std::cos(th)} * (kTwoPi * sp.radius);
        } else if constexpr (std::is_same_v<T, EllipseSpec>) {
          return rotate({-sp.semi_x * std::sin(th), sp.semi_y * std::cos(th)}, sp.rotation) * kTwoPi;
        } else {
          auto [p, u] = locate(s);
          if (!p->is_arc) return (p->b - p->a) * (length_ / p->length);
          const double sign = p->sweep > 0 ? 1.0 : -1.0;
          const double phi = p->start_angle + sign * u / p->radius;
          return Vec2{-std::sin(phi), std::cos(phi)} * (sign * length_);
        }
      },
      spec_);
}

Vec2 Curve::second_derivative(double s) const {
  return std::visit(
      [&](const auto& sp) -> Vec2 {
        using T = std::decay_t<decltype(sp)>;
        const double th = kTwoPi * s;
        if constexpr (std::is_same_v<T, CircleSpec>) {
          return Vec2{std::cos(th), std::sin(th)} * (-kTwoPi * kTwoPi * sp.radius);
        } else if constexpr (std::is_same_v<T, EllipseSpec>) {
          return rotate({sp.semi_x * std::cos(th), sp.semi_y * std::sin(th)}, sp.rotation) *
                 (-kTwoPi * kTwoPi);
        } else {
          auto [p, u] = locate(s);
          if (!p->is_arc) return {0.0, 0.0};
          const double sign = p->sweep > 0 ? 1.0 : -1.0;
          const double phi = p->start_angle + sign * u / p->radius;
          return Vec2{std::cos(phi), std::sin(phi)} * (-length_ * length_ / p->radius);
        }
      },
      spec_);
}

Vec2 Curve::unit_tangent(double s) const {
  const Vec2 d = derivative(s);
  const double n = norm(d);
  if (n < 1e-9) throw Error(ErrorCode::DegenerateTangent, "tangent norm below 1e-9");
  return d / n;
}

Vec2 Curve::normal(double s) const {
  const Vec2 t = unit_tangent(s);
  return {t.y, -t.x};
}

double Curve::curvature(double s) const {
  const Vec2 d1 = derivative(s);
  const Vec2 d2 = second_derivative(s);
  const double n = norm(d1);
  return cross(d1, d2) / (n * n * n);
}

double Curve::signed_distance(Vec2 p) const {
  return std::visit(
      [&](const auto& sp) -> double {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, CircleSpec>) {
          return norm(p - sp.center) - sp.radius;
        } else if constexpr (std::is_same_v<T, EllipseSpec>) {
          const double s = closest_parameter(p);
          const double d = norm(p - point(s));
          const Vec2 q = rotate(p - sp.center, -sp.rotation);
          const double f = (q.x / sp.semi_x) * (q.x / sp.semi_x) +
                           (q.y / sp.semi_y) * (q.y / sp.semi_y) - 1.0;
          return f < 0 ? -d : d;
        } else {
          double best = 1e300;
          double sign = 1.0;
          for (const Piece& pc : pieces_) {
            Vec2 q;
            Vec2 outward;
            if (!pc.is_arc) {
              const Vec2 e = pc.b - pc.a;
              const double u = std::clamp(dot(p - pc.a, e) / norm2(e), 0.0, 1.0);
              q = pc.a + e * u;
              const Vec2 t = normalized(e);
              outward = {t.y, -t.x};
            } else {
              const Vec2 rel = p - pc.center;
              const double phi = std::atan2(rel.y, rel.x);
              const double delta = pc.sweep > 0 ? wrap_angle_positive(phi - pc.start_angle)
                                                 : wrap_angle_positive(pc.start_angle - phi);
              double ang;
              if (delta <= std::abs(pc.sweep)) {
                ang = phi;
              } else {
                const double end = pc.start_angle + pc.sweep;
                const Vec2 ps = pc.center + Vec2{std::cos(pc.start_angle), std::sin(pc.start_angle)} * pc.radius;
                const Vec2 pe = pc.center + Vec2{std::cos(end), std::sin(end)} * pc.radius;
                ang = norm2(p - ps) <= norm2(p - pe) ? pc.start_angle : end;
              }
              const Vec2 radial{std::cos(ang), std::sin(ang)};
              q = pc.center + radial * pc.radius;
              outward = pc.sweep > 0 ? radial : -radial;
            }
            const double d = norm(p - q);
            if (d < best) {
              best = d;
              sign = dot(p - q, outward) < 0 ? -1.0 : 1.0;
            }
          }
          return sign * best;
        }
      },
      spec_);
}

double Curve::closest_parameter(Vec2 p) const {
  return std::visit(
      [&](const auto& sp) -> double {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, CircleSpec>) {
          const Vec2 r = p - sp.center;
          return wrap_unit(std::atan2(r.y, r.x) / kTwoPi);
        } else if constexpr (std::is_same_v<T, EllipseSpec>) {
          const Vec2 q = rotate(p - sp.center, -sp.rotation);
          const double a = sp.semi_x;
          const double b = sp.semi_y;
          auto dist2 = [&](double th) {
            const double dx = a * std::cos(th) - q.x;
            const double dy = b * std::sin(th) - q.y;
            return dx * dx + dy * dy;
          };
          // Coarse scan, then Newton on the stationarity condition.
          constexpr int kScan = 64;
          double best_th = 0.0;
          double best_d = 1e300;
          for (int i = 0; i < kScan; ++i) {
            const double th = kTwoPi * i / kScan;
            const double d = dist2(th);
            if (d < best_d) {
              best_d = d;
              best_th = th;
            }
          }
          double th = best_th;
          for (int it = 0; it < 60; ++it) {
            const double c = std::cos(th);
            const double s = std::sin(th);
            const double g = (a * c - q.x) * (-a * s) + (b * s - q.y) * (b * c);
            const double gp = a * a * s * s + b * b * c * c + (a * c - q.x) * (-a * c) +
                              (b * s - q.y) * (-b * s);
            double step = gp > 0 ? g / gp : g * 1e-2;
            step = std::clamp(step, -0.2, 0.2);
            th -= step;
            if (std::abs(step) < 1e-15) break;
          }
          return wrap_unit(th / kTwoPi);
        } else {
          double best = 1e300;
          double best_s = 0.0;
          for (const Piece& pc : pieces_) {
            double u;
            Vec2 q;
            if (!pc.is_arc) {
              const Vec2 e = pc.b - pc.a;
              const double f = std::clamp(dot(p - pc.a, e) / norm2(e), 0.0, 1.0);
              q = pc.a + e * f;
              u = f * pc.length;
            } else {
              const Vec2 rel = p - pc.center;
              const double phi = std::atan2(rel.y, rel.x);
              const double delta = pc.sweep > 0 ? wrap_angle_positive(phi - pc.start_angle)
                                                 : wrap_angle_positive(pc.start_angle - phi);
              double arc_angle;
              if (delta <= std::abs(pc.sweep)) {
                arc_angle = delta;
              } else {
                // nearer endpoint: angular distance past the end vs before the start
                arc_angle = (delta - std::abs(pc.sweep)) < (kTwoPi - delta) ? std::abs(pc.sweep) : 0.0;
              }
              u = arc_angle * pc.radius;
              const double ang = pc.start_angle + std::copysign(arc_angle, pc.sweep);
              q = pc.center + Vec2{std::cos(ang), std::sin(ang)} * pc.radius;
            }
            const double d = norm2(p - q);
            if (d < best) {
              best = d;
              best_s = (pc.offset + u) / length_;
            }
          }
          return wrap_unit(best_s);
        }
      },
      spec_);
}

std::vector<LineHit> Curve::intersect_line(Vec2 o, Vec2 d) const {
  std::vector<LineHit> hits;
  auto unit_circle_hits = [&](Vec2 q, Vec2 e, auto&& to_param) {
    // |q + t e|² = 1
    const double A = norm2(e);
    const double B = 2.0 * dot(q, e);
    const double C = norm2(q) - 1.0;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0) return;
    const double sq = std::sqrt(disc);
    // numerically stable roots
    const double qq = -0.5 * (B + std::copysign(sq, B));
    double t1 = qq / A;
    double t2 = qq != 0.0 ? C / qq : -B / (2.0 * A);
    if (t1 > t2) std::swap(t1, t2);
    for (double t : {t1, t2}) {
      const Vec2 u = q + e * t;
      hits.push_back({t, to_param(u)});
    }
  };
  std::visit(
      [&](const auto& sp) {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, CircleSpec>) {
          unit_circle_hits((o - sp.center) / sp.radius, d / sp.radius,
                           [](Vec2 u) { return wrap_unit(std::atan2(u.y, u.x) / kTwoPi); });
        } else if constexpr (std::is_same_v<T, EllipseSpec>) {
          const Vec2 q = rotate(o - sp.center, -sp.rotation);
          const Vec2 e = rotate(d, -sp.rotation);
          unit_circle_hits({q.x / sp.semi_x, q.y / sp.semi_y}, {e.x / sp.semi_x, e.y / sp.semi_y},
                           [](Vec2 u) { return wrap_unit(std::atan2(u.y, u.x) / kTwoPi); });
        } else {
          for (const Piece& pc : pieces_) {
            if (!pc.is_arc) {
              const Vec2 e = pc.b - pc.a;
              const double den = cross(d, e);
              if (std::abs(den) < 1e-300) continue;
              const Vec2 w = pc.a - o;
              const double t = cross(w, e) / den;
              const double f = cross(w, d) / den;
              if (f >= 0.0 && f <= 1.0) hits.push_back({t, (pc.offset + f * pc.length) / length_});
            } else {
              const Vec2 q = (o - pc.center) / pc.radius;
              const Vec2 e = d / pc.radius;
              const double A = norm2(e);
              const double B = 2.0 * dot(q, e);
              const double C = norm2(q) - 1.0;
              const double disc = B * B - 4.0 * A * C;
              if (disc < 0) continue;
              const double sq = std::sqrt(disc);
              for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}) {
                const Vec2 u = q + e * t;
                const double phi = std::atan2(u.y, u.x);
                const double delta = pc.sweep > 0 ? wrap_angle_positive(phi - pc.start_angle)
                                                   : wrap_angle_positive(pc.start_angle - phi);
                if (delta <= std::abs(pc.sweep) + 1e-14)
                  hits.push_back({t, (pc.offset + delta * pc.radius) / length_});
              }
            }
          }
        }
      },
      spec_);
  std::sort(hits.begin(), hits.end(), [](const LineHit& a, const LineHit& b) { return a.t < b.t; });
  for (auto& h : hits) h.s = wrap_unit(h.s);
  return hits;
}

std::optional<LineHit> Curve::first_hit(Vec2 origin, Vec2 dir, double t_min) const {
  for (const LineHit& h : intersect_line(origin, dir))
    if (h.t > t_min) return h;
  return std::nullopt;
}

double Curve::arc_length(double s0, double s1) const {
  if (std::holds_alternative<CircleSpec>(spec_))
    return (s1 - s0) * length_;
  if (std::holds_alternative<RoundedPolygonSpec>(spec_)) {
    const double w0 = std::floor(s0);
    const double w1 = std::floor(s1);
    auto u = [&](double s) { return locate(s).first->offset + locate(s).second; };
    const double frac0 = s0 - w0;
    const double frac1 = s1 - w1;
    return (w1 - w0) * length_ + (frac1 > 0 ? u(frac1) : 0.0) - (frac0 > 0 ? u(frac0) : 0.0);
  }
  // Gauss–Legendre (5 points) on uniform panels.
  static constexpr double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
  static constexpr double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(s1 - s0) * 256)));
  const double h = (s1 - s0) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double mid = s0 + (i + 0.5) * h;
    for (int k = 0; k < 5; ++k) total += wg[k] * norm(derivative(mid + 0.5 * h * xg[k]));
  }
  return total * 0.5 * h;
}

BoundingBox Curve::bounding_box() const {
  BoundingBox box{{1e300, 1e300}, {-1e300, -1e300}};
  const int n = std::max(samples_, 1024);
  for (int i = 0; i < n; ++i) {
    const Vec2 p = point(static_cast<double>(i) / n);
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  }
  // Sampling can miss extrema between nodes by O(h²·curvature).
  const double pad = 1e-3 * std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y);
  box.lo -= Vec2{pad, pad};
  box.hi += Vec2{pad, pad};
  return box;
}

int Curve::winding_number(Vec2 p) const {
  const int n = std::max(samples_, 512);
  double total = 0.0;
  Vec2 prev = point(0.0) - p;
  for (int i = 1; i <= n; ++i) {
    const Vec2 cur = point(static_cast<double>(i % n) / n) - p;
    total += std::atan2(cross(prev, cur), dot(prev, cur));
    prev = cur;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

void Curve::validate() const {
  if (norm(point(1.0 - 1e-15) - point(0.0)) > 1e-12 && norm(point(1.0) - point(0.0)) > 1e-12)
    throw Error(ErrorCode::NonSimpleCurve, "curve is not closed");
  const int n = samples_;
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / n;
    pts[i] = point(s);
    if (norm(derivative(s)) < 1e-9)
      throw Error(ErrorCode::NonSimpleCurve, "tangent vanishes at sample " + std::to_string(i));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
        throw Error(ErrorCode::NonSimpleCurve,
                    "sample segments " + std::to_string(i) + " and " + std::to_string(j) + " cross");
    }
  }
}

}  // namespace translab
