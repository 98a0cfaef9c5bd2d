#include "rulebench/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace rulebench {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

double lerp_angle(double a, double b, double s) { return a + s * wrap_angle(b - a); }

std::array<Vec2, 4> OrientedRect::corners() const {
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {to_world({hl, hw}), to_world({-hl, hw}), to_world({-hl, -hw}), to_world({hl, -hw})};
}

Vec2 OrientedRect::to_local(Vec2 p) const {
  const Vec2 d = p - center;
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Vec2 OrientedRect::to_world(Vec2 local) const {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {center.x + c * local.x - s * local.y, center.y + s * local.x + c * local.y};
}

bool OrientedRect::contains(Vec2 p) const {
  const Vec2 l = to_local(p);
  return std::abs(l.x) <= 0.5 * length && std::abs(l.y) <= 0.5 * width;
}

namespace {

// Half-extent of the rectangle's projection onto a unit axis.
double projected_radius(const OrientedRect& r, Vec2 axis) {
  const Vec2 u = unit_from_heading(r.heading);
  const Vec2 v{-u.y, u.x};
  return 0.5 * r.length * std::abs(dot(u, axis)) + 0.5 * r.width * std::abs(dot(v, axis));
}

}  // namespace

bool overlaps(const OrientedRect& a, const OrientedRect& b) {
  const Vec2 d = b.center - a.center;
  const Vec2 ua = unit_from_heading(a.heading);
  const Vec2 ub = unit_from_heading(b.heading);
  const std::array<Vec2, 4> axes{ua, Vec2{-ua.y, ua.x}, ub, Vec2{-ub.y, ub.x}};
  for (const Vec2 axis : axes) {
    if (std::abs(dot(d, axis)) > projected_radius(a, axis) + projected_radius(b, axis)) {
      return false;
    }
  }
  return true;
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return a;
  const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + s * ab;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  return norm(p - closest_point_on_segment(p, a, b));
}

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  const double d1 = cross(a1 - a0, b0 - a0);
  const double d2 = cross(a1 - a0, b1 - a0);
  const double d3 = cross(b1 - b0, a0 - b0);
  const double d4 = cross(b1 - b0, a1 - b0);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](Vec2 p, Vec2 q, Vec2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  if (d1 == 0 && on_segment(a0, a1, b0)) return true;
  if (d2 == 0 && on_segment(a0, a1, b1)) return true;
  if (d3 == 0 && on_segment(b0, b1, a0)) return true;
  if (d4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

double segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double min_distance(const OrientedRect& a, const OrientedRect& b) {
  if (overlaps(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, segment_distance(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]));
    }
  }
  return best;
}

Vec2 closest_point_on_rect(const OrientedRect& r, Vec2 p) {
  const Vec2 l = r.to_local(p);
  const Vec2 clamped{std::clamp(l.x, -0.5 * r.length, 0.5 * r.length),
                     std::clamp(l.y, -0.5 * r.width, 0.5 * r.width)};
  return r.to_world(clamped);
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double distance_to_boundary(Vec2 p, std::span<const Vec2> polygon) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(p, polygon[i], polygon[(i + 1) % n]));
  }
  return best;
}

bool rect_intersects_polygon(const OrientedRect& r, std::span<const Vec2> polygon) {
  const auto c = r.corners();
  for (const Vec2 corner : c) {
    if (point_in_polygon(corner, polygon)) return true;
  }
  for (const Vec2 v : polygon) {
    if (r.contains(v)) return true;
  }
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (segments_intersect(c[i], c[(i + 1) % 4], polygon[j], polygon[(j + 1) % n])) return true;
    }
  }
  return false;
}

double polygon_signed_area(std::span<const Vec2> polygon) {
  double area = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    area += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * area;
}

bool polygon_is_simple(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  if (polygon_signed_area(polygon) == 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

double polyline_length(std::span<const Vec2> line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) len += norm(line[i] - line[i - 1]);
  return len;
}

PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double station = 0.0;
  const double total = polyline_length(line);
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 a = line[i - 1];
    const Vec2 b = line[i];
    const Vec2 ab = b - a;
    const double seg_len = norm(ab);
    if (seg_len == 0.0) continue;
    const double s = std::clamp(dot(p - a, ab) / (seg_len * seg_len), 0.0, 1.0);
    const Vec2 foot = a + s * ab;
    const double d = norm(p - foot);
    if (d < best.distance) {
      best.distance = d;
      best.foot = foot;
      best.tangent = (1.0 / seg_len) * ab;
      best.station = station + s * seg_len;
      best.lateral = cross(best.tangent, p - foot) >= 0.0 ? d : -d;
    }
    station += seg_len;
  }
  best.interior = best.station > 0.0 && best.station < total;
  // Beyond the ends, report the lateral offset in the end segment's frame.
  if (!best.interior && line.size() >= 2) {
    best.lateral = cross(best.tangent, p - best.foot);
  }
  return best;
}

}  // namespace rulebench
