#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace rulebench {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 unit_from_heading(double heading) { return {std::cos(heading), std::sin(heading)}; }

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Interpolates from `a` to `b` along the shorter arc; s in [0, 1].
double lerp_angle(double a, double b, double s);

// Rectangle of the given length (along heading) and width, centered at `center`.
struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  // Counter-clockwise: front-left, rear-left, rear-right, front-right.
  std::array<Vec2, 4> corners() const;
  Vec2 to_local(Vec2 p) const;
  Vec2 to_world(Vec2 local) const;
  bool contains(Vec2 p) const;
};

bool overlaps(const OrientedRect& a, const OrientedRect& b);

// Euclidean distance between the two filled rectangles; 0 iff they overlap
// or touch.
double min_distance(const OrientedRect& a, const OrientedRect& b);

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);
bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

// Point of the filled rectangle nearest to p (p itself when inside).
Vec2 closest_point_on_rect(const OrientedRect& r, Vec2 p);

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);

// Distance from p to the polygon's boundary.
double distance_to_boundary(Vec2 p, std::span<const Vec2> polygon);

bool rect_intersects_polygon(const OrientedRect& r, std::span<const Vec2> polygon);

bool polygon_is_simple(std::span<const Vec2> polygon);
double polygon_signed_area(std::span<const Vec2> polygon);

// Projection of a point onto a polyline. `lateral` is positive to the left of
// the polyline's direction of travel.
struct PolylineProjection {
  double station = 0.0;   // arc length of the foot point
  double lateral = 0.0;   // signed offset
  double distance = 0.0;  // |p - foot|
  Vec2 foot;
  Vec2 tangent;
  bool interior = false;  // foot strictly between the two end points
};

PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p);
double polyline_length(std::span<const Vec2> line);

}  // namespace rulebench
