#pragma once

// Small 2D toolkit for map-plane geometry (y axis pointing up).

#include <span>
#include <vector>

namespace odflow::planar {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

double dot(Vec2 a, Vec2 b);
double cross(Vec2 a, Vec2 b);
double norm(Vec2 a);

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Axis-aligned rectangle, left <= right and bottom <= top.
struct Rect {
  double left = 0.0;
  double bottom = 0.0;
  double right = 0.0;
  double top = 0.0;

  double width() const { return right - left; }
  double height() const { return top - bottom; }
  bool contains(Vec2 p, double tol = 0.0) const;
};

using Ring = std::vector<Vec2>;

// Even-odd rule over all rings (outer rings and holes alike). Points exactly
// on an edge may land on either side.
bool point_in_rings(Vec2 p, std::span<const Ring> rings);

// True when every point of `r` is inside the region bounded by `rings`:
// all corners inside and no ring edge touching the rectangle.
bool rect_in_rings(const Rect& r, std::span<const Ring> rings);

double point_segment_distance(Vec2 p, const Segment& s);
double segment_segment_distance(const Segment& s, const Segment& t);
double rect_segment_distance(const Rect& r, const Segment& s);

// Closed-segment intersection test (touching counts).
bool segments_intersect(const Segment& s, const Segment& t);

double ring_signed_area(const Ring& ring);
Vec2 ring_centroid(const Ring& ring);
Rect bounding_box(std::span<const Ring> rings);

}  // namespace odflow::planar
