#include "odflow/planar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace odflow::planar {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

bool Rect::contains(Vec2 p, double tol) const {
  return p.x >= left - tol && p.x <= right + tol && p.y >= bottom - tol && p.y <= top + tol;
}

bool point_in_rings(Vec2 p, std::span<const Ring> rings) {
  bool inside = false;
  for (const Ring& ring : rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2 a = ring[i];
      const Vec2 b = ring[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) inside = !inside;
      }
    }
  }
  return inside;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 p, const Segment& s) {
  return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
         std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(t.a, s)) return true;
  if (o2 == 0 && on_segment(t.b, s)) return true;
  if (o3 == 0 && on_segment(s.a, t)) return true;
  if (o4 == 0 && on_segment(s.b, t)) return true;
  return false;
}

bool rect_in_rings(const Rect& r, std::span<const Ring> rings) {
  const Vec2 corners[4] = {{r.left, r.bottom}, {r.right, r.bottom}, {r.right, r.top}, {r.left, r.top}};
  for (const Vec2& c : corners) {
    if (!point_in_rings(c, rings)) return false;
  }
  const Segment edges[4] = {{corners[0], corners[1]}, {corners[1], corners[2]},
                            {corners[2], corners[3]}, {corners[3], corners[0]}};
  for (const Ring& ring : rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Segment e{ring[j], ring[i]};
      if (r.contains(e.a) || r.contains(e.b)) return false;
      for (const Segment& edge : edges) {
        if (segments_intersect(edge, e)) return false;
      }
    }
  }
  return true;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return norm(p - s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return norm(p - (s.a + d * t));
}

double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

double rect_segment_distance(const Rect& r, const Segment& s) {
  if (r.contains(s.a) || r.contains(s.b)) return 0.0;
  const Vec2 c[4] = {{r.left, r.bottom}, {r.right, r.bottom}, {r.right, r.top}, {r.left, r.top}};
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    best = std::min(best, segment_segment_distance(Segment{c[i], c[(i + 1) % 4]}, s));
  }
  return best;
}

double ring_signed_area(const Ring& ring) {
  double twice = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) twice += cross(ring[j], ring[i]);
  return 0.5 * twice;
}

Vec2 ring_centroid(const Ring& ring) {
  const double area = ring_signed_area(ring);
  const std::size_t n = ring.size();
  if (std::abs(area) < 1e-300 || n == 0) {
    Vec2 mean;
    for (const Vec2& p : ring) mean = mean + p;
    return n == 0 ? mean : mean * (1.0 / static_cast<double>(n));
  }
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double f = cross(ring[j], ring[i]);
    cx += (ring[j].x + ring[i].x) * f;
    cy += (ring[j].y + ring[i].y) * f;
  }
  return {cx / (6.0 * area), cy / (6.0 * area)};
}

Rect bounding_box(std::span<const Ring> rings) {
  Rect b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Ring& ring : rings) {
    for (const Vec2& p : ring) {
      b.left = std::min(b.left, p.x);
      b.right = std::max(b.right, p.x);
      b.bottom = std::min(b.bottom, p.y);
      b.top = std::max(b.top, p.y);
    }
  }
  return b;
}

}  // namespace odflow::planar
