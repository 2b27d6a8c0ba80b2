#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library on purpose.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct P {
  double x, y;
};

struct Seg {
  P a, b;
};

inline double orient(P a, P b, P c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

inline bool within(P a, P b, P c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
         c.y <= std::max(a.y, b.y);
}

// Closed segments: touching counts as an intersection.
inline bool intersect(const Seg& s, const Seg& t) {
  const double d1 = orient(t.a, t.b, s.a), d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a), d4 = orient(s.a, s.b, t.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && within(t.a, t.b, s.a)) return true;
  if (d2 == 0 && within(t.a, t.b, s.b)) return true;
  if (d3 == 0 && within(s.a, s.b, t.a)) return true;
  if (d4 == 0 && within(s.a, s.b, t.b)) return true;
  return false;
}

// Polylines given as vertex lists; zero-length pieces are skipped.
inline int count_crossings(const std::vector<std::vector<P>>& lines) {
  int crossings = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      bool hit = false;
      for (std::size_t a = 1; a < lines[i].size() && !hit; ++a) {
        const Seg s{lines[i][a - 1], lines[i][a]};
        if (s.a.x == s.b.x && s.a.y == s.b.y && lines[i].size() > 2) continue;
        for (std::size_t b = 1; b < lines[j].size() && !hit; ++b) {
          const Seg t{lines[j][b - 1], lines[j][b]};
          if (t.a.x == t.b.x && t.a.y == t.b.y && lines[j].size() > 2) continue;
          hit = intersect(s, t);
        }
      }
      crossings += hit ? 1 : 0;
    }
  }
  return crossings;
}

inline double point_line_distance(P p, P a, P b) {
  return std::abs(orient(a, b, p)) / std::hypot(b.x - a.x, b.y - a.y);
}

inline double point_segment_distance(P p, P a, P b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 == 0 ? 0 : ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

// Crossing-number point-in-polygon over several rings (even-odd).
inline bool inside(P p, const std::vector<std::vector<P>>& rings) {
  int crossings = 0;
  for (const auto& r : rings) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const P a = r[i], b = r[i + 1];
      if ((a.y <= p.y && b.y > p.y) || (b.y <= p.y && a.y > p.y)) {
        const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
        if (x > p.x) ++crossings;
      }
    }
  }
  return crossings % 2 == 1;
}

}  // namespace oracle
