#pragma once

// One-sided boundary labeling with po-leaders. Every site connects to a port
// on a vertical port line to its right through one diagonal of slope +k or -k
// followed by one horizontal segment. Ports are evenly spaced top to bottom
// in ordering order.
//
// The ordering first takes the assignment minimizing total vertical leader
// travel (sites sorted by descending y), then swaps crossing pairs while the
// potential (sum |Y - y|, -sum Y * beta) decreases lexicographically, where
// beta is the intercept of the diagonal's support line. Each swap of a
// crossing pair lowers that potential, so the loop ends crossing-free.

#include <span>
#include <string>
#include <vector>

#include "odflow/planar.hpp"

namespace odflow::leaderlayout {

using planar::Rect;
using planar::Ring;
using planar::Segment;
using planar::Vec2;

enum class Orientation { kUp, kDown };

struct Site {
  std::string id;
  Vec2 point;
};

// Vertical port line x = `x`; n ports evenly spread over [bottom, top].
struct PortLine {
  double x = 0.0;
  double top = 1.0;
  double bottom = 0.0;

  double pitch(std::size_t n) const { return (top - bottom) / static_cast<double>(n); }
  double port_y(std::size_t index, std::size_t n) const {
    return top - (static_cast<double>(index) + 0.5) * pitch(n);
  }
};

struct Leader {
  std::string id;
  Vec2 site;
  Vec2 bend;  // end of the diagonal
  Vec2 port;
  Orientation orientation = Orientation::kUp;
  std::size_t band = 0;

  Segment diagonal() const { return {site, bend}; }
  Segment horizontal() const { return {bend, port}; }
  // Intercept of the diagonal's support line: y - k x (up) or y + k x (down).
  double intercept(double k) const;
};

// Maximal run [first, last] of consecutive leaders sharing an orientation.
struct Band {
  std::size_t first = 0;
  std::size_t last = 0;
  Orientation orientation = Orientation::kUp;
};

// Horizontal line separating band `upper` from band `upper + 1`. Leaders of
// the upper band lie entirely above `y`, leaders of the lower band below.
struct BandLine {
  std::size_t upper = 0;
  double y = 0.0;
  double clearance = 0.0;  // min(d_lc, half the initial gap)
};

struct LeaderPlan {
  std::vector<std::string> ordering;
  std::vector<Leader> leaders;  // in ordering order
  std::vector<Band> bands;
  std::vector<BandLine> band_lines;
  PortLine edge;
  double k = 1.0;

  // Index of a region id in the ordering; throws UnknownRegion.
  std::size_t index_of(const std::string& id) const;
};

struct RouteOptions {
  double k = 1.0;
  double min_pitch = 0.0;  // minimum port spacing
  double d_lc = 0.0;       // band-line clearance
};

// Crossing-free ordering of site ids (rows/columns top to bottom).
// Deterministic: independent of the input order of `sites`.
std::vector<std::string> compute_ordering(std::span<const Site> sites, const PortLine& edge,
                                          double k = 1.0);

// Leaders for the given ordering. Throws InfeasibleGeometry when the port
// line is shorter than n * min_pitch or a diagonal would pass the port line.
LeaderPlan route_leaders(std::span<const Site> sites, std::span<const std::string> ordering,
                         const PortLine& edge, const RouteOptions& options = {});

// Whether two routed leaders touch or intersect.
bool leaders_intersect(const Leader& a, const Leader& b);

struct FreeRect {
  Rect rect;               // collapses to the site point when `collapsed`
  bool pruned = false;     // shrunk to keep clear of other leaders
  bool collapsed = false;  // no room at all; the site is fixed
};

// Alternating binary search for a rectangle centered on the site inside
// `region` (even-odd rule). When it comes closer than d_b to another leader
// of `plan` it is regrown with that clearance as an extra constraint.
FreeRect grow_free_rect(std::span<const Ring> region, Vec2 site, const LeaderPlan& plan,
                        std::size_t leader_index, double d_b, int iterations = 20);

}  // namespace odflow::leaderlayout
