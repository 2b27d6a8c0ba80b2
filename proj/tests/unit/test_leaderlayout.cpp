#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "odflow/error.hpp"
#include "odflow/leaderlayout.hpp"
#include "oracles.hpp"

using namespace odflow;
using namespace odflow::leaderlayout;

namespace {

std::vector<std::vector<oracle::P>> polylines(const LeaderPlan& plan) {
  std::vector<std::vector<oracle::P>> out;
  for (const Leader& l : plan.leaders) {
    out.push_back({{l.site.x, l.site.y}, {l.bend.x, l.bend.y}, {l.port.x, l.port.y}});
  }
  return out;
}

std::vector<Site> random_sites(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Site> sites;
  for (int i = 0; i < n; ++i) sites.push_back({"s" + std::to_string(i), {u(rng), u(rng)}});
  return sites;
}

PortLine unit_edge(double k) { return PortLine{1.0 + 1.0 / k + 0.05, 1.0, 0.0}; }

LeaderPlan plan_for(std::span<const Site> sites, double k = 1.0) {
  const PortLine edge = unit_edge(k);
  const auto ordering = compute_ordering(sites, edge, k);
  return route_leaders(sites, ordering, edge, {k, 0.0, 0.0});
}

Ring square(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}; }

}  // namespace

TEST_CASE("small orderings") {
  const std::vector<Site> one{{"a", {0.3, 0.4}}};
  CHECK(compute_ordering(one, unit_edge(1)) == std::vector<std::string>{"a"});

  const std::vector<Site> three{{"c", {0.1, 0.1}}, {"a", {0.5, 0.9}}, {"b", {0.3, 0.5}}};
  CHECK(compute_ordering(three, unit_edge(1)) == std::vector<std::string>{"a", "b", "c"});

  // Level with its port: the diagonal has zero length.
  const std::vector<Site> level{{"a", {0.2, 0.5}}};
  const LeaderPlan p = plan_for(level);
  CHECK(p.leaders[0].bend.x == p.leaders[0].site.x);
  CHECK(p.leaders[0].bend.y == p.leaders[0].site.y);
  CHECK(p.leaders[0].orientation == Orientation::kUp);

  // One site above the port line, one below: one up band, one down band.
  const std::vector<Site> two{{"hi", {0.2, 0.95}}, {"lo", {0.3, 0.05}}};
  const LeaderPlan q = plan_for(two);
  REQUIRE(q.bands.size() == 2);
  CHECK(q.bands[0].orientation == Orientation::kDown);
  CHECK(q.bands[1].orientation == Orientation::kUp);
  REQUIRE(q.band_lines.size() == 1);
  CHECK(q.band_lines[0].y < q.leaders[0].port.y);
  CHECK(q.band_lines[0].y > q.leaders[1].port.y);
}

TEST_CASE("swaps untangle crossing leaders") {
  // Sorted by y alone, "far" would take the upper port and its diagonal
  // would cut the horizontal of "near".
  const std::vector<Site> sites{{"far", {0.9, 0.2}}, {"near", {0.0, 0.1}}};
  const LeaderPlan p = plan_for(sites);
  CHECK(oracle::count_crossings(polylines(p)) == 0);
  CHECK(p.ordering == std::vector<std::string>{"near", "far"});
}

TEST_CASE("random instances are crossing-free with exact slopes and even ports") {
  std::mt19937_64 rng(1234);
  const int sizes[] = {4, 5, 8, 13, 16, 34, 51};
  int instances = 0;
  for (int round = 0; round < 20; ++round) {
    for (int n : sizes) {
      for (double k : {1.0, 0.5, 2.0}) {
        const auto sites = random_sites(rng, n);
        const LeaderPlan plan = plan_for(sites, k);
        ++instances;
        CHECK(oracle::count_crossings(polylines(plan)) == 0);
        const double pitch = plan.edge.pitch(n);
        for (std::size_t i = 0; i < plan.leaders.size(); ++i) {
          const Leader& l = plan.leaders[i];
          CHECK(l.port.y == doctest::Approx(1.0 - (i + 0.5) * pitch).epsilon(1e-15));
          CHECK(l.port.x == plan.edge.x);
          CHECK(l.bend.y == l.port.y);
          const double dx = l.bend.x - l.site.x;
          if (dx > 1e-9) {
            const double slope = (l.bend.y - l.site.y) / dx;
            CHECK(std::abs(std::abs(slope) - k) < 1e-9 * k);
            CHECK((slope > 0) == (l.orientation == Orientation::kUp));
          }
        }
        // Every leader is in exactly one band of uniform orientation.
        std::size_t covered = 0;
        for (const Band& b : plan.bands) {
          for (std::size_t i = b.first; i <= b.last; ++i) CHECK(plan.leaders[i].orientation == b.orientation);
          covered += b.last - b.first + 1;
        }
        CHECK(covered == plan.leaders.size());
      }
    }
  }
  CHECK(instances >= 100);
}

TEST_CASE("ordering ignores input order") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto sites = random_sites(rng, 16);
    const auto reference = compute_ordering(sites, unit_edge(1));
    std::shuffle(sites.begin(), sites.end(), rng);
    CHECK(compute_ordering(sites, unit_edge(1)) == reference);
  }
  // Ties on y break by x, then by id.
  const std::vector<Site> ties{{"b", {0.5, 0.5}}, {"a", {0.5, 0.5001}}, {"c", {0.1, 0.5}}};
  const std::vector<Site> ties2{{"c", {0.1, 0.5}}, {"b", {0.5, 0.5}}, {"a", {0.5, 0.5001}}};
  CHECK(compute_ordering(ties, unit_edge(1)) == compute_ordering(ties2, unit_edge(1)));
}

TEST_CASE("routing errors") {
  const std::vector<Site> sites{{"a", {0.1, 0.1}}, {"b", {0.2, 0.9}}};
  const std::vector<std::string> order{"b", "a"};
  try {
    route_leaders(sites, order, PortLine{3.0, 1.0, 0.0}, {1.0, 0.6, 0.0});
    FAIL("expected InfeasibleGeometry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleGeometry);
  }
  // Port line too close: the diagonal would overshoot it.
  CHECK_THROWS_AS(route_leaders(sites, order, PortLine{0.25, 1.0, 0.0}), Error);
  const std::vector<std::string> bad{"a", "zz"};
  CHECK_THROWS_AS(route_leaders(sites, bad, unit_edge(1)), Error);
}

TEST_CASE("free rectangles") {
  const std::vector<Ring> box{square(0, 0, 1, 1)};
  const std::vector<Site> lone{{"a", {0.5, 0.5}}};
  const LeaderPlan solo = plan_for(lone);

  SUBCASE("square region with a centered site fills the square") {
    const FreeRect r = grow_free_rect(box, {0.5, 0.5}, solo, 0, 0.01);
    CHECK_FALSE(r.pruned);
    CHECK_FALSE(r.collapsed);
    CHECK(r.rect.left == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(r.rect.right == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.rect.width() > 1.0 - 1e-5);
    CHECK(r.rect.height() > 1.0 - 1e-5);
    CHECK(r.rect.width() < 1.0);
  }

  SUBCASE("isthmus limits the width") {
    // Dumbbell: two squares joined by a 0.1-high corridor; site in the corridor.
    const std::vector<Ring> dumbbell{{{0, 0}, {1, 0}, {1, 0.45}, {2, 0.45}, {2, 0}, {3, 0}, {3, 1},
                                      {2, 1}, {2, 0.55}, {1, 0.55}, {1, 1}, {0, 1}, {0, 0}}};
    const FreeRect r = grow_free_rect(dumbbell, {1.5, 0.5}, solo, 0, 0.0);
    CHECK(r.rect.height() <= 0.1);
    // Containment oracle on corners and edge midpoints.
    std::vector<std::vector<oracle::P>> rings;
    rings.push_back({});
    for (const auto& p : dumbbell[0]) rings[0].push_back({p.x, p.y});
    const auto& q = r.rect;
    for (oracle::P p : {oracle::P{q.left, q.bottom}, {q.right, q.bottom}, {q.right, q.top}, {q.left, q.top},
                        {(q.left + q.right) / 2, q.bottom}, {(q.left + q.right) / 2, q.top},
                        {q.left, (q.bottom + q.top) / 2}, {q.right, (q.bottom + q.top) / 2}}) {
      CHECK(oracle::inside(p, rings));
    }
  }

  SUBCASE("pruning keeps clear of a nearby leader") {
    // Leader of "b" runs horizontally at y = 0.8 through the square.
    const double d_b = 0.1;
    LeaderPlan plan;
    plan.k = 1.0;
    plan.edge = PortLine{3.0, 1.0, 0.0};
    Leader a;
    a.id = "a";
    a.site = {0.5, 0.5};
    a.bend = {0.5, 0.5};
    a.port = {3.0, 0.5};
    Leader b;
    b.id = "b";
    b.site = {0.05, 0.8};
    b.bend = {0.05, 0.8};
    b.port = {3.0, 0.8};
    plan.leaders = {a, b};
    const FreeRect r = grow_free_rect(box, {0.5, 0.5}, plan, 0, d_b);
    CHECK(r.pruned);
    CHECK_FALSE(r.collapsed);
    // Distance oracle on the sampled rectangle boundary.
    const auto& q = r.rect;
    double worst = 1e9;
    for (int i = 0; i <= 100; ++i) {
      const double t = i / 100.0;
      for (oracle::P p : {oracle::P{q.left + t * q.width(), q.bottom}, {q.left + t * q.width(), q.top},
                          {q.left, q.bottom + t * q.height()}, {q.right, q.bottom + t * q.height()}}) {
        worst = std::min(worst, oracle::point_segment_distance(p, {0.05, 0.8}, {3.0, 0.8}));
      }
    }
    CHECK(worst >= d_b);
    CHECK(q.contains({0.5, 0.5}));

    // A leader passing the site itself at 0.5 * d_b collapses the rectangle.
    plan.leaders[1].site = plan.leaders[1].bend = {0.05, 0.55};
    plan.leaders[1].port = {3.0, 0.55};
    const FreeRect c = grow_free_rect(box, {0.5, 0.5}, plan, 0, d_b);
    CHECK(c.collapsed);
    CHECK(c.rect.width() == 0.0);
  }

  SUBCASE("site outside the region collapses") {
    const FreeRect r = grow_free_rect(box, {2.0, 2.0}, solo, 0, 0.0);
    CHECK(r.collapsed);
  }
}
