// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "odflow/error.hpp"
#include "odflow/flow3d.hpp"
#include "odflow/geo.hpp"
#include "odflow/layouts.hpp"
#include "odflow/oddata.hpp"
#include "odflow/qprefine.hpp"
#include "odflow/rendersvg.hpp"
#include "oracles.hpp"
#include "qp_oracles.hpp"

namespace fs = std::filesystem;
using namespace odflow;

namespace {

const std::string kFixtures = ODFLOW_FIXTURES_DIR;
const std::string kGolden = ODFLOW_GOLDEN_DIR;
const std::string kCli = ODFLOW_CLI;
const std::vector<std::string> kFixtureNames{"au", "nz", "de", "cn", "us"};

struct Outcome {
  bool pass = true;
  std::string summary;
};

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

oddata::FlowDataset fixture(const std::string& name) {
  return oddata::load_dataset_files(kFixtures + "/" + name + "/flows.csv", kFixtures + "/" + name + "/regions.geojson");
}

std::vector<std::vector<oracle::P>> leader_lines(const layouts::MapTrixLayout& l) {
  std::vector<std::vector<oracle::P>> out;
  for (const auto* plan : {&l.origin_leaders, &l.dest_leaders}) {
    for (const auto& leader : plan->leaders) {
      out.push_back({{leader.site.x, leader.site.y}, {leader.bend.x, leader.bend.y}, {leader.port.x, leader.port.y}});
    }
  }
  return out;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// Random dataset over n regions of a fixture that has at least n regions.
// A cycle through all n regions keeps every region active.
oddata::FlowDataset random_dataset(std::mt19937_64& rng, const std::map<std::string, oddata::FlowDataset>& all,
                                   int n) {
  std::vector<const oddata::FlowDataset*> eligible;
  for (const auto& [name, d] : all) {
    if (static_cast<int>(d.regions().size()) >= n) eligible.push_back(&d);
  }
  const oddata::FlowDataset& src = *eligible[rng() % eligible.size()];
  std::vector<oddata::Region> regions = src.regions();
  std::shuffle(regions.begin(), regions.end(), rng);
  regions.resize(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> density(0.05, 0.6);
  std::uniform_int_distribution<int> magnitude(1, 1000);
  const double p = density(rng);
  std::vector<oddata::Flow> flows;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool ring = j == (i + 1) % n;
      if (ring || std::uniform_real_distribution<double>(0, 1)(rng) < p) {
        flows.push_back({regions[i].id, regions[j].id, static_cast<double>(magnitude(rng))});
      }
    }
  }
  return oddata::FlowDataset(std::move(regions), std::move(flows));
}

int qp_regressions = 0;  // shared by criteria 1 and 3
int qp_checked = 0;

Outcome crossing_free(const std::map<std::string, oddata::FlowDataset>& all) {
  std::mt19937_64 rng(20240601);
  const int sizes[] = {4, 8, 16, 34, 51};
  const auto start = std::chrono::steady_clock::now();
  int crossings = 0, datasets = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = sizes[i % 5];
    const oddata::FlowDataset d = random_dataset(rng, all, n);
    const auto layout = layouts::layout_maptrix(d, {});
    crossings += oracle::count_crossings(leader_lines(layout));
    for (const auto* qp : {&layout.origin_qp, &layout.dest_qp}) {
      ++qp_checked;
      if (qp->objective > qp->initial_objective + 1e-12) ++qp_regressions;
    }
    ++datasets;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {crossings == 0 && secs < 120.0, std::to_string(datasets) + " datasets, " + std::to_string(crossings) +
                                              " crossings, " + fmt(secs) + " s"};
}

Outcome qp_performance() {
  const std::string cmd =
      kCli + " bench-qp --regions " + kFixtures + "/us/regions.geojson --n 51 --trials 31 --json 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {false, "cannot start the CLI"};
  std::string out;
  char buf[1024];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  if (pclose(pipe) != 0) return {false, "bench-qp failed: " + out};
  const double median = nlohmann::json::parse(out)["medianMs"].get<double>();
  return {median <= 50.0, "median " + fmt(median) + " ms for n=51 (limit 50 ms)"};
}

Outcome qp_correctness() {
  using namespace qp_oracle;
  std::mt19937_64 rng(2024);
  int small = 0, worse = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 200 && small < 25; ++trial) {
    Instance in = random_instance(rng, 6, 0.0);
    std::size_t first = 0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < in.plan.leaders.size(); ++i) {
      if (in.plan.leaders[i].band == in.plan.leaders[i + 1].band) {
        first = i;
        found = true;
        break;
      }
    }
    if (!found) continue;
    for (std::size_t i = 0; i < in.rects.size(); ++i) {
      if (i == first || i == first + 1) continue;
      const auto s = in.plan.leaders[i].site;
      in.rects[i].collapsed = true;
      in.rects[i].rect = planar::Rect{s.x, s.y, s.x, s.y};
    }
    QpParams params;
    params.w = 5.0;
    params.target_separation = 0.2;
    const QpProblem p = build_qp(in.plan, in.rects, params);
    if (p.variables() > 4 || p.variables() == 0) continue;
    const QpSolution s = solve_qp(p);
    ++qp_checked;
    if (s.objective > s.initial_objective + 1e-12) ++worse;
    worst_gap = std::max(worst_gap, s.objective - grid_search(p));
    ++small;
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = random_instance(rng, 4 + static_cast<int>(rng() % 48));
    const QpSolution s = solve_qp(build_qp(in.plan, in.rects, {}));
    ++qp_checked;
    if (s.objective > s.initial_objective + 1e-12) ++worse;
  }
  worse += qp_regressions;
  return {small >= 20 && worst_gap <= 1e-2 && worse == 0,
          std::to_string(small) + " small instances, worst gap to grid optimum " + fmt(worst_gap) + ", " +
              std::to_string(worse) + " of " + std::to_string(qp_checked) + " instances above the start objective"};
}

Outcome separation_identity() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> slope(0.1, 4.0);
  double worst = 0.0;
  int sign_errors = 0;
  for (int i = 0; i < 1000; ++i) {
    const planar::Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const double k = slope(rng) * (i % 2 ? 1.0 : -1.0);
    const oracle::P pa{a.x, a.y}, pa2{a.x + 1.0, a.y + k}, pb{b.x, b.y};
    const double dist = oracle::point_line_distance(pb, pa, pa2);
    const double s = qprefine::separation(a, b, k);
    worst = std::max(worst, std::abs(std::abs(s) - dist));
    const double side = oracle::orient(pa, pa2, pb);
    if (dist > 1e-9 && (s > 0) != (side < 0)) ++sign_errors;
  }
  return {worst <= 1e-9 && sign_errors == 0,
          "1000 pairs, max deviation " + fmt(worst) + ", " + std::to_string(sign_errors) + " sign mismatches"};
}

Outcome geometry_identities() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5), hr(0.01, 0.3);
  double apex = 0.0, control = 0.0, straight = 0.0;
  for (int i = 0; i < 500; ++i) {
    const planar::Vec2 a{u(rng), u(rng) / 2}, b{u(rng), u(rng) / 2};
    const double h = hr(rng);
    control = std::max(control, std::abs(flow3d::control_height(h) - 4.0 * h / 3.0));
    const auto c = flow3d::bezier_flow_on_map(a, b, h);
    apex = std::max(apex, std::abs(c.samples[c.samples.size() / 2].z() - h));
    for (const auto& p : c.samples) {
      straight = std::max(straight, oracle::point_segment_distance({p.x(), p.y()}, {a.x, a.y}, {b.x, b.y}));
    }
  }

  std::uniform_real_distribution<double> lon(-180.0, 180.0), z(-1.0, 1.0);
  double radial = 0.0;
  const double radius = 0.4;
  for (int i = 0; i < 500; ++i) {
    const geo::GeoPoint a{lon(rng), std::asin(z(rng)) * geo::kRadToDeg};
    const geo::GeoPoint b{lon(rng), std::asin(z(rng)) * geo::kRadToDeg};
    if (geo::great_circle_distance(a, b) > 179.0) continue;
    const double h = hr(rng);
    const auto c = flow3d::globe_tube(a, b, radius, h);
    radial = std::max({radial, std::abs(c.samples.front().norm() - radius), std::abs(c.samples.back().norm() - radius),
                       std::abs(c.samples[c.samples.size() / 2].norm() - radius - h)});
  }

  // Hammer equal-area: spherical quad area dlambda * (sin phi2 - sin phi1)
  // against the shoelace area of the projected quad.
  std::uniform_real_distribution<double> qlon(-179.9, 179.8), qlat(-89.0, 88.9);
  double lo = 1e300, hi = 0.0;
  const double side = 0.1;
  for (int i = 0; i < 1000; ++i) {
    const double l0 = qlon(rng), p0 = qlat(rng);
    const geo::GeoPoint c[4] = {{l0, p0}, {l0 + side, p0}, {l0 + side, p0 + side}, {l0, p0 + side}};
    double twice = 0.0;
    for (int k = 0; k < 4; ++k) {
      const auto p = geo::hammer_forward(c[k]);
      const auto q = geo::hammer_forward(c[(k + 1) % 4]);
      twice += p.x * q.y - q.x * p.y;
    }
    const double sphere =
        side * geo::kDegToRad * (std::sin((p0 + side) * geo::kDegToRad) - std::sin(p0 * geo::kDegToRad));
    lo = std::min(lo, 0.5 * twice / sphere);
    hi = std::max(hi, 0.5 * twice / sphere);
  }
  const double area_dev = std::max(hi - 1.0, 1.0 - lo);

  // Rotation isometry, distances via the haversine formula.
  auto haversine = [](geo::GeoPoint a, geo::GeoPoint b) {
    const double p1 = a.lat * geo::kDegToRad, p2 = b.lat * geo::kDegToRad, dl = (b.lon - a.lon) * geo::kDegToRad;
    const double s = std::pow(std::sin((p2 - p1) / 2), 2) + std::cos(p1) * std::cos(p2) * std::pow(std::sin(dl / 2), 2);
    return 2.0 * std::asin(std::min(1.0, std::sqrt(s))) * geo::kRadToDeg;
  };
  double iso = 0.0;
  std::uniform_real_distribution<double> ang(-180.0, 180.0), pitch(-90.0, 90.0);
  for (int i = 0; i < 1000; ++i) {
    const auto r = geo::Rotation3::from_euler(ang(rng), pitch(rng), ang(rng));
    const geo::GeoPoint a{lon(rng), std::asin(z(rng)) * geo::kRadToDeg};
    const geo::GeoPoint b{lon(rng), std::asin(z(rng)) * geo::kRadToDeg};
    const double d0 = haversine(a, b);
    if (d0 < 1.0 || d0 > 179.0) continue;  // haversine loses precision near 0 and 180 degrees
    iso = std::max(iso, std::abs(d0 - haversine(geo::rotate(a, r), geo::rotate(b, r))));
  }

  const bool pass = apex < 1e-12 && control < 1e-12 && radial < 1e-9 && straight < 1e-9 && area_dev < 0.005 &&
                    iso < 1e-9;
  return {pass, "apex " + fmt(apex) + ", 4h/3 " + fmt(control) + ", globe radial " + fmt(radial) + " m, straightness " +
                    fmt(straight) + " m, area deviation " + fmt(100 * area_dev) + "%, isometry " + fmt(iso) + " deg"};
}

Outcome conservation_duality(const std::map<std::string, oddata::FlowDataset>& all) {
  int failures = 0;
  for (const auto& [name, d] : all) {
    double sum = 0.0, in = 0.0, out = 0.0;
    std::map<std::string, double> out_by, in_by;
    for (const auto& f : d.flows()) {
      sum += f.magnitude;
      out_by[f.origin] += f.magnitude;
      in_by[f.dest] += f.magnitude;
    }
    for (const auto& r : d.regions()) {
      in += d.total_in(r.id);
      out += d.total_out(r.id);
      if (d.total_out(r.id) != out_by[r.id] || d.total_in(r.id) != in_by[r.id]) ++failures;
    }
    if (in != sum || out != sum) ++failures;

    const auto grid = layouts::parse_grid(read(kFixtures + "/" + name + "/grid.json"));
    const auto od = layouts::layout_odmaps(d, grid, {});
    std::map<std::pair<std::string, std::string>, double> od_cells, do_cells;
    for (const char* scene_id : {"od-map", "do-map"}) {
      for (const auto& p : od.scene(scene_id).items) {
        if (!p.value || p.origin.empty()) continue;
        (scene_id[0] == 'o' ? od_cells : do_cells)[{p.origin, p.dest}] = *p.value;
      }
    }
    if (od_cells != do_cells || od_cells.size() != d.flows().size()) ++failures;
    for (const auto& f : d.flows()) {
      if (od_cells[{f.origin, f.dest}] != f.magnitude) ++failures;
    }
  }

  // relayout(d, op) against layout(transform(d, op)), the transform built
  // directly from the oddata primitives.
  std::mt19937_64 rng(31337);
  int ops = 0, mismatches = 0, rejected = 0;
  while (ops < 50) {
    const std::string& name = kFixtureNames[rng() % kFixtureNames.size()];
    const oddata::FlowDataset& d = all.at(name);
    layouts::RelayoutRequest request;
    if (rng() % 3 != 0) {
      double a = d.flows()[rng() % d.flows().size()].magnitude;
      double b = d.flows()[rng() % d.flows().size()].magnitude;
      if (a > b) std::swap(a, b);
      request.filter = std::pair{a, b};
    }
    if (rng() % 2 == 0) {
      std::vector<std::string> ids;
      for (const auto& r : d.regions()) ids.push_back(r.id);
      std::shuffle(ids.begin(), ids.end(), rng);
      const std::size_t groups = 1 + rng() % 2;
      std::size_t next = 0;
      for (std::size_t g = 0; g < groups; ++g) {
        oddata::RegionGroup group{"G" + std::to_string(g), {}};
        const std::size_t size = 2 + rng() % 3;
        for (std::size_t m = 0; m < size && next < ids.size(); ++m) group.members.insert(ids[next++]);
        request.groups.push_back(group);
      }
    }
    std::string via_relayout, via_transform;
    try {
      via_relayout = layouts::relayout(d, request, {}).to_json();
    } catch (const Error& e) {
      via_relayout = "error:" + std::string(to_string(e.code()));
    }
    try {
      oddata::FlowDataset t = request.groups.empty() ? d : oddata::aggregate_regions(d, request.groups);
      if (request.filter) t = oddata::filter_by_magnitude(t, request.filter->first, request.filter->second);
      via_transform = layouts::layout_maptrix(t, {}).to_json();
    } catch (const Error& e) {
      via_transform = "error:" + std::string(to_string(e.code()));
    }
    if (via_relayout != via_transform) ++mismatches;
    if (via_relayout.rfind("error:", 0) == 0) ++rejected;
    ++ops;
  }
  return {failures == 0 && mismatches == 0, std::to_string(all.size()) + " fixtures, " + std::to_string(failures) +
                                                " conservation/duality failures, " + std::to_string(mismatches) +
                                                " of 50 relayout ops differ, " + std::to_string(rejected) +
                                                " rejected by both"};
}

Outcome determinism() {
  const fs::path tmp = fs::temp_directory_path() / "odflow_acceptance";
  fs::create_directories(tmp);
  auto data = [](const std::string& n) {
    return "--flows " + kFixtures + "/" + n + "/flows.csv --regions " + kFixtures + "/" + n + "/regions.geojson";
  };
  const std::vector<std::pair<std::string, std::string>> artifacts{
      {"maptrix.svg", "render --kind maptrix " + data("us")},
      {"odmaps.svg", "render --kind odmaps --grid " + kFixtures + "/cn/grid.json " + data("cn")},
      {"flowmap.svg", "render --kind flowmap " + data("de")},
      {"maptrix.json", "render --kind maptrix --filter 100:5000 --groups 'E=NSW,VIC' " + data("au")},
      {"globe.json", "export3d --repr globe --encoding distance " + data("nz")},
      {"mapslink.obj", "export3d --repr mapslink --encoding quantity " + data("au")},
  };
  int differ = 0, failed = 0;
  for (const auto& [file, args] : artifacts) {
    std::string runs[2];
    for (int r = 0; r < 2; ++r) {
      const fs::path out = tmp / (std::to_string(r) + "_" + file);
      if (std::system((kCli + " " + args + " -o " + out.string()).c_str()) != 0) ++failed;
      runs[r] = read(out);
    }
    if (runs[0] != runs[1] || runs[0].empty()) ++differ;
  }
  return {differ == 0 && failed == 0, std::to_string(artifacts.size()) + " artifacts run twice, " +
                                          std::to_string(differ) + " differ, " + std::to_string(failed) +
                                          " failed (same host; cross-platform identity not checked here)"};
}

Outcome fixture_reproduction(const std::map<std::string, oddata::FlowDataset>& all) {
  const std::map<std::string, std::size_t> expected{{"au", 8}, {"nz", 16}, {"de", 16}, {"cn", 34}, {"us", 51}};
  int mismatched = 0, wrong_size = 0;
  for (const auto& [name, d] : all) {
    const auto grid = layouts::parse_grid(read(kFixtures + "/" + name + "/grid.json"));
    const auto maptrix = layouts::layout_maptrix(d, {});
    if (maptrix.size() != expected.at(name)) ++wrong_size;
    const std::map<std::string, std::string> svgs{
        {"maptrix", rendersvg::render_maptrix(maptrix)},
        {"odmaps", rendersvg::render_odmaps(layouts::layout_odmaps(d, grid, {}))},
        {"flowmap", rendersvg::render_flowmap(layouts::layout_flowmap(d, {}))}};
    for (const auto& [kind, svg] : svgs) {
      if (svg != read(kGolden + "/" + name + "_" + kind + ".svg")) ++mismatched;
    }
  }
  std::set<int> rows, cols;
  for (const auto& p : layouts::layout_maptrix(all.at("us"), {}).scene("matrix").items) {
    if (p.id.rfind("sep:row:", 0) == 0) rows.insert(std::stoi(p.id.substr(8)));
    if (p.id.rfind("sep:col:", 0) == 0) cols.insert(std::stoi(p.id.substr(8)));
  }
  std::set<int> fives;
  for (int r = 5; r < 51; r += 5) fives.insert(r);
  const bool separators = rows == fives && cols == fives;
  return {mismatched == 0 && wrong_size == 0 && separators,
          "15 SVGs, " + std::to_string(mismatched) + " differ from golden, " + std::to_string(wrong_size) +
              " wrong matrix sizes, US separators at multiples of 5: " + (separators ? "yes" : "no")};
}

}  // namespace

int main() {
  std::map<std::string, oddata::FlowDataset> all;
  for (const auto& name : kFixtureNames) all.emplace(name, fixture(name));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"crossing-free leaders", [&] { return crossing_free(all); }},
      {"QP performance", qp_performance},
      {"QP correctness", qp_correctness},
      {"separation identity", separation_identity},
      {"geometry identities", geometry_identities},
      {"conservation and duality", [&] { return conservation_duality(all); }},
      {"determinism", determinism},
      {"fixture reproduction", [&] { return fixture_reproduction(all); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.summary << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
