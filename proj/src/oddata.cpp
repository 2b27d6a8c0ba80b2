#include "odflow/oddata.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "odflow/error.hpp"
#include "odflow/planar.hpp"

namespace odflow::oddata {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

planar::Ring planar_ring(const GeoRing& ring) {
  planar::Ring out;
  out.reserve(ring.size());
  for (const GeoPoint& p : ring) out.push_back({p.lon, p.lat});
  return out;
}

std::vector<planar::Ring> planar_polygon(const GeoPolygon& poly) {
  std::vector<planar::Ring> rings;
  for (const GeoRing& r : poly) rings.push_back(planar_ring(r));
  return rings;
}

// Interior point of a polygon: its centroid when inside, otherwise the
// middle of the widest interior span on the horizontal through the centroid.
GeoPoint interior_anchor(const GeoPolygon& poly) {
  const std::vector<planar::Ring> rings = planar_polygon(poly);
  planar::Vec2 c = planar::ring_centroid(rings.front());
  if (planar::point_in_rings(c, rings)) return geo::make_geo_point(c.x, c.y);
  std::vector<double> xs;
  for (const planar::Ring& ring : rings) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const planar::Vec2 a = ring[i];
      const planar::Vec2 b = ring[j];
      if ((a.y > c.y) != (b.y > c.y)) xs.push_back(a.x + (c.y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
  }
  std::sort(xs.begin(), xs.end());
  double best = -1.0;
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
    if (xs[i + 1] - xs[i] > best) {
      best = xs[i + 1] - xs[i];
      c.x = 0.5 * (xs[i] + xs[i + 1]);
    }
  }
  return geo::make_geo_point(c.x, c.y);
}

GeoRing parse_ring(const json& coords, std::size_t feature) {
  if (!coords.is_array() || coords.size() < 3) {
    throw Error(ErrorCode::kParseError, "ring needs at least 3 positions",
                "feature " + std::to_string(feature));
  }
  GeoRing ring;
  for (const json& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw Error(ErrorCode::kParseError, "bad position", "feature " + std::to_string(feature));
    }
    try {
      ring.push_back(geo::make_geo_point(pos[0].get<double>(), pos[1].get<double>()));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, e.what(), "feature " + std::to_string(feature));
    }
  }
  if (!(ring.front() == ring.back())) ring.push_back(ring.front());
  return ring;
}

GeoPolygon parse_polygon(const json& coords, std::size_t feature) {
  if (!coords.is_array() || coords.empty()) {
    throw Error(ErrorCode::kParseError, "empty polygon", "feature " + std::to_string(feature));
  }
  GeoPolygon poly;
  for (const json& ring : coords) poly.push_back(parse_ring(ring, feature));
  return poly;
}

std::string json_id(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return {};
}

}  // namespace

std::string derive_abbr(std::string_view id) {
  std::string out;
  for (char ch : id.substr(0, 4)) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  return out;
}

std::size_t Region::largest_polygon() const {
  std::size_t best = 0;
  double best_area = -1.0;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    if (boundary[i].empty()) continue;
    const double area = std::abs(planar::ring_signed_area(planar_ring(boundary[i].front())));
    if (area > best_area) {
      best_area = area;
      best = i;
    }
  }
  return best;
}

FlowDataset::FlowDataset(std::vector<Region> regions, std::vector<Flow> flows,
                         DatasetOptions options)
    : regions_(std::move(regions)), flows_(std::move(flows)), options_(options) {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const std::string& id = regions_[i].id;
    if (id.empty()) throw Error(ErrorCode::kParseError, "region without id");
    if (!index_.emplace(id, i).second) {
      throw Error(ErrorCode::kParseError, "duplicate region id " + id, id);
    }
    totals_.emplace(id, RegionTotals{id, 0.0, 0.0});
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const Flow& f : flows_) {
    for (const std::string* end : {&f.origin, &f.dest}) {
      if (!index_.count(*end)) throw Error(ErrorCode::kUnknownRegion, "unknown region " + *end, *end);
    }
    if (!(f.magnitude >= 0.0) || !std::isfinite(f.magnitude)) {
      throw Error(ErrorCode::kNegativeMagnitude, "flow magnitude must be a non-negative number",
                  f.origin + "," + f.dest);
    }
    if (f.origin == f.dest && !options_.allow_self_flows) {
      throw Error(ErrorCode::kSelfFlow, "self-flows are disabled", f.origin);
    }
    if (!seen.emplace(f.origin, f.dest).second) {
      throw Error(ErrorCode::kDuplicateFlow, "duplicate flow " + f.origin + "->" + f.dest,
                  f.origin + "," + f.dest);
    }
    totals_.find(f.origin)->second.total_out += f.magnitude;
    totals_.find(f.dest)->second.total_in += f.magnitude;
    active_.insert(f.origin);
    active_.insert(f.dest);
  }
}

const Region* FlowDataset::find_region(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &regions_[it->second];
}

const Region& FlowDataset::region(std::string_view id) const {
  const Region* r = find_region(id);
  if (!r) throw Error(ErrorCode::kUnknownRegion, "unknown region " + std::string(id), std::string(id));
  return *r;
}

bool FlowDataset::is_active(std::string_view id) const { return active_.find(id) != active_.end(); }

std::vector<std::string> FlowDataset::active_region_ids() const {
  return {active_.begin(), active_.end()};
}

double FlowDataset::total_in(std::string_view id) const {
  auto it = totals_.find(id);
  if (it == totals_.end()) throw Error(ErrorCode::kUnknownRegion, "unknown region", std::string(id));
  return it->second.total_in;
}

double FlowDataset::total_out(std::string_view id) const {
  auto it = totals_.find(id);
  if (it == totals_.end()) throw Error(ErrorCode::kUnknownRegion, "unknown region", std::string(id));
  return it->second.total_out;
}

std::vector<RegionTotals> FlowDataset::totals() const {
  std::vector<RegionTotals> out;
  out.reserve(totals_.size());
  for (const auto& [id, t] : totals_) out.push_back(t);
  return out;
}

std::vector<Flow> FlowDataset::self_flows() const {
  std::vector<Flow> out;
  std::copy_if(flows_.begin(), flows_.end(), std::back_inserter(out),
               [](const Flow& f) { return f.origin == f.dest; });
  return out;
}

double FlowDataset::min_magnitude() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Flow& f : flows_) m = std::min(m, f.magnitude);
  return flows_.empty() ? 0.0 : m;
}

double FlowDataset::max_magnitude() const {
  double m = 0.0;
  for (const Flow& f : flows_) m = std::max(m, f.magnitude);
  return m;
}

std::vector<Flow> parse_flows(std::string_view csv) {
  if (csv.size() >= 3 && static_cast<unsigned char>(csv[0]) == 0xEF &&
      static_cast<unsigned char>(csv[1]) == 0xBB && static_cast<unsigned char>(csv[2]) == 0xBF) {
    csv.remove_prefix(3);
  }
  std::vector<Flow> flows;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(csv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = "line " + std::to_string(line_no);
    if (!header_seen) {
      if (fields.size() != 3 || unquote(fields[0]) != "origin" || unquote(fields[1]) != "dest" ||
          unquote(fields[2]) != "magnitude") {
        throw Error(ErrorCode::kParseError, "expected header origin,dest,magnitude", where);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw Error(ErrorCode::kParseError, "expected 3 fields", where);
    Flow f{std::string(unquote(fields[0])), std::string(unquote(fields[1])), 0.0};
    if (f.origin.empty() || f.dest.empty()) throw Error(ErrorCode::kParseError, "empty region id", where);
    if (!parse_double(unquote(fields[2]), f.magnitude) || !std::isfinite(f.magnitude)) {
      throw Error(ErrorCode::kParseError, "bad magnitude '" + std::string(fields[2]) + "'", where);
    }
    if (f.magnitude < 0.0) {
      throw Error(ErrorCode::kNegativeMagnitude, "negative magnitude", where);
    }
    flows.push_back(std::move(f));
  }
  if (!header_seen) throw Error(ErrorCode::kParseError, "missing header", "line 1");
  return flows;
}

std::vector<Region> parse_regions(std::string_view geojson) {
  json doc;
  try {
    doc = json::parse(geojson);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("invalid JSON: ") + e.what(),
                "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw Error(ErrorCode::kParseError, "expected a GeoJSON FeatureCollection", "root");
  }
  std::vector<Region> regions;
  std::size_t index = 0;
  for (const json& feature : doc["features"]) {
    const std::string where = "feature " + std::to_string(index);
    if (!feature.is_object() || !feature.contains("properties") || !feature["properties"].is_object()) {
      throw Error(ErrorCode::kParseError, "feature without properties", where);
    }
    const json& props = feature["properties"];
    Region r;
    r.id = props.contains("id") ? json_id(props["id"]) : std::string();
    if (r.id.empty()) throw Error(ErrorCode::kParseError, "feature without id property", where);
    r.name = props.contains("name") && props["name"].is_string() ? props["name"].get<std::string>() : r.id;
    r.abbr = props.contains("abbr") && props["abbr"].is_string() ? props["abbr"].get<std::string>()
                                                                 : derive_abbr(r.id);
    if (r.abbr.empty() || r.abbr.size() > 4) {
      throw Error(ErrorCode::kParseError, "abbr must have 1 to 4 characters", where);
    }
    if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
      throw Error(ErrorCode::kParseError, "feature without geometry", where);
    }
    const json& geom = feature["geometry"];
    const std::string type = geom.value("type", "");
    if (!geom.contains("coordinates")) throw Error(ErrorCode::kParseError, "missing coordinates", where);
    if (type == "Polygon") {
      r.boundary.push_back(parse_polygon(geom["coordinates"], index));
    } else if (type == "MultiPolygon") {
      for (const json& poly : geom["coordinates"]) r.boundary.push_back(parse_polygon(poly, index));
    } else {
      throw Error(ErrorCode::kParseError, "unsupported geometry type '" + type + "'", where);
    }
    if (r.boundary.empty()) throw Error(ErrorCode::kParseError, "empty geometry", where);
    r.anchor = interior_anchor(r.boundary[r.largest_polygon()]);
    regions.push_back(std::move(r));
    ++index;
  }
  return regions;
}

FlowDataset load_dataset(std::string_view flows_csv, std::string_view regions_geojson,
                         DatasetOptions options) {
  return FlowDataset(parse_regions(regions_geojson), parse_flows(flows_csv), options);
}

FlowDataset load_dataset(std::istream& flows_csv, std::istream& regions_geojson,
                         DatasetOptions options) {
  std::ostringstream f;
  std::ostringstream r;
  f << flows_csv.rdbuf();
  r << regions_geojson.rdbuf();
  return load_dataset(f.str(), r.str(), options);
}

FlowDataset load_dataset_files(const std::filesystem::path& flows_csv,
                               const std::filesystem::path& regions_geojson,
                               DatasetOptions options) {
  std::ifstream f(flows_csv, std::ios::binary);
  if (!f) throw Error(ErrorCode::kParseError, "cannot open " + flows_csv.string(), flows_csv.string());
  std::ifstream r(regions_geojson, std::ios::binary);
  if (!r) {
    throw Error(ErrorCode::kParseError, "cannot open " + regions_geojson.string(),
                regions_geojson.string());
  }
  return load_dataset(f, r, options);
}

FlowDataset filter_by_magnitude(const FlowDataset& d, double lo, double hi) {
  if (!(lo <= hi)) {
    throw Error(ErrorCode::kInvalidRange, "filter range requires lo <= hi",
                std::to_string(lo) + ":" + std::to_string(hi));
  }
  std::vector<Flow> kept;
  for (const Flow& f : d.flows()) {
    if (lo <= f.magnitude && f.magnitude <= hi) kept.push_back(f);
  }
  return FlowDataset(d.regions(), std::move(kept), d.options());
}

FlowDataset aggregate_regions(const FlowDataset& d, const std::vector<RegionGroup>& groups) {
  std::map<std::string, std::string> owner;  // member id -> group label
  std::set<std::string> labels;
  for (const RegionGroup& g : groups) {
    if (g.label.empty() || g.members.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "groups need a label and at least one member", g.label);
    }
    if (!labels.insert(g.label).second) {
      throw Error(ErrorCode::kOverlappingGroups, "duplicate group label " + g.label, g.label);
    }
    for (const std::string& m : g.members) {
      d.region(m);
      if (!owner.emplace(m, g.label).second) {
        throw Error(ErrorCode::kOverlappingGroups, "region " + m + " is in more than one group", m);
      }
    }
  }

  std::vector<Region> regions;
  for (const Region& r : d.regions()) {
    if (owner.count(r.id)) continue;
    if (labels.count(r.id)) {
      throw Error(ErrorCode::kInvalidArgument, "group label collides with region " + r.id, r.id);
    }
    regions.push_back(r);
  }
  for (const RegionGroup& g : groups) {
    Region merged;
    merged.id = g.label;
    merged.name = g.label;
    merged.abbr = derive_abbr(g.label);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const std::string& m : g.members) {
      const Region& r = d.region(m);
      merged.boundary.insert(merged.boundary.end(), r.boundary.begin(), r.boundary.end());
      mean += geo::to_unit_vector(r.anchor);
    }
    if (g.members.size() == 1) {
      const Region& only = d.region(*g.members.begin());
      merged.name = only.name;
      merged.abbr = g.label == only.id ? only.abbr : merged.abbr;
      merged.anchor = only.anchor;
    } else {
      merged.anchor = mean.norm() < 1e-12 ? d.region(*g.members.begin()).anchor
                                          : geo::from_unit_vector(mean);
    }
    regions.push_back(std::move(merged));
  }

  auto map_id = [&](const std::string& id) -> const std::string& {
    auto it = owner.find(id);
    return it == owner.end() ? id : it->second;
  };
  std::map<std::pair<std::string, std::string>, double> sums;
  for (const Flow& f : d.flows()) sums[{map_id(f.origin), map_id(f.dest)}] += f.magnitude;
  std::vector<Flow> flows;
  bool self = d.options().allow_self_flows;
  for (const auto& [key, m] : sums) {
    flows.push_back(Flow{key.first, key.second, m});
    self = self || key.first == key.second;
  }
  return FlowDataset(std::move(regions), std::move(flows), DatasetOptions{self});
}

std::pair<double, double> parse_range(std::string_view spec) {
  const auto parts = split(spec, ':');
  double lo = 0.0;
  double hi = 0.0;
  if (parts.size() != 2 || !parse_double(parts[0], lo) || !parse_double(parts[1], hi)) {
    throw Error(ErrorCode::kInvalidRange, "range must look like lo:hi", std::string(spec));
  }
  if (!(lo <= hi)) throw Error(ErrorCode::kInvalidRange, "range requires lo <= hi", std::string(spec));
  return {lo, hi};
}

std::vector<RegionGroup> parse_groups(std::string_view spec) {
  std::vector<RegionGroup> groups;
  for (std::string_view item : split(spec, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "group must look like LABEL=id1,id2", std::string(item));
    }
    RegionGroup g;
    g.label = std::string(trim(item.substr(0, eq)));
    for (std::string_view m : split(item.substr(eq + 1), ',')) {
      m = trim(m);
      if (!m.empty()) g.members.insert(std::string(m));
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace odflow::oddata
