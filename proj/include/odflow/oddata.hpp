#pragma once

// OD flow datasets: loading (flow CSV + region GeoJSON), validation,
// totals, magnitude filtering and regional aggregation. Datasets are
// immutable values; every transformation returns a new dataset.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "odflow/geo.hpp"

namespace odflow::oddata {

using geo::GeoPoint;

using GeoRing = std::vector<GeoPoint>;      // closed: front() == back()
using GeoPolygon = std::vector<GeoRing>;    // outer ring followed by holes

struct Region {
  std::string id;
  std::string name;
  std::string abbr;  // at most 4 characters
  std::vector<GeoPolygon> boundary;
  GeoPoint anchor;   // initial connection site

  // Index of the polygon with the largest planar (lon/lat) area.
  std::size_t largest_polygon() const;
};

struct Flow {
  std::string origin;
  std::string dest;
  double magnitude = 0.0;

  bool operator==(const Flow&) const = default;
};

struct RegionTotals {
  std::string id;
  double total_in = 0.0;
  double total_out = 0.0;

  bool operator==(const RegionTotals&) const = default;
};

struct DatasetOptions {
  bool allow_self_flows = false;
};

class FlowDataset {
 public:
  FlowDataset() = default;
  // Validates ids, references, duplicates and magnitudes; throws Error.
  FlowDataset(std::vector<Region> regions, std::vector<Flow> flows, DatasetOptions options = {});

  const std::vector<Region>& regions() const { return regions_; }
  const std::vector<Flow>& flows() const { return flows_; }
  const DatasetOptions& options() const { return options_; }

  const Region* find_region(std::string_view id) const;
  const Region& region(std::string_view id) const;  // throws UnknownRegion

  // A region is active while at least one flow starts or ends there.
  bool is_active(std::string_view id) const;
  std::vector<std::string> active_region_ids() const;  // sorted by id

  double total_in(std::string_view id) const;
  double total_out(std::string_view id) const;
  std::vector<RegionTotals> totals() const;  // sorted by id

  std::vector<Flow> self_flows() const;
  double min_magnitude() const;
  double max_magnitude() const;

 private:
  std::vector<Region> regions_;
  std::vector<Flow> flows_;
  DatasetOptions options_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, RegionTotals, std::less<>> totals_;
  std::set<std::string, std::less<>> active_;
};

// Parses a flow CSV (`origin,dest,magnitude`, LF or CRLF) and a GeoJSON
// FeatureCollection of regions. Errors carry the line or feature index.
FlowDataset load_dataset(std::istream& flows_csv, std::istream& regions_geojson,
                         DatasetOptions options = {});
FlowDataset load_dataset(std::string_view flows_csv, std::string_view regions_geojson,
                         DatasetOptions options = {});
FlowDataset load_dataset_files(const std::filesystem::path& flows_csv,
                               const std::filesystem::path& regions_geojson,
                               DatasetOptions options = {});

std::vector<Region> parse_regions(std::string_view geojson);
std::vector<Flow> parse_flows(std::string_view csv);

// Keeps flows with lo <= magnitude <= hi. Regions are all retained; the ones
// left without flows become inactive. Throws InvalidRange when lo > hi.
FlowDataset filter_by_magnitude(const FlowDataset& d, double lo, double hi);

struct RegionGroup {
  std::string label;
  std::set<std::string> members;
};

// Collapses each group into one synthetic region. Flows are summed between
// groups and ungrouped regions; flows inside a group become a self-flow of
// that group. Throws OverlappingGroups or UnknownRegion.
FlowDataset aggregate_regions(const FlowDataset& d, const std::vector<RegionGroup>& groups);

// "lo:hi" -> {lo, hi}
std::pair<double, double> parse_range(std::string_view spec);
// "A=r1,r2;B=r3" -> groups
std::vector<RegionGroup> parse_groups(std::string_view spec);

// Default abbreviation derived from an id: first four characters, upper case.
std::string derive_abbr(std::string_view id);

}  // namespace odflow::oddata
