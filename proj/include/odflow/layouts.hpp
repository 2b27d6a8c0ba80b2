#pragma once

// The three 2D layout documents: MapTrix (origin map, destination map and a
// 45-degree rotated OD matrix linked by crossing-free leaders), OD Maps
// (nested grid small multiples) and the straight-line flow map.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "odflow/colour.hpp"
#include "odflow/geo.hpp"
#include "odflow/leaderlayout.hpp"
#include "odflow/oddata.hpp"
#include "odflow/qprefine.hpp"
#include "odflow/scene.hpp"

namespace odflow::layouts {

using leaderlayout::FreeRect;
using leaderlayout::LeaderPlan;
using oddata::FlowDataset;
using planar::Rect;
using planar::Ring;
using planar::Vec2;
using scene::Canvas;
using scene::Primitive;
using scene::Scene;

// ---------------------------------------------------------------------------
// Map projection shared by MapTrix and the flow map.

struct ProjectedRegion {
  std::string id;
  std::vector<std::vector<Ring>> polygons;  // map units, y up
  std::size_t largest = 0;
  Vec2 anchor;
};

// Regions rotated so the mean anchor sits at the projection centre, projected
// with Hammer and normalized to x in [0, aspect], y in [0, 1].
struct MapProjection {
  geo::Rotation3 rotation;
  double aspect = 1.0;
  std::vector<ProjectedRegion> regions;  // dataset order

  const ProjectedRegion& region(std::string_view id) const;
};

MapProjection project_regions(const FlowDataset& d);

// ---------------------------------------------------------------------------
// MapTrix

struct MapTrixParams {
  double k = 1.0;                           // leader diagonal slope
  double w = 1.0;                           // PSep weight
  std::optional<double> target_separation;  // D in map units
  bool refine = true;                       // run the QP refinement
  double leader_stroke_px = 1.0;
  std::optional<double> clearance_px;  // d_b; default 0.75 * stroke * 4
  double min_port_pitch_px = 2.0;
  double margin_px = 24.0;
  double max_circle_px = 14.0;
  double label_min_px = 9.0;
  double label_max_px = 14.0;
};

struct LabelStyle {
  std::string id;
  int rank = 0;  // 0 = largest total
  double font_size = 0.0;
  std::string fill;
};

struct QpStats {
  double initial_objective = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct MapTrixLayout {
  Canvas canvas;
  std::vector<std::string> ordering;  // rows and columns, top to bottom
  LeaderPlan origin_leaders;          // map units, after refinement
  LeaderPlan dest_leaders;
  std::vector<FreeRect> origin_rects;
  std::vector<FreeRect> dest_rects;
  QpStats origin_qp;
  QpStats dest_qp;
  ColourScale colour;
  std::vector<LabelStyle> origin_labels;  // ordering order
  std::vector<LabelStyle> dest_labels;
  std::vector<Scene> scenes;  // origin-map, dest-map, matrix, leaders, legend

  // Map units to canvas pixels: (x * scale + tx, -y * scale + ty).
  double scale = 1.0;
  Vec2 translate;
  double port_x = 0.0;  // P, the left corner of the matrix diamond
  double map_width = 1.0;

  Vec2 to_px(Vec2 p) const { return {p.x * scale + translate.x, -p.y * scale + translate.y}; }
  std::size_t size() const { return ordering.size(); }
  std::size_t index_of(std::string_view id) const;  // throws UnknownSelection

  // Matrix geometry in map units.
  Vec2 cell_center(std::size_t o, std::size_t d) const;
  std::vector<Vec2> cell_polygon(std::size_t o, std::size_t d) const;
  std::vector<Vec2> row_stripe(std::size_t o) const;
  std::vector<Vec2> column_stripe(std::size_t d) const;

  const Scene& scene(std::string_view id) const;
  nlohmann::json json() const;
  std::string to_json() const;  // canonical
};

MapTrixLayout layout_maptrix(const FlowDataset& d, Canvas canvas, const MapTrixParams& params = {});

// ---------------------------------------------------------------------------
// OD Maps

struct GridAssignment {
  int width = 0;
  int height = 0;
  std::map<std::string, std::pair<int, int>> cells;  // id -> (col, row)
};

// `{regionId: [col, row], ..., "gridSize": [W, H]}`; throws ParseError or
// BadGridAssignment (out of range or two regions on one cell).
GridAssignment parse_grid(std::string_view json);

struct ODMapsParams {
  double margin_px = 24.0;
  double gap_px = 32.0;
  double legend_px = 56.0;
};

struct ODMapsLayout {
  Canvas canvas;
  GridAssignment grid;
  ColourScale colour;
  double outer_cell = 0.0;
  double inner_cell = 0.0;
  std::vector<Scene> scenes;  // od-map, do-map, legend

  const Scene& scene(std::string_view id) const;
  nlohmann::json json() const;
  std::string to_json() const;
};

// Throws BadGridAssignment when a dataset region has no grid cell.
ODMapsLayout layout_odmaps(const FlowDataset& d, const GridAssignment& grid, Canvas canvas,
                           const ODMapsParams& params = {});

// ---------------------------------------------------------------------------
// Flow map

struct FlowMapParams {
  double margin_px = 24.0;
  double legend_px = 56.0;
  double min_width_px = 1.0;
  double max_width_px = 12.0;
  double max_radius_px = 18.0;
  std::string origin_colour = "#08306b";  // dark end of the direction gradient
  std::string dest_colour = "#c6dbef";    // light end
  std::string in_colour = "#000000";
  std::string out_colour = "#969696";
};

struct FlowMapLayout {
  Canvas canvas;
  double min_magnitude = 0.0;
  double max_magnitude = 0.0;
  double max_total = 0.0;
  std::vector<Scene> scenes;  // map, flows, totals, legend

  const Scene& scene(std::string_view id) const;
  nlohmann::json json() const;
  std::string to_json() const;
};

// Width of a flow line: linear on [lo, hi] -> [w_min, w_max]; a degenerate
// domain maps to w_max.
double flow_width(double magnitude, double lo, double hi, double w_min, double w_max);

FlowMapLayout layout_flowmap(const FlowDataset& d, Canvas canvas, const FlowMapParams& params = {});

// ---------------------------------------------------------------------------
// Interaction

struct Selection {
  std::vector<std::string> regions;
  std::vector<std::pair<std::string, std::string>> cells;  // (origin, dest)
};

struct HighlightOverlay {
  std::vector<std::string> leaders;
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::string> regions;
  std::vector<std::string> cells;
  Scene scene;  // id "highlight"

  bool empty() const { return scene.items.empty(); }
  nlohmann::json json() const;
};

// Throws UnknownSelection for ids not in the layout.
HighlightOverlay highlight(const MapTrixLayout& layout, const Selection& selection);

struct RelayoutRequest {
  std::optional<std::pair<double, double>> filter;
  std::vector<oddata::RegionGroup> groups;
};

// Groups are applied first, then the magnitude filter.
FlowDataset apply_request(const FlowDataset& d, const RelayoutRequest& request);
MapTrixLayout relayout(const FlowDataset& d, const RelayoutRequest& request, Canvas canvas,
                       const MapTrixParams& params = {});

}  // namespace odflow::layouts
