#include <algorithm>
#include <cmath>
#include <set>

#include "common.hpp"
#include "json.hpp"
#include "odflow/error.hpp"
#include "odflow/layouts.hpp"

namespace odflow::layouts {

namespace {

int grid_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) throw Error(ErrorCode::kParseError, "grid coordinates must be integers", key);
  return v.get<int>();
}

std::pair<int, int> grid_pair(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::kParseError, "expected [col, row]", key);
  return {grid_int(v[0], key), grid_int(v[1], key)};
}

}  // namespace

GridAssignment parse_grid(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "grid assignment is not valid JSON", e.what());
  }
  if (!j.is_object() || !j.contains("gridSize")) {
    throw Error(ErrorCode::kParseError, "grid assignment needs an object with gridSize");
  }
  GridAssignment g;
  std::tie(g.width, g.height) = grid_pair(j["gridSize"], "gridSize");
  if (g.width <= 0 || g.height <= 0) throw Error(ErrorCode::kBadGridAssignment, "grid size must be positive");
  std::map<std::pair<int, int>, std::string> taken;
  for (const auto& [key, value] : j.items()) {
    if (key == "gridSize") continue;
    const auto pos = grid_pair(value, key);
    if (pos.first < 0 || pos.first >= g.width || pos.second < 0 || pos.second >= g.height) {
      throw Error(ErrorCode::kBadGridAssignment, "grid cell out of range", key);
    }
    const auto [it, fresh] = taken.emplace(pos, key);
    if (!fresh) throw Error(ErrorCode::kBadGridAssignment, "two regions share a grid cell", it->second + "," + key);
    g.cells[key] = pos;
  }
  return g;
}

const Scene& ODMapsLayout::scene(std::string_view id) const { return detail::find_scene(scenes, id); }

nlohmann::json ODMapsLayout::json() const {
  nlohmann::json cells = nlohmann::json::object();
  for (const auto& [id, pos] : grid.cells) cells[id] = {pos.first, pos.second};
  return {{"schemaVersion", scene::kSchemaVersion},
          {"kind", "odmaps"},
          {"canvas", {{"width", scene::canonical(canvas.width)}, {"height", scene::canonical(canvas.height)}}},
          {"grid", {{"gridSize", {grid.width, grid.height}}, {"cells", cells}}},
          {"outerCell", scene::canonical(outer_cell)},
          {"innerCell", scene::canonical(inner_cell)},
          {"colourScale", detail::colour_json(colour)},
          {"scenes", detail::scenes_json(scenes)}};
}

std::string ODMapsLayout::to_json() const { return json().dump(); }

ODMapsLayout layout_odmaps(const FlowDataset& d, const GridAssignment& grid, Canvas canvas,
                           const ODMapsParams& params) {
  if (grid.width <= 0 || grid.height <= 0) throw Error(ErrorCode::kBadGridAssignment, "empty grid");
  for (const auto& r : d.regions()) {
    if (!grid.cells.count(r.id)) throw Error(ErrorCode::kBadGridAssignment, "region has no grid cell", r.id);
  }
  std::set<std::pair<int, int>> used;
  for (const auto& r : d.regions()) {
    const auto pos = grid.cells.at(r.id);
    if (pos.first < 0 || pos.first >= grid.width || pos.second < 0 || pos.second >= grid.height) {
      throw Error(ErrorCode::kBadGridAssignment, "grid cell out of range", r.id);
    }
    if (!used.insert(pos).second) throw Error(ErrorCode::kBadGridAssignment, "two regions share a grid cell", r.id);
  }

  ODMapsLayout out;
  out.canvas = canvas;
  out.grid = grid;
  out.colour = ColourScale(d.min_magnitude(), d.max_magnitude());

  constexpr double kTitle = 18.0;
  const double avail_w = (canvas.width - 2 * params.margin_px - params.gap_px) / 2.0;
  const double avail_h = canvas.height - 2 * params.margin_px - params.legend_px - kTitle;
  out.outer_cell = std::min(avail_w / grid.width, avail_h / grid.height);
  if (!(out.outer_cell > 0.0)) throw Error(ErrorCode::kInfeasibleGeometry, "canvas too small for the grid");
  const double pad = 0.06 * out.outer_cell;
  out.inner_cell = (out.outer_cell - 2 * pad) / std::max(grid.width, grid.height);
  const double inner_w = out.inner_cell * grid.width, inner_h = out.inner_cell * grid.height;
  const double top = params.margin_px + kTitle;
  const double used_w = out.outer_cell * grid.width;

  auto square = [](Vec2 at, double size) {
    return std::vector<Vec2>{at, at + Vec2{size, 0.0}, at + Vec2{size, size}, at + Vec2{0.0, size}};
  };

  for (int m = 0; m < 2; ++m) {
    const bool od = m == 0;
    const std::string tag = od ? "od" : "do";
    const double left = params.margin_px + m * (avail_w + params.gap_px) + (avail_w - used_w) / 2.0;
    Scene s;
    s.id = od ? "od-map" : "do-map";
    s.items.push_back(scene::label("title:" + tag, "title", {left, top - 6.0},
                                   od ? "OD map (outflows by origin)" : "DO map (inflows by destination)", 12.0,
                                   "#252525"));
    double max_total = 0.0;
    for (const auto& r : d.regions()) max_total = std::max(max_total, od ? d.total_out(r.id) : d.total_in(r.id));

    auto outer_at = [&](const std::string& id) {
      const auto [c, r] = grid.cells.at(id);
      return Vec2{left + c * out.outer_cell, top + r * out.outer_cell};
    };
    auto inner_at = [&](Vec2 outer, const std::string& id) {
      const auto [c, r] = grid.cells.at(id);
      const Vec2 origin = outer + Vec2{(out.outer_cell - inner_w) / 2.0, (out.outer_cell - inner_h) / 2.0};
      return origin + Vec2{c * out.inner_cell, r * out.inner_cell};
    };

    for (const auto& r : d.regions()) {
      Primitive p = scene::polygon("outer:" + tag + ":" + r.id, "outer-cell", {square(outer_at(r.id), out.outer_cell)},
                                   "#ffffff", "#bdbdbd", 0.8);
      p.region = r.id;
      s.items.push_back(std::move(p));
    }
    // Flows sorted by (outer, inner) id so the document order is stable.
    std::vector<const oddata::Flow*> flows;
    for (const auto& f : d.flows()) flows.push_back(&f);
    std::sort(flows.begin(), flows.end(), [&](const oddata::Flow* a, const oddata::Flow* b) {
      return od ? std::tie(a->origin, a->dest) < std::tie(b->origin, b->dest)
                : std::tie(a->dest, a->origin) < std::tie(b->dest, b->origin);
    });
    for (const oddata::Flow* f : flows) {
      const std::string& outer = od ? f->origin : f->dest;
      const std::string& inner = od ? f->dest : f->origin;
      s.items.push_back(detail::cell(tag + "cell:" + outer + ":" + inner,
                                     square(inner_at(outer_at(outer), inner), out.inner_cell), out.colour,
                                     f->magnitude, f->origin, f->dest));
    }
    for (const auto& r : d.regions()) {
      const double total = od ? d.total_out(r.id) : d.total_in(r.id);
      if (total <= 0.0 || max_total <= 0.0) continue;
      const Vec2 home = inner_at(outer_at(r.id), r.id) + Vec2{out.inner_cell / 2.0, out.inner_cell / 2.0};
      Primitive c = scene::circle("circle:" + tag + ":" + r.id, "total", home,
                                  0.75 * out.inner_cell * std::sqrt(total / max_total), "none");
      c.stroke = "#000000";
      c.stroke_width = 1.0;
      c.region = r.id;
      c.value = total;
      s.items.push_back(std::move(c));
    }
    for (const auto& r : d.regions()) {
      Primitive l = scene::label("label:" + tag + ":" + r.id, "region-label", outer_at(r.id) + Vec2{2.0, 9.0}, r.abbr,
                                 std::clamp(out.outer_cell / 5.0, 6.0, 10.0), "#525252");
      l.region = r.id;
      s.items.push_back(std::move(l));
    }
    out.scenes.push_back(std::move(s));
  }

  Scene legend;
  legend.id = "legend";
  const double bar = std::min(240.0, canvas.width / 3.0);
  detail::colour_key(legend.items, out.colour,
                     {(canvas.width - bar) / 2.0, canvas.height - params.margin_px - params.legend_px + 24.0}, bar,
                     10.0);
  out.scenes.push_back(std::move(legend));
  return out;
}

}  // namespace odflow::layouts
