#include <algorithm>
#include <set>

#include "common.hpp"
#include "odflow/error.hpp"
#include "odflow/layouts.hpp"

namespace odflow::layouts {

namespace {

const char* kEmphasis = "#e6550d";

const Primitive* find_item(const Scene& s, const std::string& id) {
  for (const auto& p : s.items) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::vector<std::string> sorted(const std::set<std::string>& s) { return {s.begin(), s.end()}; }

}  // namespace

nlohmann::json HighlightOverlay::json() const {
  return {{"schemaVersion", scene::kSchemaVersion},
          {"leaders", leaders},
          {"rows", rows},
          {"columns", columns},
          {"regions", regions},
          {"cells", cells},
          {"scene", scene::to_json(scene)}};
}

HighlightOverlay highlight(const MapTrixLayout& layout, const Selection& selection) {
  std::set<std::string> leaders, rows, columns, regions, cells;
  std::set<std::size_t> row_idx, col_idx;
  std::set<std::pair<std::size_t, std::size_t>> cell_idx;
  for (const auto& id : selection.regions) {
    const std::size_t i = layout.index_of(id);
    leaders.insert("leader:origin:" + id);
    leaders.insert("leader:dest:" + id);
    rows.insert("row:" + id);
    columns.insert("col:" + id);
    regions.insert("region:origin:" + id);
    regions.insert("region:dest:" + id);
    row_idx.insert(i);
    col_idx.insert(i);
  }
  for (const auto& [o, d] : selection.cells) {
    cell_idx.insert({layout.index_of(o), layout.index_of(d)});
    leaders.insert("leader:origin:" + o);
    leaders.insert("leader:dest:" + d);
    cells.insert("cell:" + o + ":" + d);
  }

  HighlightOverlay out;
  out.leaders = sorted(leaders);
  out.rows = sorted(rows);
  out.columns = sorted(columns);
  out.regions = sorted(regions);
  out.cells = sorted(cells);
  out.scene.id = "highlight";

  auto to_px = [&](std::vector<Vec2> poly) {
    for (auto& v : poly) v = layout.to_px(v);
    return poly;
  };
  for (std::size_t i : row_idx) {
    Primitive p = scene::polygon("hl:row:" + layout.ordering[i], "highlight-row", {to_px(layout.row_stripe(i))},
                                 kEmphasis, "none", 0.0);
    p.opacity = 0.15;
    p.region = layout.ordering[i];
    out.scene.items.push_back(std::move(p));
  }
  for (std::size_t i : col_idx) {
    Primitive p = scene::polygon("hl:col:" + layout.ordering[i], "highlight-column", {to_px(layout.column_stripe(i))},
                                 kEmphasis, "none", 0.0);
    p.opacity = 0.15;
    p.region = layout.ordering[i];
    out.scene.items.push_back(std::move(p));
  }
  for (const auto& [o, d] : cell_idx) {
    Primitive p = scene::polygon("hl:cell:" + layout.ordering[o] + ":" + layout.ordering[d], "highlight-cell",
                                 {to_px(layout.cell_polygon(o, d))}, "none", kEmphasis, 2.0);
    p.origin = layout.ordering[o];
    p.dest = layout.ordering[d];
    out.scene.items.push_back(std::move(p));
  }
  // Copies of the emphasized base elements, restyled.
  const std::pair<const char*, std::set<std::string>*> groups[] = {{"origin-map", &regions}, {"dest-map", &regions},
                                                                    {"leaders", &leaders}};
  for (const auto& [scene_id, ids] : groups) {
    const Scene& s = layout.scene(scene_id);
    for (const auto& id : *ids) {
      const Primitive* base = find_item(s, id);
      if (!base) continue;
      Primitive p = *base;
      p.id = "hl:" + id;
      p.role = "highlight";
      p.stroke = kEmphasis;
      p.stroke_width = std::max(2.0, base->stroke_width * 2.0);
      if (p.kind == scene::Kind::kPath) p.fill = "none";
      out.scene.items.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace odflow::layouts
