#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "odflow/error.hpp"
#include "odflow/layouts.hpp"

namespace odflow::layouts {

double flow_width(double magnitude, double lo, double hi, double w_min, double w_max) {
  if (!(hi > lo)) return w_max;
  const double t = std::clamp((magnitude - lo) / (hi - lo), 0.0, 1.0);
  return w_min + t * (w_max - w_min);
}

const Scene& FlowMapLayout::scene(std::string_view id) const { return detail::find_scene(scenes, id); }

nlohmann::json FlowMapLayout::json() const {
  return {{"schemaVersion", scene::kSchemaVersion},
          {"kind", "flowmap"},
          {"canvas", {{"width", scene::canonical(canvas.width)}, {"height", scene::canonical(canvas.height)}}},
          {"widthDomain", {scene::canonical(min_magnitude), scene::canonical(max_magnitude)}},
          {"maxTotal", scene::canonical(max_total)},
          {"scenes", detail::scenes_json(scenes)}};
}

std::string FlowMapLayout::to_json() const { return json().dump(); }

FlowMapLayout layout_flowmap(const FlowDataset& d, Canvas canvas, const FlowMapParams& params) {
  if (!(params.min_width_px > 0.0) || params.max_width_px < params.min_width_px || !(params.max_radius_px >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid flow map parameters");
  }
  FlowMapLayout out;
  out.canvas = canvas;
  const MapProjection proj = project_regions(d);

  const double avail_w = canvas.width - 2 * params.margin_px;
  const double avail_h = canvas.height - 2 * params.margin_px - params.legend_px;
  const double scale = std::min(avail_w / proj.aspect, avail_h);
  if (!(scale > 0.0)) throw Error(ErrorCode::kInfeasibleGeometry, "canvas too small for the margins");
  const Vec2 offset{(canvas.width - proj.aspect * scale) / 2.0, params.margin_px + (avail_h + scale) / 2.0};
  auto px = [&](Vec2 v) { return Vec2{v.x * scale + offset.x, -v.y * scale + offset.y}; };

  Scene map;
  map.id = "map";
  for (const ProjectedRegion& pr : proj.regions) {
    std::vector<std::vector<Vec2>> rings;
    for (const auto& poly : pr.polygons) {
      for (const auto& ring : poly) {
        std::vector<Vec2> pts;
        pts.reserve(ring.size());
        for (const Vec2& v : ring) pts.push_back(px(v));
        rings.push_back(std::move(pts));
      }
    }
    Primitive p = scene::polygon("region:" + pr.id, "region", std::move(rings), "#f0f0f0", "#969696", 0.6);
    p.region = pr.id;
    map.items.push_back(std::move(p));
  }
  out.scenes.push_back(std::move(map));

  // Self-flows have no extent on a flow map; they only count in the totals.
  std::vector<const oddata::Flow*> flows;
  for (const auto& f : d.flows()) {
    if (f.origin != f.dest) flows.push_back(&f);
  }
  std::sort(flows.begin(), flows.end(), [](const oddata::Flow* a, const oddata::Flow* b) {
    return std::tie(a->magnitude, a->origin, a->dest) < std::tie(b->magnitude, b->origin, b->dest);
  });
  if (!flows.empty()) {
    out.min_magnitude = flows.front()->magnitude;
    out.max_magnitude = flows.back()->magnitude;
  }
  Scene lines;
  lines.id = "flows";
  for (const oddata::Flow* f : flows) {
    Primitive p = scene::polyline(
        "flow:" + f->origin + ":" + f->dest, "flow",
        {px(proj.region(f->origin).anchor), px(proj.region(f->dest).anchor)}, params.origin_colour,
        flow_width(f->magnitude, out.min_magnitude, out.max_magnitude, params.min_width_px, params.max_width_px));
    p.kind = scene::Kind::kFlow;
    p.gradient_from = params.origin_colour;
    p.gradient_to = params.dest_colour;
    p.opacity = 0.85;
    p.origin = f->origin;
    p.dest = f->dest;
    p.value = f->magnitude;
    lines.items.push_back(std::move(p));
  }
  out.scenes.push_back(std::move(lines));

  Scene totals;
  totals.id = "totals";
  for (const auto& t : d.totals()) out.max_total = std::max({out.max_total, t.total_in, t.total_out});
  for (const auto& t : d.totals()) {
    if (out.max_total <= 0.0) break;
    const Vec2 at = px(proj.region(t.id).anchor);
    for (int side : {-1, 1}) {
      const double total = side < 0 ? t.total_in : t.total_out;
      if (total <= 0.0) continue;
      Primitive c = scene::circle((side < 0 ? "in:" : "out:") + t.id, side < 0 ? "total-in" : "total-out", at,
                                  params.max_radius_px * std::sqrt(total / out.max_total),
                                  side < 0 ? params.in_colour : params.out_colour);
      c.kind = scene::Kind::kHalfCircle;
      c.side = side;
      c.region = t.id;
      c.value = total;
      totals.items.push_back(std::move(c));
    }
  }
  for (const auto& r : d.regions()) {
    // Above the taller of the two half circles.
    const double total = std::max(d.total_in(r.id), d.total_out(r.id));
    const double lift = out.max_total > 0.0 ? params.max_radius_px * std::sqrt(total / out.max_total) : 0.0;
    Primitive l = scene::label("label:" + r.id, "region-label", px(proj.region(r.id).anchor) + Vec2{0.0, -lift - 3.0}, r.abbr,
                               10.0, "#252525", "middle");
    l.region = r.id;
    totals.items.push_back(std::move(l));
  }
  out.scenes.push_back(std::move(totals));

  // Legend: thinnest and thickest line, then the two circle halves.
  Scene legend;
  legend.id = "legend";
  const double y = canvas.height - params.margin_px - params.legend_px / 2.0;
  const double x = params.margin_px;
  for (int i = 0; i < 2 && !flows.empty(); ++i) {
    const double v = i == 0 ? out.min_magnitude : out.max_magnitude;
    const double ly = y + i * 20.0 - 10.0;
    Primitive p = scene::polyline(i == 0 ? "legend:width:min" : "legend:width:max", "legend",
                                  {{x, ly}, {x + 60.0, ly}}, params.origin_colour,
                                  flow_width(v, out.min_magnitude, out.max_magnitude, params.min_width_px,
                                             params.max_width_px));
    legend.items.push_back(std::move(p));
    legend.items.push_back(scene::label(i == 0 ? "legend:width:min:text" : "legend:width:max:text", "legend",
                                        {x + 68.0, ly + 3.0}, detail::format_number(v), 9.0, "#333333"));
  }
  if (out.max_total > 0.0) {
    const Vec2 c{x + 200.0, y};
    for (int side : {-1, 1}) {
      Primitive h = scene::circle(side < 0 ? "legend:in" : "legend:out", "legend", c, params.max_radius_px,
                                  side < 0 ? params.in_colour : params.out_colour);
      h.kind = scene::Kind::kHalfCircle;
      h.side = side;
      legend.items.push_back(std::move(h));
    }
    legend.items.push_back(scene::label("legend:in:text", "legend", c + Vec2{-params.max_radius_px - 4.0, 3.0},
                                        "inflow", 9.0, "#333333", "end"));
    legend.items.push_back(scene::label("legend:out:text", "legend", c + Vec2{params.max_radius_px + 4.0, 3.0},
                                        "outflow", 9.0, "#333333"));
    legend.items.push_back(scene::label("legend:total:text", "legend", c + Vec2{0.0, params.max_radius_px + 12.0},
                                        detail::format_number(out.max_total), 9.0, "#333333", "middle"));
  }
  out.scenes.push_back(std::move(legend));
  return out;
}

}  // namespace odflow::layouts
