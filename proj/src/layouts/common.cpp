#include "common.hpp"

#include <cmath>
#include <cstdio>

#include "odflow/error.hpp"

namespace odflow::layouts::detail {

std::string format_number(double v) {
  char buf[32];
  if (std::abs(v) < 1e15 && v == std::floor(v)) {
    std::snprintf(buf, sizeof buf, "%.0f", v == 0.0 ? 0.0 : v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

void colour_key(std::vector<scene::Primitive>& out, const ColourScale& scale, Vec2 top_left, double width,
                double height) {
  constexpr int kSwatches = 32;
  const double step = width / kSwatches;
  for (int i = 0; i < kSwatches; ++i) {
    const double x = top_left.x + i * step;
    const int index = static_cast<int>(std::lround(i * (ColourScale::kLevels - 1) / double(kSwatches - 1)));
    scene::Primitive p = scene::polygon(
        "legend:swatch:" + std::to_string(i), "legend",
        {{{x, top_left.y}, {x + step, top_left.y}, {x + step, top_left.y + height}, {x, top_left.y + height}}},
        ColourScale::at_index(index).hex(), "none", 0.0);
    p.colour_index = index;
    out.push_back(std::move(p));
  }
  out.push_back(scene::label("legend:title", "legend", {top_left.x, top_left.y - 4.0},
                             "Flow magnitude (" + ColourScale::name() + ")", 10.0, "#333333"));
  const double below = top_left.y + height + 11.0;
  out.push_back(scene::label("legend:min", "legend", {top_left.x, below}, format_number(scale.domain_min()), 9.0,
                             "#333333"));
  out.push_back(scene::label("legend:max", "legend", {top_left.x + width, below},
                             format_number(scale.domain_max()), 9.0, "#333333", "end"));
}

scene::Primitive cell(std::string id, std::vector<Vec2> polygon, const ColourScale& scale, double value,
                      std::string origin, std::string dest) {
  scene::Primitive p;
  p.kind = scene::Kind::kCell;
  p.id = std::move(id);
  p.role = "cell";
  p.paths.push_back(std::move(polygon));
  p.closed = true;
  p.colour_index = scale.index(value);
  p.fill = ColourScale::at_index(p.colour_index).hex();
  p.value = value;
  p.origin = std::move(origin);
  p.dest = std::move(dest);
  return p;
}

nlohmann::json colour_json(const ColourScale& scale) {
  nlohmann::json stops = nlohmann::json::array();
  for (const Rgb& c : ColourScale::stops()) stops.push_back(c.hex());
  return {{"name", ColourScale::name()},
          {"domain", {scene::canonical(scale.domain_min()), scene::canonical(scale.domain_max())}},
          {"levels", ColourScale::kLevels},
          {"stops", stops}};
}

nlohmann::json scenes_json(const std::vector<scene::Scene>& scenes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : scenes) out.push_back(scene::to_json(s));
  return out;
}

const scene::Scene& find_scene(const std::vector<scene::Scene>& scenes, std::string_view id) {
  for (const auto& s : scenes) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "no such scene", std::string(id));
}

}  // namespace odflow::layouts::detail
