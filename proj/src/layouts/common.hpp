#pragma once

// Helpers shared by the layout builders.

#include <string>
#include <vector>

#include "odflow/colour.hpp"
#include "odflow/scene.hpp"

namespace odflow::layouts::detail {

using planar::Vec2;

// Shortest stable text for a legend value: integers without a fraction,
// everything else with six significant digits.
std::string format_number(double v);

// Horizontal colour key: 32 swatches in [x, x + width] x [y, y + height]
// (pixels), the scale name above and the domain endpoints below.
void colour_key(std::vector<scene::Primitive>& out, const ColourScale& scale, Vec2 top_left, double width,
                double height);

scene::Primitive cell(std::string id, std::vector<Vec2> polygon, const ColourScale& scale, double value,
                      std::string origin, std::string dest);

nlohmann::json colour_json(const ColourScale& scale);
nlohmann::json scenes_json(const std::vector<scene::Scene>& scenes);
const scene::Scene& find_scene(const std::vector<scene::Scene>& scenes, std::string_view id);

}  // namespace odflow::layouts::detail
