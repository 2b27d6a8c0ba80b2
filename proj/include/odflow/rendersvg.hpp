#pragma once

// Deterministic SVG 1.1 serialization of the layout documents. Numbers carry
// at most three decimals (trailing zeros trimmed), attributes are written in
// a fixed order, and every layout element id is emitted exactly once.

#include <string>
#include <vector>

#include "odflow/layouts.hpp"

namespace odflow::rendersvg {

struct SvgOptions {
  std::string font_family = "sans-serif";
  std::string background = "#ffffff";
  planar::Vec2 legend_offset;  // moves the legend group
};

// Fixed three-decimal formatting, locale independent.
std::string format(double v);

std::string render_scenes(const scene::Canvas& canvas, const std::vector<scene::Scene>& scenes,
                          const SvgOptions& options = {});

// The highlight group is emitted only for a non-empty overlay.
std::string render_maptrix(const layouts::MapTrixLayout& layout, const SvgOptions& options = {},
                           const layouts::HighlightOverlay* overlay = nullptr);
std::string render_odmaps(const layouts::ODMapsLayout& layout, const SvgOptions& options = {});
std::string render_flowmap(const layouts::FlowMapLayout& layout, const SvgOptions& options = {});

}  // namespace odflow::rendersvg
