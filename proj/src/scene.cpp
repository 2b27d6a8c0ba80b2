#include "odflow/scene.hpp"

#include <cmath>

namespace odflow::scene {

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::kPath: return "path";
    case Kind::kCircle: return "circle";
    case Kind::kHalfCircle: return "halfcircle";
    case Kind::kCell: return "cell";
    case Kind::kLeader: return "leader";
    case Kind::kFlow: return "flow";
    case Kind::kLabel: return "label";
  }
  return "path";
}

double canonical(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

namespace {

nlohmann::json point(Vec2 p) { return nlohmann::json::array({canonical(p.x), canonical(p.y)}); }

}  // namespace

nlohmann::json to_json(const Primitive& p) {
  nlohmann::json j;
  j["kind"] = to_string(p.kind);
  if (!p.id.empty()) j["id"] = p.id;
  if (!p.role.empty()) j["role"] = p.role;
  if (!p.paths.empty()) {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& path : p.paths) {
      nlohmann::json pts = nlohmann::json::array();
      for (const Vec2& v : path) pts.push_back(point(v));
      paths.push_back(pts);
    }
    j["paths"] = paths;
    j["closed"] = p.closed;
  }
  if (p.kind == Kind::kCircle || p.kind == Kind::kHalfCircle) {
    j["center"] = point(p.center);
    j["radius"] = canonical(p.radius);
    if (p.kind == Kind::kHalfCircle) j["side"] = p.side < 0 ? "left" : "right";
  }
  if (p.kind == Kind::kLabel) {
    j["at"] = point(p.center);
    j["text"] = p.text;
    j["fontSize"] = canonical(p.font_size);
    j["anchor"] = p.text_anchor;
  }
  j["fill"] = p.fill;
  j["stroke"] = p.stroke;
  if (p.stroke_width > 0.0) j["strokeWidth"] = canonical(p.stroke_width);
  if (p.opacity != 1.0) j["opacity"] = canonical(p.opacity);
  if (!p.gradient_from.empty()) j["gradient"] = {{"from", p.gradient_from}, {"to", p.gradient_to}};
  if (!p.region.empty()) j["region"] = p.region;
  if (!p.origin.empty()) j["origin"] = p.origin;
  if (!p.dest.empty()) j["dest"] = p.dest;
  if (p.value) j["value"] = canonical(*p.value);
  if (p.colour_index >= 0) j["colourIndex"] = p.colour_index;
  return j;
}

nlohmann::json to_json(const Scene& s) {
  nlohmann::json items = nlohmann::json::array();
  for (const Primitive& p : s.items) items.push_back(to_json(p));
  return {{"id", s.id}, {"items", items}};
}

Primitive polygon(std::string id, std::string role, std::vector<std::vector<Vec2>> rings, std::string fill,
                  std::string stroke, double stroke_width) {
  Primitive p;
  p.kind = Kind::kPath;
  p.id = std::move(id);
  p.role = std::move(role);
  p.paths = std::move(rings);
  p.closed = true;
  p.fill = std::move(fill);
  p.stroke = std::move(stroke);
  p.stroke_width = stroke_width;
  return p;
}

Primitive polyline(std::string id, std::string role, std::vector<Vec2> points, std::string stroke,
                   double stroke_width) {
  Primitive p;
  p.kind = Kind::kPath;
  p.id = std::move(id);
  p.role = std::move(role);
  p.paths.push_back(std::move(points));
  p.stroke = std::move(stroke);
  p.stroke_width = stroke_width;
  return p;
}

Primitive circle(std::string id, std::string role, Vec2 center, double radius, std::string fill) {
  Primitive p;
  p.kind = Kind::kCircle;
  p.id = std::move(id);
  p.role = std::move(role);
  p.center = center;
  p.radius = radius;
  p.fill = std::move(fill);
  return p;
}

Primitive label(std::string id, std::string role, Vec2 at, std::string text, double size, std::string fill,
                std::string anchor) {
  Primitive p;
  p.kind = Kind::kLabel;
  p.id = std::move(id);
  p.role = std::move(role);
  p.center = at;
  p.text = std::move(text);
  p.font_size = size;
  p.fill = std::move(fill);
  p.text_anchor = std::move(anchor);
  return p;
}

}  // namespace odflow::scene
