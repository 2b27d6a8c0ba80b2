#pragma once

// Resolution-independent scene vocabulary shared by the layout documents,
// the SVG renderer and the web UI. Coordinates are canvas pixels, y down.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "odflow/planar.hpp"

namespace odflow::scene {

using planar::Vec2;

inline constexpr int kSchemaVersion = 1;

enum class Kind {
  kPath,        // polygon(s) or polyline(s)
  kCircle,
  kHalfCircle,  // side -1: left half, +1: right half
  kCell,        // matrix / grid cell polygon carrying a flow value
  kLeader,      // leader polyline
  kFlow,        // straight flow segment with a direction gradient
  kLabel,
};

std::string to_string(Kind kind);

struct Primitive {
  Kind kind = Kind::kPath;
  std::string id;    // unique within a document when set
  std::string role;  // "region", "graticule", "separator", "legend", ...

  std::vector<std::vector<Vec2>> paths;
  bool closed = false;

  Vec2 center;
  double radius = 0.0;
  int side = 0;

  std::string text;
  double font_size = 0.0;
  std::string text_anchor = "start";

  std::string fill = "none";
  std::string stroke = "none";
  double stroke_width = 0.0;
  double opacity = 1.0;
  std::string gradient_from;  // kFlow: colour at the origin end
  std::string gradient_to;    // kFlow: colour at the destination end

  std::string region;
  std::string origin;
  std::string dest;
  std::optional<double> value;
  int colour_index = -1;
};

struct Scene {
  std::string id;
  std::vector<Primitive> items;
};

struct Canvas {
  double width = 1200.0;
  double height = 900.0;
};

// Rounds to 1e-6 and clears negative zero so serialized documents are
// byte-stable.
double canonical(double v);

nlohmann::json to_json(const Primitive& p);
nlohmann::json to_json(const Scene& s);

// Primitive helpers.
Primitive polygon(std::string id, std::string role, std::vector<std::vector<Vec2>> rings, std::string fill,
                  std::string stroke, double stroke_width);
Primitive polyline(std::string id, std::string role, std::vector<Vec2> points, std::string stroke,
                   double stroke_width);
Primitive circle(std::string id, std::string role, Vec2 center, double radius, std::string fill);
Primitive label(std::string id, std::string role, Vec2 at, std::string text, double size, std::string fill,
                std::string anchor = "start");

}  // namespace odflow::scene
