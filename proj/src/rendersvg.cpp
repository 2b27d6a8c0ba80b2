#include "odflow/rendersvg.hpp"

#include <charconv>
#include <cmath>

namespace odflow::rendersvg {

namespace {

using scene::Kind;
using scene::Primitive;
using scene::Scene;

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string gradient_id(const Primitive& p) { return "gradient:" + p.id; }

class Writer {
 public:
  explicit Writer(const SvgOptions& options) : options_(options) {}

  void attr(const char* name, const std::string& value) {
    out_ += ' ';
    out_ += name;
    out_ += "=\"";
    out_ += escape(value);
    out_ += '"';
  }
  void attr(const char* name, double value) { attr(name, format(value)); }

  void common(const Primitive& p) {
    if (!p.id.empty()) attr("id", p.id);
    if (!p.role.empty()) attr("class", p.role);
  }

  void paint(const Primitive& p, bool stroke_only = false) {
    attr("fill", stroke_only ? std::string("none") : p.fill);
    if (!p.gradient_from.empty() && !p.id.empty()) {
      attr("stroke", "url(#" + gradient_id(p) + ")");
    } else {
      attr("stroke", p.stroke);
    }
    if (p.stroke != "none" && p.stroke_width > 0.0) attr("stroke-width", p.stroke_width);
    if (p.opacity != 1.0) attr("opacity", p.opacity);
  }

  std::string path_data(const Primitive& p) const {
    std::string d;
    for (const auto& path : p.paths) {
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (!d.empty()) d += ' ';
        d += i == 0 ? 'M' : 'L';
        d += format(path[i].x);
        d += ' ';
        d += format(path[i].y);
      }
      if (p.closed && !path.empty()) d += " Z";
    }
    return d;
  }

  void close(const Primitive& p) {
    if (p.kind == Kind::kCell && p.value) {
      out_ += "><title>" + escape(p.origin + " to " + p.dest + ": " + layouts_value(*p.value)) + "</title></path>\n";
    } else {
      out_ += "/>\n";
    }
  }

  static std::string layouts_value(double v) {
    char buf[32];
    if (v == std::floor(v) && std::abs(v) < 1e15) {
      std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
      std::snprintf(buf, sizeof buf, "%.6g", v);
    }
    return buf;
  }

  void primitive(const Primitive& p) {
    out_ += "    ";
    switch (p.kind) {
      case Kind::kPath:
      case Kind::kCell:
      case Kind::kLeader:
      case Kind::kFlow: {
        out_ += "<path";
        common(p);
        attr("d", path_data(p));
        const bool line = !p.closed;
        paint(p, line);
        if (p.closed && p.paths.size() > 1) attr("fill-rule", "evenodd");
        if (line) {
          attr("stroke-linejoin", "round");
          attr("stroke-linecap", p.kind == Kind::kFlow ? "butt" : "round");
        }
        close(p);
        break;
      }
      case Kind::kCircle:
        out_ += "<circle";
        common(p);
        attr("cx", p.center.x);
        attr("cy", p.center.y);
        attr("r", p.radius);
        paint(p);
        out_ += "/>\n";
        break;
      case Kind::kHalfCircle: {
        // Left half: top to bottom counter-clockwise; right half: clockwise.
        const std::string r = format(p.radius);
        out_ += "<path";
        common(p);
        attr("d", "M" + format(p.center.x) + " " + format(p.center.y - p.radius) + " A" + r + " " + r + " 0 0 " +
                      (p.side < 0 ? "0 " : "1 ") + format(p.center.x) + " " + format(p.center.y + p.radius) + " Z");
        paint(p);
        out_ += "/>\n";
        break;
      }
      case Kind::kLabel:
        out_ += "<text";
        common(p);
        attr("x", p.center.x);
        attr("y", p.center.y);
        attr("font-size", p.font_size);
        if (p.text_anchor != "start") attr("text-anchor", p.text_anchor);
        attr("fill", p.fill);
        out_ += ">" + escape(p.text) + "</text>\n";
        break;
    }
  }

  void gradients(const std::vector<Scene>& scenes) {
    std::string defs;
    for (const Scene& s : scenes) {
      for (const Primitive& p : s.items) {
        if (p.gradient_from.empty() || p.id.empty() || p.paths.empty() || p.paths[0].size() < 2) continue;
        const auto& path = p.paths[0];
        defs += "    <linearGradient id=\"" + escape(gradient_id(p)) + "\" gradientUnits=\"userSpaceOnUse\" x1=\"" +
                format(path.front().x) + "\" y1=\"" + format(path.front().y) + "\" x2=\"" + format(path.back().x) +
                "\" y2=\"" + format(path.back().y) + "\">\n";
        defs += "      <stop offset=\"0\" stop-color=\"" + escape(p.gradient_from) + "\"/>\n";
        defs += "      <stop offset=\"1\" stop-color=\"" + escape(p.gradient_to) + "\"/>\n";
        defs += "    </linearGradient>\n";
      }
    }
    if (!defs.empty()) out_ += "  <defs>\n" + defs + "  </defs>\n";
  }

  void group(const Scene& s) {
    out_ += "  <g id=\"" + escape(s.id) + "\"";
    if (s.id == "legend" && (options_.legend_offset.x != 0.0 || options_.legend_offset.y != 0.0)) {
      out_ += " transform=\"translate(" + format(options_.legend_offset.x) + " " + format(options_.legend_offset.y) +
              ")\"";
    }
    out_ += ">\n";
    for (const Primitive& p : s.items) primitive(p);
    out_ += "  </g>\n";
  }

  std::string document(const scene::Canvas& canvas, const std::vector<Scene>& scenes) {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + format(canvas.width) +
            "\" height=\"" + format(canvas.height) + "\" viewBox=\"0 0 " + format(canvas.width) + " " +
            format(canvas.height) + "\" font-family=\"" + escape(options_.font_family) + "\">\n";
    gradients(scenes);
    out_ += "  <rect width=\"" + format(canvas.width) + "\" height=\"" + format(canvas.height) + "\" fill=\"" +
            escape(options_.background) + "\"/>\n";
    for (const Scene& s : scenes) {
      if (s.id == "highlight" && s.items.empty()) continue;
      group(s);
    }
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  const SvgOptions& options_;
  std::string out_;
};

}  // namespace

std::string format(double v) {
  double r = std::round(v * 1000.0) / 1000.0;
  if (r == 0.0) r = 0.0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::fixed, 3);
  std::string s(buf, res.ptr);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string render_scenes(const scene::Canvas& canvas, const std::vector<scene::Scene>& scenes,
                          const SvgOptions& options) {
  return Writer(options).document(canvas, scenes);
}

std::string render_maptrix(const layouts::MapTrixLayout& layout, const SvgOptions& options,
                           const layouts::HighlightOverlay* overlay) {
  if (!overlay || overlay->empty()) return render_scenes(layout.canvas, layout.scenes, options);
  std::vector<Scene> scenes = layout.scenes;
  scenes.push_back(overlay->scene);
  return render_scenes(layout.canvas, scenes, options);
}

std::string render_odmaps(const layouts::ODMapsLayout& layout, const SvgOptions& options) {
  return render_scenes(layout.canvas, layout.scenes, options);
}

std::string render_flowmap(const layouts::FlowMapLayout& layout, const SvgOptions& options) {
  return render_scenes(layout.canvas, layout.scenes, options);
}

}  // namespace odflow::rendersvg
