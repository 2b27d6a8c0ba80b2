#include "odflow/colour.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "odflow/error.hpp"

namespace odflow {

std::string Rgb::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

Rgb parse_hex(const std::string& hex) {
  unsigned r = 0, g = 0, b = 0;
  if (hex.size() != 7 || hex[0] != '#' || std::sscanf(hex.c_str() + 1, "%2x%2x%2x", &r, &g, &b) != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected #rrggbb colour", hex);
  }
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

Rgb mix(Rgb a, Rgb b, double t) {
  auto ch = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * t));
  };
  return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

ColourScale::ColourScale(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo <= hi)) throw Error(ErrorCode::kInvalidRange, "colour domain requires lo <= hi");
}

const std::array<Rgb, 9>& ColourScale::stops() {
  static const std::array<Rgb, 9> kStops{
      parse_hex("#ffffcc"), parse_hex("#ffeda0"), parse_hex("#fed976"), parse_hex("#feb24c"), parse_hex("#fd8d3c"),
      parse_hex("#fc4e2a"), parse_hex("#e31a1c"), parse_hex("#bd0026"), parse_hex("#800026")};
  return kStops;
}

double ColourScale::position(double v) const {
  if (hi_ <= lo_) return 1.0;
  return std::clamp((v - lo_) / (hi_ - lo_), 0.0, 1.0);
}

int ColourScale::index(double v) const {
  return static_cast<int>(std::lround(position(v) * (kLevels - 1)));
}

Rgb ColourScale::at(double t) {
  const auto& s = stops();
  const double x = std::clamp(t, 0.0, 1.0) * static_cast<double>(s.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(x), s.size() - 2);
  return mix(s[i], s[i + 1], x - static_cast<double>(i));
}

Rgb ColourScale::at_index(int index) {
  return at(static_cast<double>(std::clamp(index, 0, kLevels - 1)) / (kLevels - 1));
}

}  // namespace odflow
