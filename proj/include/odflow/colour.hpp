#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace odflow {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  std::string hex() const;  // "#rrggbb"
  bool operator==(const Rgb&) const = default;
};

Rgb parse_hex(const std::string& hex);
// Linear blend in sRGB; t in [0, 1].
Rgb mix(Rgb a, Rgb b, double t);

// Sequential yellow-orange-red scale (ColorBrewer YlOrRd, 9 classes),
// interpolated piecewise linearly between the class colours.
class ColourScale {
 public:
  static constexpr int kLevels = 256;

  ColourScale() = default;
  ColourScale(double lo, double hi);

  double domain_min() const { return lo_; }
  double domain_max() const { return hi_; }
  static std::string name() { return "YlOrRd"; }
  static const std::array<Rgb, 9>& stops();

  // Position of v in the domain, clamped to [0, 1]. A degenerate domain maps
  // every value to 1 (the top of the scale).
  double position(double v) const;
  int index(double v) const;  // 0 .. kLevels - 1
  Rgb colour(double v) const { return at_index(index(v)); }
  static Rgb at(double t);
  static Rgb at_index(int index);

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
};

}  // namespace odflow
