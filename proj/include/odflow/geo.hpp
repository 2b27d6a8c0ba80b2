#pragma once

// Spherical geometry primitives shared by every layout: great-circle
// distance, spherical rotation (geo-rotation), the Hammer equal-area
// projection and graticule generation.
//
// Hammer projection on the unit sphere (lambda = longitude, phi = latitude):
//
//   x = 2*sqrt(2) * cos(phi) * sin(lambda/2) / sqrt(1 + cos(phi) * cos(lambda/2))
//   y =   sqrt(2) * sin(phi)                 / sqrt(1 + cos(phi) * cos(lambda/2))
//
// with the closed-form inverse
//
//   z      = sqrt(1 - (x/4)^2 - (y/2)^2)
//   lambda = 2 * atan2(z * x, 2 * (2 z^2 - 1))
//   phi    = asin(z * y)
//
// The image is the ellipse x^2/8 + y^2/2 <= 1.

#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace odflow::geo {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

// Tolerances for exact-geometry assertions (degrees) and projection
// round trips (map-plane units).
inline constexpr double kAngleTolerance = 1e-9;
inline constexpr double kProjectionTolerance = 1e-7;

struct GeoPoint {
  double lon = 0.0;  // degrees, [-180, 180]
  double lat = 0.0;  // degrees, [-90, 90]

  bool operator==(const GeoPoint&) const = default;
};

// Validates and normalizes: longitude wrapped into [-180, 180], latitude
// must lie in [-90, 90]. Throws Error(kInvalidArgument) otherwise.
GeoPoint make_geo_point(double lon, double lat);

double normalize_longitude(double lon);

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
};

// Unit vector with x towards (0,0), y towards (90,0) and z towards the
// north pole.
Eigen::Vector3d to_unit_vector(GeoPoint p);
GeoPoint from_unit_vector(const Eigen::Vector3d& v);

/// Spherical rotation. Euler angles (degrees) at the API, a unit quaternion
/// internally. The rotation first shifts longitude by `yaw`, then tilts the
/// pole by `pitch` and finally rolls by `roll` about the view axis, so
/// `Rotation3::from_euler(-lon, -lat, 0)` brings (lon, lat) to (0, 0).
class Rotation3 {
 public:
  Rotation3() = default;

  static Rotation3 from_euler(double yaw, double pitch, double roll);
  static Rotation3 from_quaternion(const Eigen::Quaterniond& q);

  double yaw() const;
  double pitch() const;
  double roll() const;

  Rotation3 inverse() const;
  // Rotation that applies `*this` first and `next` afterwards.
  Rotation3 then(const Rotation3& next) const;

  Eigen::Vector3d apply(const Eigen::Vector3d& v) const { return q_ * v; }
  const Eigen::Quaterniond& quaternion() const { return q_; }

 private:
  explicit Rotation3(const Eigen::Quaterniond& q) : q_(q.normalized()) {}

  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

/// Arc length between two points in degrees, in [0, 180].
double great_circle_distance(GeoPoint a, GeoPoint b);

// Point at fraction `t` along the minor great-circle arc from a to b.
GeoPoint interpolate_great_circle(GeoPoint a, GeoPoint b, double t);

GeoPoint rotate(GeoPoint p, const Rotation3& r);

// Rotation moving `target` to (0, 0) with north kept up (roll = 0).
Rotation3 centering_rotation(GeoPoint target);

ProjectedPoint hammer_forward(GeoPoint p);

// Throws Error(kOutOfBounds) when q lies outside the projection ellipse.
GeoPoint hammer_inverse(ProjectedPoint q);

bool inside_hammer_ellipse(ProjectedPoint q, double slack = 1e-9);

// Splits a polyline wherever consecutive vertices jump across the
// antimeridian, inserting the interpolated crossing on both sides.
std::vector<std::vector<GeoPoint>> split_antimeridian(std::span<const GeoPoint> line);

struct GraticuleLine {
  std::vector<GeoPoint> points;
  bool meridian = false;  // false: parallel
  double value = 0.0;     // longitude of a meridian or latitude of a parallel
  bool emphasis = false;  // set on the equator only
};

struct Graticule {
  double spacing = 10.0;
  std::vector<GraticuleLine> lines;

  std::size_t meridian_count() const;
  std::size_t parallel_count() const;
};

// Meridians every `spacing` degrees of longitude and parallels every
// `spacing` degrees of latitude (poles excluded). `spacing` must divide 90;
// throws Error(kInvalidSpacing) otherwise. Lines are sampled every
// `sample_step` degrees.
Graticule graticule(double spacing, double sample_step = 1.0);

}  // namespace odflow::geo
