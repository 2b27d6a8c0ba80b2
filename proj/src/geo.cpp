#include "odflow/geo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "odflow/error.hpp"

namespace odflow::geo {

namespace {

Eigen::Quaterniond axis_angle(double degrees, const Eigen::Vector3d& axis) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(degrees * kDegToRad, axis));
}

}  // namespace

double normalize_longitude(double lon) {
  if (lon >= -180.0 && lon <= 180.0) return lon;
  double wrapped = std::fmod(lon + 180.0, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  return wrapped - 180.0;
}

GeoPoint make_geo_point(double lon, double lat) {
  if (!std::isfinite(lon) || !std::isfinite(lat)) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite coordinate");
  }
  if (lat < -90.0 || lat > 90.0) {
    throw Error(ErrorCode::kInvalidArgument, "latitude out of range: " + std::to_string(lat));
  }
  return GeoPoint{normalize_longitude(lon), lat};
}

Eigen::Vector3d to_unit_vector(GeoPoint p) {
  const double lam = p.lon * kDegToRad;
  const double phi = p.lat * kDegToRad;
  return {std::cos(phi) * std::cos(lam), std::cos(phi) * std::sin(lam), std::sin(phi)};
}

GeoPoint from_unit_vector(const Eigen::Vector3d& v) {
  const Eigen::Vector3d u = v.normalized();
  const double lat = std::asin(std::clamp(u.z(), -1.0, 1.0)) * kRadToDeg;
  // Longitude is undefined at the poles; report 0 there.
  const double horizontal = std::hypot(u.x(), u.y());
  const double lon = horizontal < 1e-15 ? 0.0 : std::atan2(u.y(), u.x()) * kRadToDeg;
  return GeoPoint{normalize_longitude(lon), lat};
}

// R = Rx(roll) * Ry(-pitch) * Rz(yaw)
Rotation3 Rotation3::from_euler(double yaw, double pitch, double roll) {
  const Eigen::Quaterniond q = axis_angle(roll, Eigen::Vector3d::UnitX()) *
                               axis_angle(-pitch, Eigen::Vector3d::UnitY()) *
                               axis_angle(yaw, Eigen::Vector3d::UnitZ());
  return Rotation3(q);
}

Rotation3 Rotation3::from_quaternion(const Eigen::Quaterniond& q) { return Rotation3(q); }

double Rotation3::yaw() const {
  const Eigen::Matrix3d m = q_.toRotationMatrix();
  return std::atan2(-m(0, 1), m(0, 0)) * kRadToDeg;
}

double Rotation3::pitch() const {
  const Eigen::Matrix3d m = q_.toRotationMatrix();
  return -std::asin(std::clamp(m(0, 2), -1.0, 1.0)) * kRadToDeg;
}

double Rotation3::roll() const {
  const Eigen::Matrix3d m = q_.toRotationMatrix();
  return std::atan2(-m(1, 2), m(2, 2)) * kRadToDeg;
}

Rotation3 Rotation3::inverse() const { return Rotation3(q_.conjugate()); }

Rotation3 Rotation3::then(const Rotation3& next) const { return Rotation3(next.q_ * q_); }

double great_circle_distance(GeoPoint a, GeoPoint b) {
  // atan2 form: well conditioned for both tiny and near-antipodal arcs.
  const Eigen::Vector3d u = to_unit_vector(a);
  const Eigen::Vector3d v = to_unit_vector(b);
  return std::atan2(u.cross(v).norm(), u.dot(v)) * kRadToDeg;
}

GeoPoint interpolate_great_circle(GeoPoint a, GeoPoint b, double t) {
  const Eigen::Vector3d u = to_unit_vector(a);
  const Eigen::Vector3d v = to_unit_vector(b);
  const double omega = std::atan2(u.cross(v).norm(), u.dot(v));
  if (omega < 1e-15) return a;
  const double s = std::sin(omega);
  const Eigen::Vector3d w = (std::sin((1.0 - t) * omega) / s) * u + (std::sin(t * omega) / s) * v;
  return from_unit_vector(w);
}

GeoPoint rotate(GeoPoint p, const Rotation3& r) {
  return from_unit_vector(r.apply(to_unit_vector(p)));
}

Rotation3 centering_rotation(GeoPoint target) {
  // Roll stays 0 ("north up"); near the poles the yaw is meaningless but the
  // same construction still lands the target on (0, 0).
  return Rotation3::from_euler(-target.lon, -target.lat, 0.0);
}

ProjectedPoint hammer_forward(GeoPoint p) {
  const double lam = p.lon * kDegToRad;
  const double phi = p.lat * kDegToRad;
  const double cos_phi = std::cos(phi);
  const double denom = std::sqrt(1.0 + cos_phi * std::cos(lam / 2.0));
  return ProjectedPoint{2.0 * std::sqrt(2.0) * cos_phi * std::sin(lam / 2.0) / denom,
                        std::sqrt(2.0) * std::sin(phi) / denom};
}

bool inside_hammer_ellipse(ProjectedPoint q, double slack) {
  return q.x * q.x / 8.0 + q.y * q.y / 2.0 <= 1.0 + slack;
}

GeoPoint hammer_inverse(ProjectedPoint q) {
  if (!std::isfinite(q.x) || !std::isfinite(q.y) || !inside_hammer_ellipse(q, 1e-12)) {
    throw Error(ErrorCode::kOutOfBounds, "point outside the Hammer ellipse");
  }
  const double z = std::sqrt(std::max(0.0, 1.0 - q.x * q.x / 16.0 - q.y * q.y / 4.0));
  const double lam = 2.0 * std::atan2(z * q.x, 2.0 * (2.0 * z * z - 1.0));
  const double phi = std::asin(std::clamp(z * q.y, -1.0, 1.0));
  return GeoPoint{normalize_longitude(lam * kRadToDeg), phi * kRadToDeg};
}

std::vector<std::vector<GeoPoint>> split_antimeridian(std::span<const GeoPoint> line) {
  std::vector<std::vector<GeoPoint>> parts;
  if (line.empty()) return parts;
  parts.emplace_back();
  parts.back().push_back(line.front());
  for (std::size_t i = 1; i < line.size(); ++i) {
    const GeoPoint a = line[i - 1];
    const GeoPoint b = line[i];
    const double dlon = b.lon - a.lon;
    if (std::abs(dlon) > 180.0) {
      // Crossing eastwards (a near +180, b near -180) or westwards.
      const double edge = dlon < 0.0 ? 180.0 : -180.0;
      const double b_unwrapped = b.lon + (dlon < 0.0 ? 360.0 : -360.0);
      const double denom = b_unwrapped - a.lon;
      const double t = denom == 0.0 ? 0.0 : (edge - a.lon) / denom;
      const double lat = a.lat + t * (b.lat - a.lat);
      parts.back().push_back(GeoPoint{edge, lat});
      parts.emplace_back();
      parts.back().push_back(GeoPoint{-edge, lat});
    }
    parts.back().push_back(b);
  }
  return parts;
}

std::size_t Graticule::meridian_count() const {
  return static_cast<std::size_t>(
      std::count_if(lines.begin(), lines.end(), [](const GraticuleLine& l) { return l.meridian; }));
}

std::size_t Graticule::parallel_count() const { return lines.size() - meridian_count(); }

Graticule graticule(double spacing, double sample_step) {
  const double ratio = 90.0 / spacing;
  if (!(spacing > 0.0) || !std::isfinite(spacing) ||
      std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw Error(ErrorCode::kInvalidSpacing, "graticule spacing must divide 90",
                std::to_string(spacing));
  }
  if (!(sample_step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample step must be positive");
  }
  Graticule g;
  g.spacing = spacing;
  const int per_quadrant = static_cast<int>(std::round(ratio));

  auto samples = [&](double from, double to) {
    const int steps = std::max(1, static_cast<int>(std::ceil((to - from) / sample_step - 1e-9)));
    std::vector<double> out;
    out.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) out.push_back(from + (to - from) * i / steps);
    return out;
  };

  for (int i = 0; i < 4 * per_quadrant; ++i) {
    GraticuleLine line;
    line.meridian = true;
    line.value = -180.0 + i * spacing;
    for (double lat : samples(-90.0, 90.0)) line.points.push_back({line.value, lat});
    g.lines.push_back(std::move(line));
  }
  for (int j = 1; j < 2 * per_quadrant; ++j) {
    GraticuleLine line;
    line.value = -90.0 + j * spacing;
    line.emphasis = j == per_quadrant;
    for (double lon : samples(-180.0, 180.0)) line.points.push_back({lon, line.value});
    g.lines.push_back(std::move(line));
  }
  return g;
}

}  // namespace odflow::geo
