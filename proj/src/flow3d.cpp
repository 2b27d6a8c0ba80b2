#include "odflow/flow3d.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "json.hpp"
#include "odflow/error.hpp"
#include "odflow/scene.hpp"

namespace odflow::flow3d {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void check_samples(int samples) {
  if (samples < kMinSamples) {
    throw Error(ErrorCode::kInvalidArgument, "curves need at least 33 samples", std::to_string(samples));
  }
}

double t_at(int i, int samples) { return static_cast<double>(i) / (samples - 1); }

FlowCurve3D sample(const CubicBezier& b, int samples) {
  FlowCurve3D c;
  for (int i = 0; i < samples; ++i) {
    const double t = t_at(i, samples);
    c.samples.push_back(b.at(t));
    c.u.push_back(t);
  }
  c.samples.front() = b.p0;
  c.samples.back() = b.p3;
  return c;
}

Point3 rotation_x(const Point3& v, double deg) {
  return Eigen::AngleAxisd(deg * geo::kDegToRad, Point3::UnitX()) * v;
}

Point3 rotation_y(const Point3& v, double deg) {
  return Eigen::AngleAxisd(deg * geo::kDegToRad, Point3::UnitY()) * v;
}

// Hammer coordinates relative to the ellipse half axes.
Vec2 hammer_unit(geo::ProjectedPoint p) { return {p.x / (2.0 * kSqrt2), p.y / kSqrt2}; }

void append_fixed(std::string& out, double v) {
  double r = std::round(v * 1e6) / 1e6;
  if (r == 0.0) r = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::fixed, 6);
  out.append(buf, res.ptr);
}

}  // namespace

std::string to_string(Encoding e) {
  switch (e) {
    case Encoding::kConstant: return "constant";
    case Encoding::kQuantity: return "quantity";
    case Encoding::kDistance: return "distance";
  }
  return "constant";
}

Encoding parse_encoding(std::string_view s) {
  if (s == "constant") return Encoding::kConstant;
  if (s == "quantity") return Encoding::kQuantity;
  if (s == "distance") return Encoding::kDistance;
  throw Error(ErrorCode::kInvalidArgument, "unknown height encoding", std::string(s));
}

std::string to_string(Representation r) {
  switch (r) {
    case Representation::kFlatMap: return "flatmap";
    case Representation::kGlobe: return "globe";
    case Representation::kMapsLink: return "mapslink";
  }
  return "flatmap";
}

Representation parse_representation(std::string_view s) {
  if (s == "map" || s == "flatmap" || s == "flat") return Representation::kFlatMap;
  if (s == "globe") return Representation::kGlobe;
  if (s == "mapslink") return Representation::kMapsLink;
  throw Error(ErrorCode::kInvalidArgument, "unknown 3D representation", std::string(s));
}

Point3 CubicBezier::at(double t) const {
  const double s = 1.0 - t;
  return s * s * s * p0 + 3.0 * s * s * t * p1 + 3.0 * s * t * t * p2 + t * t * t * p3;
}

FlowCurve3D bezier_flow_on_map(Vec2 origin, Vec2 dest, double h, int samples) {
  if (!(h >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tube height must be non-negative");
  check_samples(samples);
  const double hc = control_height(h);
  const CubicBezier b{{origin.x, origin.y, 0.0}, {origin.x, origin.y, hc}, {dest.x, dest.y, hc}, {dest.x, dest.y, 0.0}};
  FlowCurve3D c = sample(b, samples);
  c.height = h;
  return c;
}

double linear_map(double value, Range domain, Range out) {
  if (!(domain.hi > domain.lo)) return out.hi;
  const double t = std::clamp((value - domain.lo) / (domain.hi - domain.lo), 0.0, 1.0);
  return out.lo + t * (out.hi - out.lo);
}

double height_for_encoding(Encoding e, double value, Range domain, const HeightRange& range) {
  if (!(range.lo <= range.hi) || range.lo < 0.0) throw Error(ErrorCode::kInvalidRange, "bad height range");
  if (e == Encoding::kConstant) return range.constant;
  return linear_map(value, domain, {range.lo, range.hi});
}

double globe_profile(double t, double radius, double h) {
  const double x = -std::abs(t - 0.5) / 0.5;
  return (x * x * x + 1.0) * h + radius;
}

Point3 globe_point(geo::GeoPoint p, double radius) {
  const Eigen::Vector3d v = geo::to_unit_vector(p);
  return Point3(v.y(), v.z(), v.x()) * radius;
}

FlowCurve3D globe_tube(geo::GeoPoint a, geo::GeoPoint b, double radius, double h, int samples) {
  check_samples(samples);
  if (geo::great_circle_distance(a, b) > 179.9) {
    throw Error(ErrorCode::kAntipodalAmbiguity, "great circle is not unique for near-antipodal points");
  }
  const Point3 ua = globe_point(a, 1.0), ub = globe_point(b, 1.0);
  const double omega = std::acos(std::clamp(ua.dot(ub), -1.0, 1.0));
  FlowCurve3D c;
  c.height = h;
  for (int i = 0; i < samples; ++i) {
    const double t = t_at(i, samples);
    Point3 dir = ua;
    if (omega > 1e-12) {
      dir = (std::sin((1.0 - t) * omega) * ua + std::sin(t * omega) * ub) / std::sin(omega);
      dir.normalize();
    }
    c.samples.push_back(dir * globe_profile(t, radius, h));
    c.u.push_back(t);
  }
  c.samples.front() = ua * radius;
  c.samples.back() = ub * radius;
  return c;
}

double mapslink_height(double distance) { return linear_map(distance, {0.0, 2.0}, {0.05, 0.5}); }

FlowCurve3D mapslink_tube(const Point3& origin, const Point3& n_a, const Point3& dest, const Point3& n_b,
                          int samples) {
  check_samples(samples);
  const double dist = (dest - origin).norm();
  const double h = dist > 0.0 ? mapslink_height(dist) : 0.0;
  FlowCurve3D c = sample({origin, origin + n_a.normalized() * h, dest + n_b.normalized() * h, dest}, samples);
  if (dist == 0.0) c.samples.assign(c.samples.size(), origin);
  c.height = h;
  return c;
}

Point3 MapPlane::at(Vec2 unit) const {
  return centre + right * (unit.x * width / 2.0) + up * (unit.y * height / 2.0);
}

std::pair<MapPlane, MapPlane> mapslink_planes() {
  auto plane = [](double dx, double yaw) {
    MapPlane p;
    p.width = 0.75;
    p.height = 0.375;
    p.centre = Point3(dx, -0.3, -0.55);
    // Lying flat with north pointing away, then tilted towards the viewer.
    p.right = rotation_y(rotation_x(Point3::UnitX(), 45.0), yaw);
    p.up = rotation_y(rotation_x(-Point3::UnitZ(), 45.0), yaw);
    return p;
  };
  return {plane(-0.4, 30.0), plane(0.4, -30.0)};
}

Mesh curved_map_surface(int columns, int rows, double radius, double h_angle, double v_angle) {
  if (columns < 2 || rows < 2) throw Error(ErrorCode::kInvalidArgument, "curved map grid needs 2x2 vertices");
  if (!(h_angle > 0.0 && h_angle < 180.0 && v_angle > 0.0 && v_angle < 180.0)) {
    throw Error(ErrorCode::kInvalidArgument, "curved map angles must lie in (0, 180)");
  }
  Mesh m;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < columns; ++i) {
      const double u = 2.0 * i / (columns - 1) - 1.0;
      const double v = 2.0 * j / (rows - 1) - 1.0;
      const Point3 p = curved_map_point({u * 2.0 * kSqrt2, v * kSqrt2}, radius, h_angle, v_angle);
      m.vertices.push_back(p);
      m.normals.push_back(-p.normalized());  // the viewer sits at the centre
    }
  }
  for (int j = 0; j + 1 < rows; ++j) {
    for (int i = 0; i + 1 < columns; ++i) {
      const int a = j * columns + i;
      m.quads.push_back({a, a + 1, a + columns + 1, a + columns});
    }
  }
  return m;
}

Point3 curved_map_point(geo::ProjectedPoint hammer, double radius, double h_angle, double v_angle) {
  const Vec2 unit = hammer_unit(hammer);
  const double az = unit.x * h_angle / 2.0 * geo::kDegToRad;
  const double el = unit.y * v_angle / 2.0 * geo::kDegToRad;
  return radius * Point3(std::sin(az) * std::cos(el), std::sin(el), -std::cos(az) * std::cos(el));
}

Vec2 flat_map_point(geo::ProjectedPoint hammer, double width) {
  const double s = width / (4.0 * kSqrt2);
  return {hammer.x * s, hammer.y * s};
}

std::pair<MorphScene, MorphScene> morph_endpoints(const geo::Rotation3& rotation, double step, double radius) {
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidSpacing, "sampling step must be positive");
  MorphScene flat, globe;
  const int nlon = static_cast<int>(std::floor(360.0 / step + 1e-9));
  const int nlat = static_cast<int>(std::floor(180.0 / step + 1e-9));
  for (int i = 0; i <= nlon; ++i) {
    // Stay just inside the antimeridian so every node has one flat image.
    const double lon = std::clamp(-180.0 + i * step, -179.999, 179.999);
    for (int j = 0; j <= nlat; ++j) {
      const double lat = std::clamp(-90.0 + j * step, -89.999, 89.999);
      const geo::GeoPoint p = geo::rotate({lon, lat}, rotation);
      const Vec2 f = flat_map_point(geo::hammer_forward(p));
      flat.vertices.emplace_back(f.x, f.y, 0.0);
      globe.vertices.push_back(globe_point(p, radius));
    }
  }
  return {flat, globe};
}

MorphScene morph(double u, const MorphScene& flat, const MorphScene& globe) {
  if (flat.vertices.size() != globe.vertices.size()) {
    throw Error(ErrorCode::kCorrespondenceMismatch, "morph scenes differ in vertex count",
                std::to_string(flat.vertices.size()) + " vs " + std::to_string(globe.vertices.size()));
  }
  if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "morph progress must lie in [0, 1]");
  if (u == 0.0) return flat;
  if (u == 1.0) return globe;
  MorphScene out;
  out.vertices.reserve(flat.vertices.size());
  for (std::size_t i = 0; i < flat.vertices.size(); ++i) {
    out.vertices.push_back((1.0 - u) * flat.vertices[i] + u * globe.vertices[i]);
  }
  return out;
}

Range default_radius(Representation r) {
  // Tube thickness in the studies is a diameter: 2-16 mm on the flat map,
  // 0.1-0.8 cm on the globe and MapsLink.
  return r == Representation::kFlatMap ? Range{0.001, 0.008} : Range{0.0005, 0.004};
}

std::vector<FlowCurve3D> build_flows3d(const oddata::FlowDataset& d, const ExportOptions& options) {
  check_samples(options.samples);
  const Range radius = options.radius.value_or(default_radius(options.representation));
  if (!(radius.lo > 0.0 && radius.lo <= radius.hi)) throw Error(ErrorCode::kInvalidRange, "bad tube radius range");

  geo::GeoPoint centre;
  if (options.centre) {
    centre = *options.centre;
  } else {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& r : d.regions()) mean += geo::to_unit_vector(r.anchor);
    centre = mean.norm() < 1e-12 ? geo::GeoPoint{} : geo::from_unit_vector(mean.normalized());
  }
  const geo::Rotation3 rot = geo::centering_rotation(centre);

  std::vector<const oddata::Flow*> flows;
  for (const auto& f : d.flows()) {
    if (f.origin != f.dest) flows.push_back(&f);
  }
  std::sort(flows.begin(), flows.end(), [](const oddata::Flow* a, const oddata::Flow* b) {
    return std::tie(a->origin, a->dest) < std::tie(b->origin, b->dest);
  });

  auto rotated = [&](const std::string& id) { return geo::rotate(d.region(id).anchor, rot); };
  auto id_of = [](const oddata::Flow& f) { return f.origin + ":" + f.dest; };

  Range magnitudes{0.0, 0.0};
  if (!flows.empty()) {
    magnitudes = {flows.front()->magnitude, flows.front()->magnitude};
    for (const auto* f : flows) {
      magnitudes.lo = std::min(magnitudes.lo, f->magnitude);
      magnitudes.hi = std::max(magnitudes.hi, f->magnitude);
    }
  }

  // Per-flow distance in the representation's own metric.
  std::vector<double> distance;
  if (options.representation == Representation::kGlobe) {
    std::string offending;
    for (const auto* f : flows) {
      const double arc = geo::great_circle_distance(rotated(f->origin), rotated(f->dest));
      if (arc > 179.9) offending += (offending.empty() ? "" : ",") + id_of(*f);
      distance.push_back(arc);
    }
    if (!offending.empty()) {
      throw Error(ErrorCode::kAntipodalAmbiguity, "flows between near-antipodal regions", offending);
    }
  } else {
    for (const auto* f : flows) {
      const Vec2 a = flat_map_point(geo::hammer_forward(rotated(f->origin)));
      const Vec2 b = flat_map_point(geo::hammer_forward(rotated(f->dest)));
      distance.push_back(std::hypot(b.x - a.x, b.y - a.y));
    }
  }
  Range distances{0.0, 0.0};
  if (!distance.empty()) {
    const auto [lo, hi] = std::minmax_element(distance.begin(), distance.end());
    distances = {*lo, *hi};
  }

  const auto [plane_a, plane_b] = mapslink_planes();
  std::vector<FlowCurve3D> out;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const oddata::Flow& f = *flows[i];
    const double value = options.encoding == Encoding::kQuantity ? f.magnitude : distance[i];
    const Range domain = options.encoding == Encoding::kQuantity ? magnitudes : distances;
    const double h = height_for_encoding(options.encoding, value, domain, options.heights);
    FlowCurve3D c;
    switch (options.representation) {
      case Representation::kFlatMap:
        c = bezier_flow_on_map(flat_map_point(geo::hammer_forward(rotated(f.origin))),
                               flat_map_point(geo::hammer_forward(rotated(f.dest))), h, options.samples);
        c.encoding = options.encoding;
        break;
      case Representation::kGlobe:
        c = globe_tube(rotated(f.origin), rotated(f.dest), options.globe_radius, h, options.samples);
        c.encoding = options.encoding;
        break;
      case Representation::kMapsLink:
        c = mapslink_tube(plane_a.at(hammer_unit(geo::hammer_forward(rotated(f.origin)))), plane_a.normal(),
                          plane_b.at(hammer_unit(geo::hammer_forward(rotated(f.dest)))), plane_b.normal(),
                          options.samples);
        c.encoding = Encoding::kDistance;  // height always follows the 3D distance
        break;
    }
    c.flow_id = id_of(f);
    c.radii.assign(c.samples.size(), linear_map(f.magnitude, magnitudes, radius));
    out.push_back(std::move(c));
  }
  return out;
}

Mesh tube_mesh(const FlowCurve3D& curve, int sides) {
  if (sides < 3) throw Error(ErrorCode::kInvalidArgument, "tube cross-section needs at least 3 sides");
  Mesh m;
  const std::size_t n = curve.samples.size();
  if (n < 2) return m;
  std::vector<Point3> tangents(n);
  Point3 last = Point3::UnitX();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 d = curve.samples[std::min(i + 1, n - 1)] - curve.samples[i == 0 ? 0 : i - 1];
    if (d.norm() > 1e-12) last = d.normalized();
    tangents[i] = last;
  }
  // Seed normal: the axis least aligned with the first tangent.
  Point3 axis = Point3::UnitX();
  if (std::abs(tangents[0].y()) < std::abs(tangents[0].dot(axis))) axis = Point3::UnitY();
  if (std::abs(tangents[0].z()) < std::abs(tangents[0].dot(axis))) axis = Point3::UnitZ();
  Point3 normal = (axis - tangents[0] * tangents[0].dot(axis)).normalized();

  for (std::size_t i = 0; i < n; ++i) {
    const Point3 t = tangents[i];
    const Point3 projected = normal - t * t.dot(normal);
    if (projected.norm() > 1e-12) normal = projected.normalized();
    const Point3 binormal = t.cross(normal).normalized();
    for (int s = 0; s < sides; ++s) {
      const double a = 2.0 * geo::kPi * s / sides;
      const Point3 dir = std::cos(a) * normal + std::sin(a) * binormal;
      m.vertices.push_back(curve.samples[i] + dir * curve.radii[i]);
      m.normals.push_back(dir);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int s = 0; s < sides; ++s) {
      const int a = static_cast<int>(i) * sides + s;
      const int b = static_cast<int>(i) * sides + (s + 1) % sides;
      m.quads.push_back({a, b, b + sides, a + sides});
    }
  }
  return m;
}

std::string to_obj(std::span<const FlowCurve3D> curves, int sides) {
  std::string out = "# odflow tube meshes, metres\n";
  int offset = 1;
  auto vec = [&](const char* tag, const Point3& p) {
    out += tag;
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      append_fixed(out, p[k]);
    }
    out += '\n';
  };
  for (const FlowCurve3D& c : curves) {
    const Mesh m = tube_mesh(c, sides);
    out += "o " + c.flow_id + "\n";
    for (const Point3& v : m.vertices) vec("v", v);
    for (const Point3& v : m.normals) vec("vn", v);
    for (const auto& q : m.quads) {
      out += 'f';
      for (int k : q) {
        const std::string idx = std::to_string(k + offset);
        out += ' ' + idx + "//" + idx;
      }
      out += '\n';
    }
    offset += static_cast<int>(m.vertices.size());
  }
  return out;
}

nlohmann::json document(std::span<const FlowCurve3D> curves, const ExportOptions& options) {
  nlohmann::json arr = nlohmann::json::array();
  for (const FlowCurve3D& c : curves) {
    nlohmann::json samples = nlohmann::json::array();
    for (const Point3& p : c.samples) {
      samples.push_back({scene::canonical(p.x()), scene::canonical(p.y()), scene::canonical(p.z())});
    }
    nlohmann::json radii = nlohmann::json::array(), u = nlohmann::json::array();
    for (double r : c.radii) radii.push_back(scene::canonical(r));
    for (double t : c.u) u.push_back(scene::canonical(t));
    arr.push_back({{"flowId", c.flow_id},
                   {"encoding", to_string(c.encoding)},
                   {"height", scene::canonical(c.height)},
                   {"samples", samples},
                   {"radii", radii},
                   {"u", u}});
  }
  const char* frame = options.representation == Representation::kFlatMap ? "map-local: x east, y north, z up"
                      : options.representation == Representation::kGlobe
                          ? "globe-local: centre at origin, x east, y north, z to viewer"
                          : "viewer: eye at origin, y up, looking down -z";
  return {{"schemaVersion", scene::kSchemaVersion},
          {"kind", "flows3d"},
          {"representation", to_string(options.representation)},
          {"unit", "metre"},
          {"frame", frame},
          {"curves", arr}};
}

std::string to_json(std::span<const FlowCurve3D> curves, const ExportOptions& options) {
  return document(curves, options).dump();
}

}  // namespace odflow::flow3d
