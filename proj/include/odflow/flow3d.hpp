#pragma once

// 3D flow geometry for immersive representations, exported as sampled
// polylines with radii and as swept-octagon tube meshes. Scene unit: metre.
//
// Frames:
//   flat map   map-local, x east, y north, z up from the map plane; the
//              1 x 0.5 m map is centred on the origin.
//   globe      globe-local, centre at the origin, x east, y north, z towards
//              the viewer at the geographic centre.
//   MapsLink   viewer frame, eye at the origin, y up, looking down -z.

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odflow/geo.hpp"
#include "odflow/oddata.hpp"
#include "odflow/planar.hpp"

namespace odflow::flow3d {

using Point3 = Eigen::Vector3d;
using planar::Vec2;

inline constexpr int kDefaultSamples = 65;
inline constexpr int kMinSamples = 33;

enum class Encoding { kConstant, kQuantity, kDistance };
std::string to_string(Encoding e);
Encoding parse_encoding(std::string_view s);  // throws InvalidArgument

enum class Representation { kFlatMap, kGlobe, kMapsLink };
std::string to_string(Representation r);
Representation parse_representation(std::string_view s);

struct FlowCurve3D {
  std::string flow_id;  // "<origin>:<dest>"
  Encoding encoding = Encoding::kConstant;
  std::vector<Point3> samples;  // uniform in t
  std::vector<double> radii;
  std::vector<double> u;  // t per sample; drives the direction gradient
  double height = 0.0;
};

struct CubicBezier {
  Point3 p0, p1, p2, p3;
  Point3 at(double t) const;
};

// Control height giving an apex of h at t = 0.5 when both inner control
// points sit at the same height: h / (6 * 0.5^3) = 4h/3.
inline double control_height(double h) { return h / (6.0 * 0.125); }

// Tube over a flat map (z = 0): P1, P2 directly above P0, P3 at 4h/3.
FlowCurve3D bezier_flow_on_map(Vec2 origin, Vec2 dest, double h, int samples = kDefaultSamples);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Linear map of `value` from `domain` into `out`; a degenerate domain maps to
// out.hi. Values outside the domain are clamped.
double linear_map(double value, Range domain, Range out);

struct HeightRange {
  double lo = 0.05;
  double hi = 0.25;
  double constant = 0.15;
};

// constant -> range.constant; quantity / distance -> linear on `domain`.
double height_for_encoding(Encoding e, double value, Range domain, const HeightRange& range = {});

// Globe tube radial profile: ((-|t - 0.5| / 0.5)^3 + 1) * h + radius.
double globe_profile(double t, double radius, double h);

// Position of a geographic point on a globe of `radius` (globe-local frame).
Point3 globe_point(geo::GeoPoint p, double radius);

// Great-circle tube; throws AntipodalAmbiguity beyond 179.9 degrees of arc.
FlowCurve3D globe_tube(geo::GeoPoint a, geo::GeoPoint b, double radius, double h, int samples = kDefaultSamples);

// MapsLink control height from the straight origin-destination distance:
// [0, 2] m -> [0.05, 0.5] m.
double mapslink_height(double distance);

// Cubic Bezier with P1 = origin + n_a * h and P2 = dest + n_b * h. Coincident
// end points give a zero-length curve.
FlowCurve3D mapslink_tube(const Point3& origin, const Point3& n_a, const Point3& dest, const Point3& n_b,
                          int samples = kDefaultSamples);

// A rectangular map placed in 3D.
struct MapPlane {
  Point3 centre = Point3::Zero();
  Point3 right = Point3::UnitX();  // unit, along the map's x axis
  Point3 up = Point3::UnitY();     // unit, along the map's y axis
  double width = 1.0;
  double height = 0.5;

  Point3 normal() const { return right.cross(up).normalized(); }
  // (x, y) in [-1, 1]^2 relative to the map's half extents.
  Point3 at(Vec2 unit) const;
};

// The two maps of the MapsLink setup, 0.75 x 0.375 m each, 0.4 m left and
// right of a point 0.55 m ahead and 0.3 m below the eye, tilted 45 degrees
// about x and 30 degrees about y towards the viewer.
std::pair<MapPlane, MapPlane> mapslink_planes();

struct Mesh {
  std::vector<Point3> vertices;
  std::vector<Point3> normals;  // per vertex
  std::vector<std::array<int, 4>> quads;
  std::vector<std::array<int, 3>> triangles;
};

// Grid of vertices on a sphere section facing the viewer (-z), with a linear
// (u, v) -> (azimuth, elevation) mapping. Angles in degrees, < 180.
Mesh curved_map_surface(int columns, int rows, double radius = 1.0, double h_angle = 108.0, double v_angle = 54.0);

// Point of the curved map for a Hammer map position.
Point3 curved_map_point(geo::ProjectedPoint hammer, double radius = 1.0, double h_angle = 108.0,
                        double v_angle = 54.0);

// Flat map <-> exocentric globe transition over a shared sampling grid.
struct MorphScene {
  std::vector<Point3> vertices;
};

// Geographic sampling grid every `step` degrees (lon-major), with the flat
// (1 x 0.5 m Hammer quad, z = 0) and globe (radius) positions of each node.
std::pair<MorphScene, MorphScene> morph_endpoints(const geo::Rotation3& rotation, double step = 10.0,
                                                  double radius = 0.4);

// Per-vertex linear interpolation; u = 0 and u = 1 return the inputs exactly.
// Throws CorrespondenceMismatch when the vertex counts differ.
MorphScene morph(double u, const MorphScene& flat, const MorphScene& globe);

// Flat-map position in metres of a Hammer point on the 1 x 0.5 m quad.
Vec2 flat_map_point(geo::ProjectedPoint hammer, double width = 1.0);

// Batch export for a dataset.
struct ExportOptions {
  Representation representation = Representation::kFlatMap;
  Encoding encoding = Encoding::kDistance;
  int samples = kDefaultSamples;
  std::optional<Range> radius;  // default per representation
  HeightRange heights;
  double globe_radius = 0.4;
  std::optional<geo::GeoPoint> centre;  // default: centre of the dataset's anchors
};

Range default_radius(Representation r);

// One curve per non-self flow, sorted by flow id. Globe export throws
// AntipodalAmbiguity listing every offending flow.
std::vector<FlowCurve3D> build_flows3d(const oddata::FlowDataset& d, const ExportOptions& options = {});

// Tube mesh: regular polygon of `sides` swept along each curve with
// parallel-transport frames; open ends.
Mesh tube_mesh(const FlowCurve3D& curve, int sides = 8);

// OBJ text (LF, fixed 6-decimal numbers), one object per curve.
std::string to_obj(std::span<const FlowCurve3D> curves, int sides = 8);

// `{schemaVersion, kind, representation, frame, curves: [{flowId, encoding,
// samples, radii, u}]}`
nlohmann::json document(std::span<const FlowCurve3D> curves, const ExportOptions& options);
std::string to_json(std::span<const FlowCurve3D> curves, const ExportOptions& options);

}  // namespace odflow::flow3d
