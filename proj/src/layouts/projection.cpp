#include <algorithm>
#include <limits>

#include "odflow/error.hpp"
#include "odflow/layouts.hpp"

namespace odflow::layouts {

const ProjectedRegion& MapProjection::region(std::string_view id) const {
  for (const auto& r : regions) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::kUnknownRegion, "region not projected", std::string(id));
}

MapProjection project_regions(const FlowDataset& d) {
  MapProjection out;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& r : d.regions()) mean += geo::to_unit_vector(r.anchor);
  if (mean.norm() < 1e-12) mean = Eigen::Vector3d::UnitX();
  out.rotation = geo::centering_rotation(geo::from_unit_vector(mean.normalized()));

  auto project = [&](geo::GeoPoint p) {
    const geo::ProjectedPoint q = geo::hammer_forward(geo::rotate(p, out.rotation));
    return Vec2{q.x, q.y};
  };

  double lx = std::numeric_limits<double>::infinity(), ly = lx;
  double hx = -lx, hy = -lx;
  for (const auto& r : d.regions()) {
    ProjectedRegion pr;
    pr.id = r.id;
    pr.largest = r.largest_polygon();
    for (const auto& poly : r.boundary) {
      std::vector<Ring> rings;
      for (const auto& ring : poly) {
        Ring pts;
        pts.reserve(ring.size());
        for (const auto& p : ring) {
          const Vec2 v = project(p);
          lx = std::min(lx, v.x);
          hx = std::max(hx, v.x);
          ly = std::min(ly, v.y);
          hy = std::max(hy, v.y);
          pts.push_back(v);
        }
        rings.push_back(std::move(pts));
      }
      pr.polygons.push_back(std::move(rings));
    }
    pr.anchor = project(r.anchor);
    out.regions.push_back(std::move(pr));
  }
  if (out.regions.empty() || !(hx > lx) || !(hy > ly)) {
    throw Error(ErrorCode::kInvalidArgument, "region geometry has no extent");
  }

  const double s = 1.0 / (hy - ly);
  auto normalize = [&](Vec2 v) { return Vec2{(v.x - lx) * s, (v.y - ly) * s}; };
  for (auto& r : out.regions) {
    for (auto& poly : r.polygons) {
      for (auto& ring : poly) {
        for (auto& v : ring) v = normalize(v);
      }
    }
    r.anchor = normalize(r.anchor);
  }
  out.aspect = (hx - lx) * s;
  return out;
}

}  // namespace odflow::layouts
