#pragma once
// Planar polygons in site-local metres.

#include "erimap/error.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include <array>
#include <cmath>
#include <utility>
#include <string>
#include <vector>

namespace erimap::geometry {

namespace bg = boost::geometry;

using Point = bg::model::d2::point_xy<double>;
using Polygon = bg::model::polygon<Point, /*clockwise=*/false, /*closed=*/true>;
using MultiPolygon = bg::model::multi_polygon<Polygon>;
using Ring = std::vector<std::array<double, 2>>;

inline constexpr double kAreaTolerance = 1e-9;

/// Builds a polygon from an outer ring and optional holes. Closure and
/// orientation are normalized (counter-clockwise exterior).
/// Throws InvalidGeometry for fewer than 3 distinct vertices, zero area
/// or self-intersection.
inline Polygon make_polygon(const std::vector<Ring>& rings, const std::string& what) {
  require(!rings.empty(), ErrorCode::InvalidGeometry, what + ": polygon has no rings");
  Polygon poly;
  for (std::size_t r = 0; r < rings.size(); ++r) {
    const Ring& ring = rings[r];
    std::size_t distinct = ring.size();
    if (distinct >= 2 && ring.front() == ring.back()) --distinct;
    require(distinct >= 3, ErrorCode::InvalidGeometry, what + ": ring needs at least 3 vertices");
    Polygon::ring_type converted;
    for (const auto& [x, y] : ring) {
      require(std::isfinite(x) && std::isfinite(y), ErrorCode::InvalidGeometry, what + ": non-finite coordinate");
      converted.push_back(Point(x, y));
    }
    if (r == 0) {
      poly.outer() = std::move(converted);
    } else {
      poly.inners().push_back(std::move(converted));
    }
  }
  bg::correct(poly);
  bg::validity_failure_type failure{};
  if (!bg::is_valid(poly, failure)) {
    const bool self_cross = failure == bg::failure_self_intersections;
    fail(ErrorCode::InvalidGeometry, what + (self_cross ? ": polygon is self-intersecting" : ": polygon is not simple"));
  }
  require(bg::area(poly) > kAreaTolerance, ErrorCode::InvalidGeometry, what + ": polygon has zero area");
  return poly;
}

inline double overlap_area(const Polygon& a, const Polygon& b) {
  MultiPolygon out;
  bg::intersection(a, b, out);
  return bg::area(out);
}

/// True when the polygons share positive area; touching edges or corners
/// do not count.
inline bool overlaps(const Polygon& a, const Polygon& b) { return overlap_area(a, b) > kAreaTolerance; }

inline std::vector<Ring> rings_of(const Polygon& poly) {
  std::vector<Ring> out;
  auto convert = [](const auto& ring) {
    Ring r;
    for (const auto& p : ring) r.push_back({p.x(), p.y()});
    return r;
  };
  out.push_back(convert(poly.outer()));
  for (const auto& inner : poly.inners()) out.push_back(convert(inner));
  return out;
}

}  // namespace erimap::geometry
