#pragma once

#include <cmath>
#include <vector>

namespace pgpp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(Point a, Point b) { return std::sqrt(squared_distance(a, b)); }

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

// Axis-aligned rectangle in projected meters.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Point p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  // Grows each side by `fraction` of the corresponding extent.
  Rect inflated(double fraction) const;

  static Rect bounding(const std::vector<Point>& points);
};

// Local azimuthal equidistant projection on a spherical earth. Distances from
// the center are exact; at metro scale distortion elsewhere is negligible.
class AzimuthalEquidistant {
 public:
  static constexpr double kEarthRadiusM = 6371008.8;

  explicit AzimuthalEquidistant(LatLon center);

  LatLon center() const { return center_; }
  Point forward(LatLon p) const;
  LatLon inverse(Point p) const;

 private:
  LatLon center_;
  double sin_lat0_;
  double cos_lat0_;
};

// Signed area of a simple polygon (positive for counter-clockwise order).
double polygon_area(const std::vector<Point>& polygon);

// True if `p` lies inside or on the boundary of the convex polygon given in
// counter-clockwise order.
bool convex_polygon_contains(const std::vector<Point>& polygon, Point p,
                             double tolerance = 1e-7);

}  // namespace pgpp
