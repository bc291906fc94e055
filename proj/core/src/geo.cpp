#include "pgpp/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pgpp {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

Rect Rect::inflated(double fraction) const {
  const double dx = width() * fraction;
  const double dy = height() * fraction;
  return Rect{min_x - dx, min_y - dy, max_x + dx, max_y + dy};
}

Rect Rect::bounding(const std::vector<Point>& points) {
  Rect r{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
         std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Point& p : points) {
    r.min_x = std::min(r.min_x, p.x);
    r.min_y = std::min(r.min_y, p.y);
    r.max_x = std::max(r.max_x, p.x);
    r.max_y = std::max(r.max_y, p.y);
  }
  return r;
}

AzimuthalEquidistant::AzimuthalEquidistant(LatLon center)
    : center_(center),
      sin_lat0_(std::sin(center.lat * kDegToRad)),
      cos_lat0_(std::cos(center.lat * kDegToRad)) {}

Point AzimuthalEquidistant::forward(LatLon p) const {
  const double lat = p.lat * kDegToRad;
  const double dlon = (p.lon - center_.lon) * kDegToRad;
  const double sin_lat = std::sin(lat);
  const double cos_lat = std::cos(lat);
  const double cos_c = std::clamp(sin_lat0_ * sin_lat + cos_lat0_ * cos_lat * std::cos(dlon), -1.0, 1.0);
  const double c = std::acos(cos_c);
  const double k = c < 1e-12 ? 1.0 : c / std::sin(c);
  return Point{kEarthRadiusM * k * cos_lat * std::sin(dlon),
               kEarthRadiusM * k * (cos_lat0_ * sin_lat - sin_lat0_ * cos_lat * std::cos(dlon))};
}

LatLon AzimuthalEquidistant::inverse(Point p) const {
  const double rho = std::hypot(p.x, p.y);
  if (rho < 1e-9) return center_;
  const double c = rho / kEarthRadiusM;
  const double sin_c = std::sin(c);
  const double cos_c = std::cos(c);
  const double lat = std::asin(std::clamp(cos_c * sin_lat0_ + p.y * sin_c * cos_lat0_ / rho, -1.0, 1.0));
  const double lon = center_.lon * kDegToRad +
                     std::atan2(p.x * sin_c, rho * cos_lat0_ * cos_c - p.y * sin_lat0_ * sin_c);
  return LatLon{lat * kRadToDeg, lon * kRadToDeg};
}

double polygon_area(const std::vector<Point>& polygon) {
  double twice = 0.0;
  for (std::size_t i = 0, n = polygon.size(); i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

bool convex_polygon_contains(const std::vector<Point>& polygon, Point p, double tolerance) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double cross = ex * (p.y - a.y) - ey * (p.x - a.x);
    // Normalize by edge length so the tolerance is a distance.
    const double len = std::hypot(ex, ey);
    if (len > 0.0 && cross / len < -tolerance) return false;
  }
  return true;
}

}  // namespace pgpp
