#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgpp/geo.hpp"

namespace pgpp {

using EnbId = std::uint64_t;

// A generator point for the coverage partition: an eNB in projected meters.
struct SitePoint {
  EnbId enb_id = 0;
  Point position;
};

// Voronoi cell of one eNB clipped to the bounding region.
struct CoverageCell {
  EnbId enb_id = 0;
  Point site;
  // Counter-clockwise vertex list.
  std::vector<Point> polygon;
  // eNBs sharing an edge of positive length, ascending.
  std::vector<EnbId> neighbors;
};

// Exact planar Voronoi partition of `sites` clipped to `region`.
//
// Each cell is the bounding rectangle cut by the perpendicular bisectors of
// its nearby sites; candidates are visited outward on a uniform grid until no
// farther site can reach the cell. Throws Error(topology_too_small) for fewer
// than three sites, Error(degenerate_geometry) for duplicate or collinear
// input and Error(out_of_region) when a site lies outside `region`.
std::vector<CoverageCell> voronoi_cells(std::span<const SitePoint> sites, const Rect& region);

// Nearest-site lookup over a set of cells. Equidistant points resolve to the
// lowest enb_id, which is also the cell a boundary point is assigned to.
class CellLocator {
 public:
  CellLocator(std::span<const CoverageCell> cells, const Rect& region);

  const Rect& region() const { return region_; }

  // Throws Error(out_of_region) for points outside the region.
  EnbId locate(Point p) const;

 private:
  struct Entry {
    EnbId enb_id;
    Point site;
  };

  std::size_t grid_index(std::size_t gx, std::size_t gy) const { return gy * nx_ + gx; }

  Rect region_;
  double cell_size_ = 1.0;
  std::size_t nx_ = 1;
  std::size_t ny_ = 1;
  std::vector<std::vector<Entry>> grid_;
};

// Resolves a projected position to the eNB whose coverage cell contains it.
EnbId assign_enb(Point position, const CellLocator& locator);

}  // namespace pgpp
