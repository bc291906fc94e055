#include "pgpp/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "pgpp/error.hpp"

namespace pgpp {
namespace {

constexpr std::size_t kBoundaryEdge = std::numeric_limits<std::size_t>::max();

// Convex polygon whose edge k runs from vertex k to vertex k+1 and was cut by
// the bisector with site `edge_source[k]` (or the region boundary).
struct TaggedPolygon {
  std::vector<Point> vertices;
  std::vector<std::size_t> edge_source;
};

TaggedPolygon rectangle(const Rect& r) {
  return TaggedPolygon{{{r.min_x, r.min_y}, {r.max_x, r.min_y}, {r.max_x, r.max_y}, {r.min_x, r.max_y}},
                       std::vector<std::size_t>(4, kBoundaryEdge)};
}

// Keeps the half-plane closer to `site` than to `other`.
void clip(TaggedPolygon& poly, Point site, Point other, std::size_t other_index) {
  const double dx = other.x - site.x;
  const double dy = other.y - site.y;
  const double half = 0.5 * (dx * dx + dy * dy);
  const double eps = 1e-12 * half;
  const std::size_t n = poly.vertices.size();

  std::vector<double> f(n);
  bool any_outside = false;
  for (std::size_t k = 0; k < n; ++k) {
    const Point& v = poly.vertices[k];
    f[k] = (v.x - site.x) * dx + (v.y - site.y) * dy - half;
    if (f[k] > eps) any_outside = true;
  }
  if (!any_outside) return;

  TaggedPolygon out;
  out.vertices.reserve(n + 1);
  out.edge_source.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t next = (k + 1) % n;
    const bool in_a = f[k] <= eps;
    const bool in_b = f[next] <= eps;
    const Point& a = poly.vertices[k];
    const Point& b = poly.vertices[next];
    if (in_a) {
      out.vertices.push_back(a);
      out.edge_source.push_back(poly.edge_source[k]);
    }
    if (in_a != in_b) {
      const double t = f[k] / (f[k] - f[next]);
      const Point cut{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      out.vertices.push_back(cut);
      // Leaving the half-plane: the new edge runs along the bisector.
      out.edge_source.push_back(in_a ? other_index : poly.edge_source[k]);
    }
  }
  poly = std::move(out);
}

// Drops zero-length edges left by cuts through existing vertices.
void remove_duplicate_vertices(TaggedPolygon& poly, double tolerance) {
  bool changed = true;
  while (changed && poly.vertices.size() > 2) {
    changed = false;
    const std::size_t n = poly.vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
      if (distance(poly.vertices[k], poly.vertices[(k + 1) % n]) <= tolerance) {
        poly.vertices.erase(poly.vertices.begin() + static_cast<std::ptrdiff_t>(k));
        poly.edge_source.erase(poly.edge_source.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }
}

void check_input(std::span<const SitePoint> sites, const Rect& region) {
  if (sites.size() < 3) {
    throw Error(ErrorCode::topology_too_small,
                "voronoi: need at least 3 sites, got " + std::to_string(sites.size()));
  }
  if (!(region.width() > 0.0) || !(region.height() > 0.0)) {
    throw Error(ErrorCode::degenerate_geometry, "voronoi: empty bounding region");
  }
  for (const SitePoint& s : sites) {
    if (!region.contains(s.position)) {
      throw Error(ErrorCode::out_of_region, "voronoi: site " + std::to_string(s.enb_id) + " outside region");
    }
  }
  std::vector<std::pair<double, double>> coords;
  coords.reserve(sites.size());
  for (const SitePoint& s : sites) coords.emplace_back(s.position.x, s.position.y);
  std::sort(coords.begin(), coords.end());
  if (std::adjacent_find(coords.begin(), coords.end()) != coords.end()) {
    throw Error(ErrorCode::degenerate_geometry, "voronoi: duplicate site coordinates");
  }

  // Collinearity: measure every site against the line through the first site
  // and the site farthest from it.
  const Point p0 = sites[0].position;
  std::size_t far = 0;
  for (std::size_t i = 1; i < sites.size(); ++i) {
    if (squared_distance(p0, sites[i].position) > squared_distance(p0, sites[far].position)) far = i;
  }
  const Point p1 = sites[far].position;
  const double len = distance(p0, p1);
  for (const SitePoint& s : sites) {
    const double cross = (p1.x - p0.x) * (s.position.y - p0.y) - (p1.y - p0.y) * (s.position.x - p0.x);
    if (std::abs(cross) / len > 1e-9 * len) return;
  }
  throw Error(ErrorCode::degenerate_geometry, "voronoi: all sites are collinear");
}

struct Grid {
  Rect region;
  double cell = 1.0;
  std::size_t nx = 1;
  std::size_t ny = 1;

  Grid(const Rect& r, std::size_t n) : region(r) {
    cell = std::sqrt(r.width() * r.height() / static_cast<double>(std::max<std::size_t>(n, 1)));
    nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r.width() / cell)));
    ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r.height() / cell)));
  }

  std::size_t col(double x) const {
    const auto c = static_cast<std::ptrdiff_t>(std::floor((x - region.min_x) / cell));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(nx) - 1));
  }
  std::size_t row(double y) const {
    const auto r = static_cast<std::ptrdiff_t>(std::floor((y - region.min_y) / cell));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(ny) - 1));
  }

  // Calls fn(gx, gy) for every grid cell at Chebyshev distance `ring` from
  // (cx, cy). Returns false once the ring lies entirely outside the grid.
  template <typename Fn>
  bool for_ring(std::size_t cx, std::size_t cy, std::size_t ring, Fn&& fn) const {
    const auto r = static_cast<std::ptrdiff_t>(ring);
    const auto x0 = static_cast<std::ptrdiff_t>(cx) - r;
    const auto x1 = static_cast<std::ptrdiff_t>(cx) + r;
    const auto y0 = static_cast<std::ptrdiff_t>(cy) - r;
    const auto y1 = static_cast<std::ptrdiff_t>(cy) + r;
    const auto w = static_cast<std::ptrdiff_t>(nx);
    const auto h = static_cast<std::ptrdiff_t>(ny);
    if (x0 < 0 && y0 < 0 && x1 >= w && y1 >= h) {
      if (ring > 0) return false;
    }
    auto visit = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
      if (x >= 0 && y >= 0 && x < w && y < h) fn(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    };
    if (ring == 0) {
      visit(x0, y0);
      return true;
    }
    for (std::ptrdiff_t x = x0; x <= x1; ++x) {
      visit(x, y0);
      visit(x, y1);
    }
    for (std::ptrdiff_t y = y0 + 1; y < y1; ++y) {
      visit(x0, y);
      visit(x1, y);
    }
    return true;
  }
};

}  // namespace

std::vector<CoverageCell> voronoi_cells(std::span<const SitePoint> sites, const Rect& region) {
  check_input(sites, region);

  const Grid grid(region, sites.size());
  std::vector<std::vector<std::size_t>> buckets(grid.nx * grid.ny);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    buckets[grid.row(sites[i].position.y) * grid.nx + grid.col(sites[i].position.x)].push_back(i);
  }

  const double scale = std::max(region.width(), region.height());
  const double vertex_tolerance = 1e-9 * scale;
  const double edge_tolerance = 1e-7 * scale;

  std::vector<CoverageCell> cells(sites.size());
  std::vector<std::set<std::size_t>> adjacency(sites.size());

  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Point p = sites[i].position;
    TaggedPolygon poly = rectangle(region);
    const std::size_t cx = grid.col(p.x);
    const std::size_t cy = grid.row(p.y);
    for (std::size_t ring = 0;; ++ring) {
      const bool inside = grid.for_ring(cx, cy, ring, [&](std::size_t gx, std::size_t gy) {
        for (std::size_t j : buckets[gy * grid.nx + gx]) {
          if (j != i) clip(poly, p, sites[j].position, j);
        }
      });
      if (!inside) break;
      double reach = 0.0;
      for (const Point& v : poly.vertices) reach = std::max(reach, squared_distance(v, p));
      // A site can cut the cell only if it is closer than twice the farthest
      // vertex; everything beyond this ring is at least ring * cell away.
      const double ring_clearance = static_cast<double>(ring) * grid.cell;
      if (ring_clearance * ring_clearance >= 4.0 * reach) break;
    }
    remove_duplicate_vertices(poly, vertex_tolerance);

    CoverageCell& cell = cells[i];
    cell.enb_id = sites[i].enb_id;
    cell.site = p;
    cell.polygon = poly.vertices;
    const std::size_t n = poly.vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t src = poly.edge_source[k];
      if (src == kBoundaryEdge) continue;
      if (distance(poly.vertices[k], poly.vertices[(k + 1) % n]) > edge_tolerance) {
        adjacency[i].insert(src);
        adjacency[src].insert(i);
      }
    }
  }

  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j : adjacency[i]) cells[i].neighbors.push_back(sites[j].enb_id);
    std::sort(cells[i].neighbors.begin(), cells[i].neighbors.end());
  }
  return cells;
}

CellLocator::CellLocator(std::span<const CoverageCell> cells, const Rect& region) : region_(region) {
  const std::size_t n = std::max<std::size_t>(cells.size(), 1);
  cell_size_ = std::sqrt(std::max(region.width() * region.height(), 1e-12) / static_cast<double>(n));
  if (!(cell_size_ > 0.0)) cell_size_ = 1.0;
  nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(region.width() / cell_size_)));
  ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(region.height() / cell_size_)));
  grid_.resize(nx_ * ny_);
  for (const CoverageCell& c : cells) {
    const auto gx = static_cast<std::size_t>(
        std::clamp((c.site.x - region.min_x) / cell_size_, 0.0, static_cast<double>(nx_ - 1)));
    const auto gy = static_cast<std::size_t>(
        std::clamp((c.site.y - region.min_y) / cell_size_, 0.0, static_cast<double>(ny_ - 1)));
    grid_[grid_index(gx, gy)].push_back(Entry{c.enb_id, c.site});
  }
}

EnbId CellLocator::locate(Point p) const {
  if (!region_.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") outside coverage region";
    throw Error(ErrorCode::out_of_region, msg.str());
  }
  const auto cx = static_cast<std::ptrdiff_t>(
      std::clamp((p.x - region_.min_x) / cell_size_, 0.0, static_cast<double>(nx_ - 1)));
  const auto cy = static_cast<std::ptrdiff_t>(
      std::clamp((p.y - region_.min_y) / cell_size_, 0.0, static_cast<double>(ny_ - 1)));

  double best = std::numeric_limits<double>::infinity();
  EnbId best_id = 0;
  bool found = false;
  const auto w = static_cast<std::ptrdiff_t>(nx_);
  const auto h = static_cast<std::ptrdiff_t>(ny_);
  const std::ptrdiff_t max_ring = std::max(w, h);

  auto consider = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    for (const Entry& e : grid_[grid_index(static_cast<std::size_t>(x), static_cast<std::size_t>(y))]) {
      const double d = squared_distance(p, e.site);
      const double tie = 1e-9 * std::max(d, best == std::numeric_limits<double>::infinity() ? d : best);
      if (!found || d < best - tie) {
        best = d;
        best_id = e.enb_id;
        found = true;
      } else if (std::abs(d - best) <= tie && e.enb_id < best_id) {
        best_id = e.enb_id;
        best = std::min(best, d);
      }
    }
  };

  for (std::ptrdiff_t r = 0; r <= max_ring; ++r) {
    if (r == 0) {
      consider(cx, cy);
    } else {
      for (std::ptrdiff_t x = cx - r; x <= cx + r; ++x) {
        consider(x, cy - r);
        consider(x, cy + r);
      }
      for (std::ptrdiff_t y = cy - r + 1; y < cy + r; ++y) {
        consider(cx - r, y);
        consider(cx + r, y);
      }
    }
    const double clearance = static_cast<double>(r) * cell_size_;
    if (found && clearance * clearance > best * (1.0 + 1e-9)) break;
  }
  if (!found) throw Error(ErrorCode::empty_input, "cell locator has no cells");
  return best_id;
}

EnbId assign_enb(Point position, const CellLocator& locator) { return locator.locate(position); }

}  // namespace pgpp
