#include "pgpp/kmeans.hpp"

#include <limits>
#include <map>
#include <set>

#include "pgpp/error.hpp"
#include "pgpp/rng.hpp"

namespace pgpp {
namespace {

std::size_t nearest_center(Point p, const std::vector<Point>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_distance(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Point> farthest_point_init(std::span<const Point> points, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> centers;
  centers.reserve(k);
  centers.push_back(points[uniform_index(rng, points.size())]);
  std::vector<double> min_d(points.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      min_d[i] = std::min(min_d[i], squared_distance(points[i], centers.back()));
      if (min_d[i] > far_d) {
        far_d = min_d[i];
        far = i;
      }
    }
    centers.push_back(points[far]);
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed, int max_iterations) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "kmeans: k must be positive");
  std::set<std::pair<double, double>> distinct;
  for (const Point& p : points) distinct.emplace(p.x, p.y);
  if (k > distinct.size()) {
    throw Error(ErrorCode::invalid_argument, "kmeans: k=" + std::to_string(k) + " exceeds " +
                                                 std::to_string(distinct.size()) + " distinct points");
  }

  KMeansResult result;
  result.centers = farthest_point_init(points, k, seed);
  result.assignment.assign(points.size(), std::numeric_limits<std::size_t>::max());

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = nearest_center(points[i], result.centers);
      if (c != result.assignment[i]) {
        result.assignment[i] = c;
        changed = true;
      }
    }

    // Repair empty clusters one at a time: move the center onto the point
    // farthest from its own center and steal that point.
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t c : result.assignment) ++sizes[c];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (sizes[result.assignment[i]] < 2) continue;
        const double d = squared_distance(points[i], result.centers[result.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --sizes[result.assignment[far]];
      result.assignment[far] = c;
      result.centers[c] = points[far];
      ++sizes[c];
      changed = true;
    }

    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }

    std::vector<Point> sums(k);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[result.assignment[i]].x += points[i].x;
      sums[result.assignment[i]].y += points[i].y;
    }
    for (std::size_t c = 0; c < k; ++c) {
      result.centers[c] = Point{sums[c].x / static_cast<double>(sizes[c]), sums[c].y / static_cast<double>(sizes[c])};
    }
  }
  return result;
}

TrackingAreaMap kmeans_tas(const Topology& topology, std::size_t k, std::uint64_t seed) {
  std::vector<Point> points;
  points.reserve(topology.site_points().size());
  for (const SitePoint& s : topology.site_points()) points.push_back(s.position);
  const KMeansResult clusters = kmeans(points, k, seed);

  std::map<EnbId, TaId> assignment;
  for (std::size_t i = 0; i < points.size(); ++i) {
    assignment.emplace(topology.site_points()[i].enb_id, static_cast<TaId>(clusters.assignment[i]));
  }
  return TrackingAreaMap::build(assignment, topology.cells());
}

}  // namespace pgpp
