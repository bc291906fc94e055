#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgpp/geo.hpp"
#include "pgpp/topology.hpp"

namespace pgpp {

struct KMeansResult {
  std::vector<Point> centers;
  // Cluster index per input point.
  std::vector<std::size_t> assignment;
  int iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm with deterministic farthest-point seeding: the first
// center is drawn from `seed`, each following center is the point farthest
// from all chosen centers (lowest index on ties). Stops when no assignment
// changes or after `max_iterations`. An empty cluster is reseeded at the
// point farthest from its own center.
KMeansResult kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                    int max_iterations = 100);

// Custom tracking areas: k-means over the projected eNB positions. TA ids are
// the cluster indices 0..k-1. Throws Error(invalid_argument) if k is zero or
// exceeds the number of distinct sites.
TrackingAreaMap kmeans_tas(const Topology& topology, std::size_t k, std::uint64_t seed);

}  // namespace pgpp
