#pragma once

#include <limits>
#include <vector>

namespace mrmp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Edge {
  int to = 0;
  double length = 0.0;

  bool operator==(const Edge& o) const { return to == o.to && length == o.length; }
};

// Dijkstra over a nonnegative-weight adjacency list. Unreachable vertices get
// kInf. Throws std::out_of_range on an invalid source.
std::vector<double> shortest_path_distances(const std::vector<std::vector<Edge>>& adj,
                                            int source);

}  // namespace mrmp
