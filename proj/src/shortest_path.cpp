#include "mrmp/shortest_path.hpp"

#include <queue>
#include <stdexcept>
#include <utility>

namespace mrmp {

std::vector<double> shortest_path_distances(const std::vector<std::vector<Edge>>& adj,
                                            int source) {
  const int n = static_cast<int>(adj.size());
  if (source < 0 || source >= n) {
    throw std::out_of_range("shortest_path_distances: source out of range");
  }
  std::vector<double> dist(n, kInf);
  dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
  open.emplace(0.0, source);
  while (!open.empty()) {
    auto [d, u] = open.top();
    open.pop();
    if (d > dist[u]) continue;
    for (const Edge& e : adj[u]) {
      double nd = d + e.length;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        open.emplace(nd, e.to);
      }
    }
  }
  return dist;
}

}  // namespace mrmp
