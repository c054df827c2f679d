#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace layoutcot::detail {

// Successive shortest paths with Johnson potentials and an O(V^2) Dijkstra,
// which suits the dense bipartite graphs built for transport problems.
// Edge costs must be non-negative.
class MinCostFlow {
 public:
  using Value = std::int64_t;

  explicit MinCostFlow(int nodes) : graph_(static_cast<std::size_t>(nodes)) {}

  // Returns a handle for flow().
  int add_edge(int from, int to, Value capacity, Value cost) {
    graph_[from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, capacity, 0, cost});
    graph_[to].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0, 0, -cost});
    return static_cast<int>(edges_.size()) - 2;
  }

  Value flow(int edge) const { return edges_[edge].flow; }

  // Pushes up to `limit` units from source to sink at minimum cost.
  // Returns (flow, cost).
  std::pair<Value, Value> solve(int source, int sink, Value limit) {
    const std::size_t n = graph_.size();
    constexpr Value kInf = std::numeric_limits<Value>::max() / 4;
    std::vector<Value> potential(n, 0);
    std::vector<Value> dist(n);
    std::vector<int> parent_edge(n);
    std::vector<char> done(n);

    Value total_flow = 0;
    Value total_cost = 0;
    while (total_flow < limit) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(parent_edge.begin(), parent_edge.end(), -1);
      std::fill(done.begin(), done.end(), 0);
      dist[source] = 0;
      for (;;) {
        int u = -1;
        for (std::size_t v = 0; v < n; ++v) {
          if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = static_cast<int>(v);
        }
        if (u < 0) break;
        done[u] = 1;
        for (int id : graph_[u]) {
          const Edge& e = edges_[id];
          if (e.capacity - e.flow <= 0) continue;
          const Value nd = dist[u] + e.cost + potential[u] - potential[e.to];
          if (nd < dist[e.to]) {
            dist[e.to] = nd;
            parent_edge[e.to] = id;
          }
        }
      }
      if (dist[sink] >= kInf) break;
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) potential[v] += dist[v];
      }

      Value push = limit - total_flow;
      for (int v = sink; v != source;) {
        const Edge& e = edges_[parent_edge[v]];
        push = std::min(push, e.capacity - e.flow);
        v = edges_[parent_edge[v] ^ 1].to;
      }
      for (int v = sink; v != source;) {
        const int id = parent_edge[v];
        edges_[id].flow += push;
        edges_[id ^ 1].flow -= push;
        total_cost += push * edges_[id].cost;
        v = edges_[id ^ 1].to;
      }
      total_flow += push;
    }
    return {total_flow, total_cost};
  }

 private:
  struct Edge {
    int to;
    Value capacity;
    Value flow;
    Value cost;
  };

  std::vector<std::vector<int>> graph_;
  std::vector<Edge> edges_;
};

}  // namespace layoutcot::detail
