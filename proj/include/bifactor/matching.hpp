#pragma once

#include <vector>

#include "bifactor/bigraph.hpp"

namespace bifactor {

// Maximum matching in a bipartite graph given as left-side adjacency lists
// (right vertices indexed 0..nr-1).  Returns the left-to-right assignment,
// -1 for unmatched, computed by Hopcroft-Karp.
std::vector<int> max_bipartite_matching(int nl, int nr, const std::vector<std::vector<int>>& adj);

// Convenience wrapper: maximum matching of a BiGraph, left local index to
// right local index.
std::vector<int> max_matching(const BiGraph& H);

// Dinic max-flow on a small integer-capacity network.
class FlowNetwork {
  public:
    explicit FlowNetwork(int nodes);
    // Returns an edge handle usable with flow_on() after max_flow().
    int add_edge(int from, int to, int cap);
    long long max_flow(int s, int t);
    int flow_on(int handle) const;

  private:
    struct Edge {
        int to, cap;
    };
    bool bfs(int s, int t);
    int dfs(int v, int t, int pushed);

    std::vector<Edge> edges_;  // paired: handle ^ 1 is the reverse edge
    std::vector<std::vector<int>> out_;
    std::vector<int> level_, it_;
};

}  // namespace bifactor
