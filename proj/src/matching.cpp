#include "bifactor/matching.hpp"

#include <limits>
#include <queue>
#include <stdexcept>

namespace bifactor {

std::vector<int> max_bipartite_matching(int nl, int nr,
                                        const std::vector<std::vector<int>>& adj) {
    if (int(adj.size()) != nl)
        throw std::invalid_argument("max_bipartite_matching: adjacency size mismatch");
    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> match_l(nl, -1), match_r(nr, -1), dist(nl);

    auto bfs = [&]() {
        std::queue<int> q;
        bool reachable = false;
        for (int l = 0; l < nl; ++l) {
            dist[l] = match_l[l] < 0 ? 0 : kInf;
            if (dist[l] == 0) q.push(l);
        }
        while (!q.empty()) {
            int l = q.front();
            q.pop();
            for (int r : adj[l]) {
                int l2 = match_r[r];
                if (l2 < 0) {
                    reachable = true;
                } else if (dist[l2] == kInf) {
                    dist[l2] = dist[l] + 1;
                    q.push(l2);
                }
            }
        }
        return reachable;
    };
    auto dfs = [&](auto&& self, int l) -> bool {
        for (int r : adj[l]) {
            int l2 = match_r[r];
            if (l2 < 0 || (dist[l2] == dist[l] + 1 && self(self, l2))) {
                match_l[l] = r;
                match_r[r] = l;
                return true;
            }
        }
        dist[l] = kInf;
        return false;
    };

    while (bfs())
        for (int l = 0; l < nl; ++l)
            if (match_l[l] < 0) dfs(dfs, l);
    return match_l;
}

std::vector<int> max_matching(const BiGraph& H) {
    std::vector<std::vector<int>> adj(H.n());
    for (const auto& [l, r] : H.edges()) adj[l].push_back(r);
    return max_bipartite_matching(H.n(), H.n(), adj);
}

FlowNetwork::FlowNetwork(int nodes) : out_(nodes), level_(nodes), it_(nodes) {
    if (nodes <= 0) throw std::invalid_argument("FlowNetwork: need at least one node");
}

int FlowNetwork::add_edge(int from, int to, int cap) {
    if (from < 0 || from >= int(out_.size()) || to < 0 || to >= int(out_.size()))
        throw std::invalid_argument("FlowNetwork::add_edge: node out of range");
    if (cap < 0) throw std::invalid_argument("FlowNetwork::add_edge: negative capacity");
    int handle = int(edges_.size());
    edges_.push_back({to, cap});
    edges_.push_back({from, 0});
    out_[from].push_back(handle);
    out_[to].push_back(handle + 1);
    return handle;
}

bool FlowNetwork::bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    level_[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int h : out_[v]) {
            const Edge& e = edges_[h];
            if (e.cap > 0 && level_[e.to] < 0) {
                level_[e.to] = level_[v] + 1;
                q.push(e.to);
            }
        }
    }
    return level_[t] >= 0;
}

int FlowNetwork::dfs(int v, int t, int pushed) {
    if (v == t) return pushed;
    for (int& i = it_[v]; i < int(out_[v].size()); ++i) {
        int h = out_[v][i];
        Edge& e = edges_[h];
        if (e.cap > 0 && level_[e.to] == level_[v] + 1) {
            int got = dfs(e.to, t, std::min(pushed, e.cap));
            if (got > 0) {
                e.cap -= got;
                edges_[h ^ 1].cap += got;
                return got;
            }
        }
    }
    return 0;
}

long long FlowNetwork::max_flow(int s, int t) {
    if (s == t) throw std::invalid_argument("FlowNetwork::max_flow: s == t");
    long long total = 0;
    while (bfs(s, t)) {
        std::fill(it_.begin(), it_.end(), 0);
        while (int got = dfs(s, t, std::numeric_limits<int>::max())) total += got;
    }
    return total;
}

int FlowNetwork::flow_on(int handle) const {
    return edges_[std::size_t(handle) ^ 1].cap;
}

}  // namespace bifactor
