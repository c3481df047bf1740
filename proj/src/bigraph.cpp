#include "bifactor/bigraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

namespace bifactor {

BiGraph::BiGraph(int n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("BiGraph: n must be positive");
    adj_.resize(2 * std::size_t(n));
}

void BiGraph::add_edge(int l, int r) {
    if (l < 0 || l >= n_ || r < 0 || r >= n_)
        throw std::invalid_argument("BiGraph::add_edge: endpoint out of range");
    if (has_edge(l, r)) throw std::invalid_argument("BiGraph::add_edge: duplicate edge");
    int id = int(edges_.size());
    edges_.emplace_back(l, r);
    adj_[l].emplace_back(n_ + r, id);
    adj_[n_ + r].emplace_back(l, id);
}

bool BiGraph::has_edge(int l, int r) const {
    const auto& a = adj_[l];
    const auto& b = adj_[n_ + r];
    const auto& shorter = a.size() <= b.size() ? a : b;
    int want = a.size() <= b.size() ? n_ + r : l;
    for (const auto& [nbr, id] : shorter)
        if (nbr == want) return true;
    return false;
}

int BiGraph::edge_other(int id, int v) const {
    auto [l, r] = edges_[id];
    int rg = n_ + r;
    if (v == l) return rg;
    if (v == rg) return l;
    throw std::invalid_argument("BiGraph::edge_other: vertex not on edge");
}

int BiGraph::min_degree() const {
    int m = vertex_count() ? degree(0) : 0;
    for (int v = 1; v < vertex_count(); ++v) m = std::min(m, degree(v));
    return m;
}

int BiGraph::max_degree() const {
    int m = 0;
    for (int v = 0; v < vertex_count(); ++v) m = std::max(m, degree(v));
    return m;
}

CheckResult is_D_regular(const BiGraph& H, const DegreeBand& band) {
    for (int v = 0; v < H.vertex_count(); ++v) {
        if (!band.contains(double(H.degree(v)))) {
            std::ostringstream w;
            w << "vertex " << v << " has degree " << H.degree(v) << " outside ["
              << band.lo() << ", " << band.hi() << "]";
            return {false, true, w.str()};
        }
    }
    return {true, true, {}};
}

namespace {

// Smallest subset size meeting the exact threshold size >= frac * n.
int min_qualifying_size(double frac, int n) {
    int s = int(std::ceil(frac * double(n)));
    if (double(s - 1) >= frac * double(n)) --s;  // guard against ceil of an exact integer
    return std::max(s, 0);
}

// Right-side neighbourhood masks against a left-subset mask.
std::vector<std::uint32_t> left_masks(const BiGraph& H) {
    std::vector<std::uint32_t> m(H.n(), 0);
    for (const auto& [l, r] : H.edges()) m[r] |= std::uint32_t(1) << l;
    return m;
}

int count_edges_between(const BiGraph& H, const std::vector<char>& in1,
                        const std::vector<char>& in2) {
    int cnt = 0;
    for (const auto& [l, r] : H.edges())
        if (in1[l] && in2[r]) ++cnt;
    return cnt;
}

// Shared engine for the two-sided subset checks.  lower_only relaxes the upper
// bound (density check); size thresholds may differ from the band delta.
CheckResult subset_pair_check(const BiGraph& H, double band_delta, double size_frac, double p,
                              bool lower_only, const CheckOptions& opts) {
    const int n = H.n();
    const int smin = std::max(1, min_qualifying_size(size_frac, n));
    if (smin > n) return {true, true, {}};  // no qualifying subsets at all

    auto in_band = [&](double cnt, double s1, double s2, std::string* w) {
        double mean = p * s1 * s2;
        double lo = (1.0 - band_delta) * mean;
        double hi = (1.0 + band_delta) * mean;
        bool ok = cnt >= lo && (lower_only || cnt <= hi);
        if (!ok && w) {
            std::ostringstream os;
            os << "subset pair of sizes (" << s1 << ", " << s2 << ") spans " << cnt
               << " edges, outside " << (lower_only ? "lower bound " : "band around ") << mean;
            *w = os.str();
        }
        return ok;
    };

    if (n <= opts.subset_cap && n <= 14) {
        // Exhaustive: for each qualifying left mask, a subset-sum table over
        // right masks gives every pair count in O(4^n) total.
        auto nbr = left_masks(H);
        const std::uint32_t full = (std::uint32_t(1) << n) - 1;
        std::vector<int> cross(std::size_t(full) + 1);
        for (std::uint32_t m1 = 1; m1 <= full; ++m1) {
            int s1 = std::popcount(m1);
            if (s1 < smin) continue;
            std::vector<int> single(n);
            for (int r = 0; r < n; ++r) single[r] = std::popcount(nbr[r] & m1);
            cross[0] = 0;
            for (std::uint32_t m2 = 1; m2 <= full; ++m2) {
                std::uint32_t low = m2 & (m2 - 1);
                cross[m2] = cross[low] + single[std::countr_zero(m2)];
                if (std::popcount(m2) < smin) continue;
                std::string w;
                if (!in_band(cross[m2], s1, std::popcount(m2), &w)) return {false, true, w};
            }
        }
        return {true, true, {}};
    }

    // Sampled mode: seeded random qualifying pairs.
    Rng rng(opts.seed, opts.stream);
    for (int t = 0; t < opts.samples; ++t) {
        int s1 = smin + int(rng.below(std::uint64_t(n - smin + 1)));
        int s2 = smin + int(rng.below(std::uint64_t(n - smin + 1)));
        std::vector<char> in1(n, 0), in2(n, 0);
        for (auto i : rng.sample_indices(n, s1)) in1[i] = 1;
        for (auto i : rng.sample_indices(n, s2)) in2[i] = 1;
        std::string w;
        if (!in_band(count_edges_between(H, in1, in2), s1, s2, &w)) return {false, false, w};
    }
    return {true, false, {}};
}

}  // namespace

CheckResult is_uniform(const BiGraph& H, double delta, double p, const CheckOptions& opts) {
    if (delta <= 0 || p <= 0) throw std::invalid_argument("is_uniform: delta and p must be positive");
    return subset_pair_check(H, delta, delta, p, false, opts);
}

CheckResult is_dense(const BiGraph& H, double delta, double delta_size, double p,
                     const CheckOptions& opts) {
    if (delta <= 0 || delta_size <= 0 || p <= 0)
        throw std::invalid_argument("is_dense: parameters must be positive");
    return subset_pair_check(H, delta, delta_size, p, true, opts);
}

CheckResult is_sparse(const BiGraph& H, double alpha, double beta, const CheckOptions& opts) {
    if (alpha <= 0 || beta <= 0) throw std::invalid_argument("is_sparse: parameters must be positive");
    const int n = H.n();
    const int V = H.vertex_count();
    const double size_cap = alpha * double(n);
    const double per_vertex = beta * double(n);

    if (n <= opts.subset_cap && V <= 26) {
        // Exhaustive over subsets of both sides via an incremental edge-count
        // table indexed by vertex mask.
        std::vector<std::uint32_t> adjmask(V, 0);
        for (const auto& [l, r] : H.edges()) {
            adjmask[l] |= std::uint32_t(1) << (n + r);
            adjmask[n + r] |= std::uint32_t(1) << l;
        }
        const std::uint32_t full = (V >= 32) ? ~std::uint32_t(0) : (std::uint32_t(1) << V) - 1;
        std::vector<std::uint16_t> inside(std::size_t(full) + 1);
        inside[0] = 0;
        for (std::uint32_t m = 1; m <= full; ++m) {
            std::uint32_t rest = m & (m - 1);
            int low = std::countr_zero(m);
            inside[m] = std::uint16_t(inside[rest] + std::popcount(adjmask[low] & rest));
            int s = std::popcount(m);
            if (double(s) <= size_cap && double(inside[m]) > double(s) * per_vertex) {
                std::ostringstream w;
                w << "vertex set of size " << s << " spans " << inside[m] << " edges > "
                  << double(s) * per_vertex;
                return {false, true, w.str()};
            }
        }
        return {true, true, {}};
    }

    // Peeling mode: repeatedly delete a min-degree vertex.  If every deleted
    // vertex had degree <= beta * n at deletion time, no qualifying set can
    // exceed the edge bound and the verdict is certified.  Any peeling suffix
    // of qualifying size that exceeds the bound is a concrete violation.
    std::vector<int> deg(V);
    std::vector<char> alive(V, 1);
    long long edges_left = H.edge_count();
    int alive_count = V;
    for (int v = 0; v < V; ++v) deg[v] = H.degree(v);
    bool certificate = true;
    while (alive_count > 0) {
        if (double(alive_count) <= size_cap &&
            double(edges_left) > double(alive_count) * per_vertex) {
            std::ostringstream w;
            w << "peeling suffix of size " << alive_count << " spans " << edges_left
              << " edges > " << double(alive_count) * per_vertex;
            return {false, true, w.str()};
        }
        int best = -1;
        for (int v = 0; v < V; ++v)
            if (alive[v] && (best < 0 || deg[v] < deg[best])) best = v;
        if (double(deg[best]) > per_vertex) certificate = false;
        alive[best] = 0;
        --alive_count;
        edges_left -= deg[best];
        for (const auto& [nbr, id] : H.adj(best))
            if (alive[nbr]) --deg[nbr];
    }
    return {true, certificate, {}};
}

CheckResult is_quasirandom(const BiGraph& H, double delta, double delta_size, double eta,
                           double p, const CheckOptions& opts) {
    CheckResult reg = is_D_regular(H, DegreeBand{p * double(H.n()), delta});
    if (!reg.ok) {
        reg.witness = "regularity: " + reg.witness;
        return reg;
    }
    CheckResult sp = is_sparse(H, 3.0 * delta_size, eta * p, opts);
    if (!sp.ok) {
        sp.witness = "sparseness: " + sp.witness;
        return sp;
    }
    CheckResult dn = is_dense(H, delta, delta_size, p, opts);
    if (!dn.ok) {
        dn.witness = "density: " + dn.witness;
        return dn;
    }
    return {true, reg.certified && sp.certified && dn.certified, {}};
}

namespace {

// Maximum system of vertices t, each assigned a distinct unordered pair of S
// members adjacent to t.  Kuhn's algorithm on the (t, pair) incidence.
int max_distinct_pair_system(const BiGraph& H, const std::vector<int>& S, int need) {
    const int k = int(S.size());
    std::vector<int> pos(H.vertex_count(), -1);
    for (int i = 0; i < k; ++i) pos[S[i]] = i;

    auto pair_id = [&](int a, int b) {  // a < b, indices into S
        return a * k + b;
    };
    std::vector<std::vector<int>> options;  // per candidate t: available pair ids
    for (int t = 0; t < H.vertex_count(); ++t) {
        if (pos[t] >= 0) continue;
        std::vector<int> in_S;
        for (const auto& [nbr, id] : H.adj(t))
            if (pos[nbr] >= 0) in_S.push_back(pos[nbr]);
        if (in_S.size() < 2) continue;
        std::sort(in_S.begin(), in_S.end());
        std::vector<int> opts_t;
        for (std::size_t i = 0; i < in_S.size(); ++i)
            for (std::size_t j = i + 1; j < in_S.size(); ++j)
                opts_t.push_back(pair_id(in_S[i], in_S[j]));
        options.push_back(std::move(opts_t));
    }

    std::vector<int> owner(k * k, -1);  // pair id -> index into options
    std::vector<char> seen;
    std::vector<int> match_of(options.size(), -1);

    auto augment = [&](auto&& self, int t) -> bool {
        for (int pid : options[t]) {
            if (seen[pid]) continue;
            seen[pid] = 1;
            if (owner[pid] < 0 || self(self, owner[pid])) {
                owner[pid] = t;
                match_of[t] = pid;
                return true;
            }
        }
        return false;
    };

    int matched = 0;
    for (std::size_t t = 0; t < options.size() && matched < need; ++t) {
        seen.assign(k * k, 0);
        if (augment(augment, int(t))) ++matched;
    }
    return matched;
}

}  // namespace

CheckResult check_sparse2(const BiGraph& H, const CheckOptions& opts) {
    const int n = H.n();
    const double root = std::sqrt(double(n));
    bool any_candidate_size = false;
    bool exhaustive = true;
    Rng rng(opts.seed, opts.stream);

    for (int k = 1; 20.0 * double(k) < root; ++k) {
        // A system of 20k distinct pairs needs at least that many pairs inside
        // one side of S, so |S| below 41 can never support one.
        int need = 20 * k;
        if (k * (k - 1) / 2 < need) continue;
        any_candidate_size = true;

        double log_comb = 0;  // log of C(2n, k), to decide enumeration vs sampling
        for (int i = 0; i < k; ++i)
            log_comb += std::log2(double(2 * n - i) / double(i + 1));
        if (log_comb > 22) {
            exhaustive = false;
            for (int t = 0; t < opts.samples; ++t) {
                std::vector<int> S;
                for (auto i : rng.sample_indices(2 * n, k)) S.push_back(int(i));
                if (max_distinct_pair_system(H, S, need) >= need) {
                    std::ostringstream w;
                    w << "found S of size " << k << " with a distinct-pair system of size "
                      << need;
                    return {false, true, w.str()};
                }
            }
        } else {
            std::vector<int> S(k);
            auto rec = [&](auto&& self, int idx, int start) -> bool {
                if (idx == k) return max_distinct_pair_system(H, S, need) >= need;
                for (int v = start; v <= 2 * n - (k - idx); ++v) {
                    S[idx] = v;
                    if (self(self, idx + 1, v + 1)) return true;
                }
                return false;
            };
            if (rec(rec, 0, 0)) {
                std::ostringstream w;
                w << "found S of size " << k << " with a distinct-pair system of size " << need;
                return {false, true, w.str()};
            }
        }
    }
    // No qualifying size at all is itself a certificate.
    return {true, !any_candidate_size || exhaustive, {}};
}

std::vector<int> degeneracy_order(const BiGraph& H, const std::vector<int>& V) {
    std::vector<int> pos(H.vertex_count(), -1);
    for (std::size_t i = 0; i < V.size(); ++i) {
        if (V[i] < 0 || V[i] >= H.vertex_count())
            throw std::invalid_argument("degeneracy_order: vertex out of range");
        if (pos[V[i]] >= 0) throw std::invalid_argument("degeneracy_order: duplicate vertex");
        pos[V[i]] = int(i);
    }
    std::vector<int> deg(V.size(), 0);
    std::vector<char> alive(V.size(), 1);
    for (std::size_t i = 0; i < V.size(); ++i)
        for (const auto& [nbr, id] : H.adj(V[i]))
            if (pos[nbr] >= 0) ++deg[i];

    std::vector<int> deleted;
    deleted.reserve(V.size());
    for (std::size_t step = 0; step < V.size(); ++step) {
        int best = -1;
        for (std::size_t i = 0; i < V.size(); ++i) {
            if (!alive[i]) continue;
            if (best < 0 || deg[i] < deg[best] || (deg[i] == deg[best] && V[i] < V[best]))
                best = int(i);
        }
        alive[best] = 0;
        deleted.push_back(V[best]);
        for (const auto& [nbr, id] : H.adj(V[best]))
            if (pos[nbr] >= 0 && alive[pos[nbr]]) --deg[pos[nbr]];
    }
    std::reverse(deleted.begin(), deleted.end());
    return deleted;
}

namespace {

int parse_int(const std::string& tok, int line_no, const char* what) {
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string("expected integer for ") + what + ", got '" + tok + "'",
                          line_no);
    }
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

BiGraph read_graph(std::istream& in) {
    std::string line;
    int line_no = 0;
    // Header.
    if (!std::getline(in, line)) throw FormatError("missing header", 1);
    ++line_no;
    auto head = split_ws(line);
    if (head.size() != 2) throw FormatError("header must be 'n m'", line_no);
    int n = parse_int(head[0], line_no, "n");
    int m = parse_int(head[1], line_no, "m");
    if (n <= 0) throw FormatError("n must be positive", line_no);
    if (m < 0) throw FormatError("m must be non-negative", line_no);

    BiGraph H(n);
    int seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() != 2) throw FormatError("edge line must be 'u v'", line_no);
        int u = parse_int(toks[0], line_no, "u");
        int v = parse_int(toks[1], line_no, "v");
        if (u < 0 || u >= n) throw FormatError("left endpoint out of range", line_no);
        if (v < 0 || v >= n) throw FormatError("right endpoint out of range", line_no);
        if (H.has_edge(u, v)) throw FormatError("duplicate edge", line_no);
        if (seen == m) throw FormatError("more edges than declared", line_no);
        H.add_edge(u, v);
        ++seen;
    }
    if (seen != m) throw FormatError("fewer edges than declared", line_no + 1);
    return H;
}

BiGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return read_graph(in);
}

void write_graph(std::ostream& out, const BiGraph& H) {
    out << H.n() << ' ' << H.edge_count() << '\n';
    auto sorted = H.edges();
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [u, v] : sorted) out << u << ' ' << v << '\n';
}

void write_graph_file(const std::string& path, const BiGraph& H) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_graph(out, H);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace bifactor
