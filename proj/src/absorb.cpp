#include "bifactor/absorb.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "bifactor/matching.hpp"
#include "bifactor/spread.hpp"

namespace bifactor {

BiGraph Vortex::level_union(int lv) const {
    const auto& level = pieces.at(lv);
    if (level.empty()) throw std::invalid_argument("Vortex::level_union: empty level");
    BiGraph U(level[0].n());
    for (const auto& piece : level)
        for (const auto& [l, r] : piece.edges()) U.add_edge(l, r);
    return U;
}

void Vortex::validate(const BiGraph& H) const {
    if (ell < 1 || int(pieces.size()) != ell)
        throw std::invalid_argument("vortex: level count does not match ell");
    for (int lv = 0; lv < ell; ++lv)
        if (int(pieces[lv].size()) != (1 << (ell - 1 - lv)))
            throw std::invalid_argument("vortex: wrong piece count at level " +
                                        std::to_string(lv));
    BiGraph acc(H.n());
    for (const auto& level : pieces)
        for (const auto& piece : level) {
            if (piece.n() != H.n())
                throw std::invalid_argument("vortex: piece on a different vertex set");
            for (const auto& [l, r] : piece.edges()) {
                if (!H.has_edge(l, r))
                    throw std::invalid_argument("vortex: piece edge not in the host");
                acc.add_edge(l, r);  // throws on a duplicate across pieces
            }
        }
    if (acc.edge_count() != H.edge_count())
        throw std::invalid_argument("vortex: pieces do not cover the host");
}

Vortex build_vortex(const BiGraph& H, const Params& params, std::uint64_t seed) {
    if (!is_vortex_palette(params.m))
        throw std::invalid_argument("build_vortex: m must be a power of two minus one");
    int ell = 0;
    while ((1 << ell) - 1 != params.m) ++ell;

    Vortex vx;
    vx.ell = ell;
    if (ell == 1) {
        vx.pieces = {{H}};
        return vx;
    }
    RunResult run = run_greedy(H, params, seed);
    if (!run.ok())
        throw GreedyAborted(run.abort ? *run.abort
                                      : AbortReport{AbortReason::UnsafeCount, 0, -1, "stalled"});
    std::vector<BiGraph> classes = run.factorisation->class_graphs();
    int start = 0;
    for (int lv = 0; lv < ell; ++lv) {
        int cnt = 1 << (ell - 1 - lv);
        vx.pieces.emplace_back(classes.begin() + start, classes.begin() + start + cnt);
        start += cnt;
    }
    return vx;
}

RegulariseResult regularise(const BiGraph& H_piece, const BiGraph& L, double delta, double p,
                            double x) {
    const int n = H_piece.n();
    if (L.n() != n) throw std::invalid_argument("regularise: vertex sets differ");
    for (const auto& [l, r] : L.edges())
        if (H_piece.has_edge(l, r))
            throw std::invalid_argument("regularise: L and the donor piece share an edge");

    const int V = 2 * n;
    RegulariseResult res;
    res.target = 0;
    for (int v = 0; v < V; ++v) res.target = std::max(res.target, L.degree(v));

    res.input_banded = true;
    for (int v = 0; v < V; ++v) {
        double dv = double(L.degree(v));
        if (dv < (x - delta) * p * n || dv > (x + delta) * p * n) res.input_banded = false;
    }

    // Nodes: 0 source, 1..n left, n+1..2n right, 2n+1 sink.
    FlowNetwork net(V + 2);
    long long want = 0;
    for (int i = 0; i < n; ++i) {
        int need = res.target - L.degree(i);
        net.add_edge(0, 1 + i, need);
        want += need;
    }
    for (int r = 0; r < n; ++r)
        net.add_edge(n + 1 + r, V + 1, res.target - L.degree(n + r));
    std::vector<int> handle(H_piece.edge_count());
    for (int id = 0; id < H_piece.edge_count(); ++id) {
        auto [l, r] = H_piece.edge(id);
        handle[id] = net.add_edge(1 + l, n + 1 + r, 1);
    }
    long long got = net.max_flow(0, V + 1);
    if (got < want) {
        std::ostringstream os;
        os << "regularise: deficiency flow moved " << got << " of " << want << " units";
        throw Infeasible(os.str());
    }

    BiGraph R(n);
    for (const auto& [l, r] : L.edges()) R.add_edge(l, r);
    std::vector<int> overlap(V, 0);
    for (int id = 0; id < H_piece.edge_count(); ++id)
        if (net.flow_on(handle[id]) > 0) {
            auto [l, r] = H_piece.edge(id);
            R.add_edge(l, r);
            ++overlap[l];
            ++overlap[n + r];
        }
    res.max_overlap = V > 0 ? *std::max_element(overlap.begin(), overlap.end()) : 0;
    res.overlap_bound = 4.0 * delta * p * n;
    res.overlap_ok = double(res.max_overlap) < res.overlap_bound;
    res.R = std::move(R);
    return res;
}

AbsorbOutcome vortex_absorb(const Vortex& vx, const Params& params, std::uint64_t seed) {
    if (vx.ell < 1 || int(vx.pieces.size()) != vx.ell)
        throw std::invalid_argument("vortex_absorb: malformed vortex");
    const int n = vx.pieces[0][0].n();
    const int V = 2 * n;

    long long total = 0;
    for (const auto& level : vx.pieces)
        for (const auto& piece : level) total += piece.edge_count();

    AbsorbOutcome out;
    BiGraph L = vx.level_union(0);
    long long placed = 0;

    for (int lv = 0; lv + 1 < vx.ell; ++lv) {
        const int pass = lv + 1;  // 1-based, for reports
        const auto& targets = vx.pieces[lv + 1];
        const int mprime = int(targets.size());

        double di = (double(L.edge_count()) / n) / mprime;
        out.d_values.push_back(di);
        {
            double lo = (1.0 - 2.1 * params.delta) * mprime * di;
            double hi = (1.0 + 2.1 * params.delta) * mprime * di;
            for (int v = 0; v < V; ++v)
                if (double(L.degree(v)) < lo || double(L.degree(v)) > hi) {
                    std::ostringstream os;
                    os << "pass " << pass << ": leftover degree " << L.degree(v)
                       << " at vertex " << v << " outside [" << lo << ", " << hi << "]";
                    throw RegularityViolation(os.str());
                }
            if (di < (1.0 - 40.0 * params.delta) * 2.0 * params.d ||
                di > (1.0 + 40.0 * params.delta) * 2.0 * params.d) {
                std::ostringstream os;
                os << "pass " << pass << ": split degree " << di
                   << " outside the tracked band around " << 2.0 * params.d;
                throw RegularityViolation(os.str());
            }
        }

        std::vector<BiGraph> parts;
        if (mprime == 1) {
            // A one-class split is the identity; the process adds nothing.
            parts.push_back(L);
        } else {
            Params q = params;
            q.d = di;
            q.m = mprime;
            try {
                RunResult run = run_greedy(L, q, splitmix64(seed ^ std::uint64_t(pass)));
                if (!run.ok())
                    throw LevelAbort(pass, run.abort ? "split colouring aborted: " +
                                                           to_string(run.abort->reason) +
                                                           " (" + run.abort->detail + ")"
                                                     : "split colouring stalled");
                parts = run.factorisation->class_graphs();
            } catch (const std::invalid_argument& e) {
                throw LevelAbort(pass, std::string("split rejected: ") + e.what());
            }
        }

        BiGraph next_left(n);
        for (int j = 0; j < mprime; ++j) {
            double p_piece = double(targets[j].edge_count()) / (double(n) * double(n));
            double x = p_piece > 0 ? di / (p_piece * n) : 0.0;
            RegulariseResult reg;
            try {
                reg = regularise(targets[j], parts[j], params.delta, p_piece, x);
            } catch (const Infeasible& e) {
                throw LevelAbort(pass, e.what());
            }
            out.overlaps.push_back(
                {pass, j, reg.target, reg.max_overlap, reg.overlap_bound, reg.overlap_ok});
            out.degrees.push_back(reg.target);
            placed += reg.R.edge_count();
            for (const auto& [l, r] : targets[j].edges())
                if (!reg.R.has_edge(l, r)) next_left.add_edge(l, r);
            out.classes.push_back(std::move(reg.R));
        }

        long long rest = 0;
        for (int lv2 = lv + 2; lv2 < vx.ell; ++lv2)
            for (const auto& piece : vx.pieces[lv2]) rest += piece.edge_count();
        if (placed + next_left.edge_count() + rest != total)
            throw std::logic_error("vortex_absorb: edge conservation failed after pass " +
                                   std::to_string(pass));
        L = std::move(next_left);
    }

    // Whatever the last pass left unused is the residual class; it must come
    // out exactly regular.
    for (int v = 1; v < V; ++v)
        if (L.degree(v) != L.degree(0)) {
            std::ostringstream os;
            os << "residual class is not regular: degree " << L.degree(v) << " at vertex " << v
               << " vs " << L.degree(0) << " at vertex 0";
            throw RegularityViolation(os.str());
        }
    out.degrees.push_back(n > 0 ? L.degree(0) : 0);
    out.classes.push_back(std::move(L));
    return out;
}

std::vector<int> extract_perfect_matching(const BiGraph& G, Rng& rng) {
    if (G.n() == 0 || G.edge_count() == 0)
        throw std::invalid_argument("extract_perfect_matching: empty graph");
    if (G.min_degree() != G.max_degree())
        throw std::invalid_argument("extract_perfect_matching: graph is not regular");
    return sample_spread_matching(G, rng, 0);
}

std::pair<BiGraph, BiGraph> euler_halve(const BiGraph& G) {
    const int V = 2 * G.n();
    for (int v = 0; v < V; ++v)
        if (G.degree(v) % 2 != 0)
            throw std::invalid_argument("euler_halve: odd degree at vertex " +
                                        std::to_string(v));

    std::vector<char> used(G.edge_count(), 0);
    std::vector<std::size_t> it(V, 0);
    BiGraph A(G.n()), B(G.n());
    bool to_a = true;

    for (int v0 = 0; v0 < V; ++v0) {
        if (it[v0] >= G.adj(v0).size()) continue;
        // Hierholzer with an explicit stack; edges come out in circuit order
        // (reversed, which is still a circuit) and alternate between halves.
        std::vector<std::pair<int, int>> stack{{v0, -1}};
        while (!stack.empty()) {
            int v = stack.back().first;
            const auto& adj = G.adj(v);
            while (it[v] < adj.size() && used[adj[it[v]].second]) ++it[v];
            if (it[v] < adj.size()) {
                auto [to, id] = adj[it[v]];
                used[id] = 1;
                stack.emplace_back(to, id);
            } else {
                int id = stack.back().second;
                stack.pop_back();
                if (id >= 0) {
                    auto [l, r] = G.edge(id);
                    (to_a ? A : B).add_edge(l, r);
                    to_a = !to_a;
                }
            }
        }
    }
    return {std::move(A), std::move(B)};
}

namespace {

// Splits a set of host edges forming an exactly r-regular spanning graph
// into r perfect matchings (as host edge-id lists).
std::vector<std::vector<int>> split_regular(const BiGraph& host, const std::vector<int>& ids,
                                            int r, Rng& rng) {
    if (r == 0) return {};
    if (r == 1) return {ids};

    const int n = host.n();
    BiGraph B(n);
    std::unordered_map<long long, int> host_id;
    host_id.reserve(ids.size() * 2);
    for (int id : ids) {
        auto [l, rr] = host.edge(id);
        B.add_edge(l, rr);
        host_id[(long long)l * n + rr] = id;
    }

    if (r % 2 == 0) {
        auto [ha, hb] = euler_halve(B);
        std::vector<int> ia, ib;
        for (const auto& [l, rr] : ha.edges()) ia.push_back(host_id.at((long long)l * n + rr));
        for (const auto& [l, rr] : hb.edges()) ib.push_back(host_id.at((long long)l * n + rr));
        auto out = split_regular(host, ia, r / 2, rng);
        auto more = split_regular(host, ib, r / 2, rng);
        out.insert(out.end(), std::make_move_iterator(more.begin()),
                   std::make_move_iterator(more.end()));
        return out;
    }

    std::vector<int> match = extract_perfect_matching(B, rng);
    std::vector<char> taken(host.edge_count(), 0);
    std::vector<int> first;
    for (int l = 0; l < n; ++l) {
        int id = host_id.at((long long)l * n + match[l]);
        first.push_back(id);
        taken[id] = 1;
    }
    std::vector<int> rest;
    for (int id : ids)
        if (!taken[id]) rest.push_back(id);
    std::vector<std::vector<int>> out{std::move(first)};
    auto more = split_regular(host, rest, r - 1, rng);
    out.insert(out.end(), std::make_move_iterator(more.begin()),
               std::make_move_iterator(more.end()));
    return out;
}

}  // namespace

Factorisation refine_to_one_factorisation(const Factorisation& F, std::uint64_t seed) {
    if (!F.is_complete())
        throw std::invalid_argument("refine_to_one_factorisation: input has uncoloured edges");
    const BiGraph& H = F.host();
    const int V = 2 * H.n();

    std::vector<std::vector<int>> by_class(F.m());
    for (int id = 0; id < H.edge_count(); ++id) by_class[F.colour_of(id)].push_back(id);

    // Each class must be exactly regular; its degree is its matching count.
    std::vector<int> r_of(F.m(), 0);
    int total = 0;
    for (int c = 0; c < F.m(); ++c) {
        std::vector<int> deg(V, 0);
        for (int id : by_class[c]) {
            auto [l, r] = H.edge(id);
            ++deg[l];
            ++deg[H.right_global(r)];
        }
        for (int v = 0; v < V; ++v)
            if (deg[v] != deg[0])
                throw std::invalid_argument("refine_to_one_factorisation: class " +
                                            std::to_string(c) + " is not regular");
        r_of[c] = V > 0 ? deg[0] : 0;
        total += r_of[c];
    }

    Factorisation out(H, std::max(total, 1));
    Rng rng(seed, streams::absorb);
    int offset = 0;
    for (int c = 0; c < F.m(); ++c) {
        auto matchings = split_regular(H, by_class[c], r_of[c], rng);
        for (std::size_t k = 0; k < matchings.size(); ++k)
            for (int id : matchings[k]) out.set_colour(id, offset + int(k));
        offset += r_of[c];
    }
    return out;
}

}  // namespace bifactor
