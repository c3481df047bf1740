#include "bifactor/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bifactor/spread.hpp"

namespace bifactor {

double f_threshold(long long i, double eta, double eps, double d, int m) {
    if (i < 0) throw std::invalid_argument("f_threshold: i must be non-negative");
    return 3.0 * eta * std::pow(1.0 + 1.0 / (eps * eps * d * m), double(i));
}

std::string to_string(AbortReason r) {
    switch (r) {
        case AbortReason::UnsafeCount: return "unsafe-count";
        case AbortReason::BadColour: return "bad-colour";
        case AbortReason::NoEligibleColour: return "no-eligible-colour";
        case AbortReason::CleanRetryExhausted: return "clean-retry-exhausted";
        case AbortReason::NoPerfectMatching: return "no-perfect-matching";
    }
    return "unknown";
}

GreedyProcess::GreedyProcess(const BiGraph& H, const Params& params, std::uint64_t seed)
    : params_(params), fact_(H, params.m), rng_(seed, streams::greedy) {
    params_.validate();
    if (params_.d * params_.m > double(H.max_degree()))
        throw std::invalid_argument("greedy: d*m exceeds the host's maximum degree");

    const int V = H.vertex_count();
    const int m = params_.m;
    CheckOptions opts;
    opts.seed = seed;
    opts.stream = streams::precheck;
    precheck_ = is_quasirandom(H, params_.delta, params_.delta_prime, params_.eta,
                               params_.p(), opts);
    inv_.host_sparse_gate =
        is_sparse(H, std::pow(double(params_.n), -0.1), 6.0 / double(params_.n), opts).ok;

    col_.assign(V, 0);
    uncol_deg_.resize(V);
    for (int v = 0; v < V; ++v) uncol_deg_[v] = H.degree(v);
    colc_.assign(std::size_t(V) * m, 0);
    ever_full_.assign(std::size_t(V) * m, 0);
    ever_sparse_.assign(std::size_t(V) * m, 0);
    full_nbrs_.assign(std::size_t(V) * m, 0);
    sparse_nbrs_.assign(std::size_t(V) * m, 0);
    full_colours_.assign(V, 0);
    sparse_colours_.assign(V, 0);
    fullsparse_count_.assign(m, 0);
    atypical_.assign(V, 0);
    exceptional_.assign(V, 0);
    blocked_.assign(V, 0);
    attacked_.assign(V, 0);
    blocking_.assign(V, 0);
    attacking_.assign(V, 0);
    dangerous_.assign(V, 0);
    unsafe_.assign(V, 0);
    cleaned_.assign(V, 0);
    in_queue_.assign(V, 0);
    exceptional_edges_.assign(V, 0);
    unsafe_nbrs_.assign(V, 0);
    cleaned_nbrs_.assign(V, 0);
}

void GreedyProcess::reseed(std::uint64_t seed, std::uint64_t stream) {
    rng_ = Rng(seed, stream);
}

bool GreedyProcess::is_early(long long i) const {
    return double(i) < (1.0 - params_.eps) * params_.d * params_.m / 2.0;
}

bool GreedyProcess::full_cond(int v, int c, long long i) const {
    double cc = double(colc_[idx(v, c)]);
    if (is_early(i)) return cc >= par_at(i) + params_.delta * params_.d;
    return cc >= (1.0 + 2.0 * params_.delta) * params_.d - 1.0;
}

bool GreedyProcess::sparse_cond(int v, int c, long long i) const {
    return double(colc_[idx(v, c)]) <= par_at(i) - params_.delta * params_.d;
}

std::vector<int> GreedyProcess::uncoloured_edges_at(int v) const {
    std::vector<int> out;
    for (const auto& [nbr, id] : host().adj(v))
        if (!fact_.is_coloured(id)) out.push_back(id);
    return out;
}

void GreedyProcess::latch_full(int v, int c) {
    auto i = idx(v, c);
    if (ever_full_[i]) return;
    ever_full_[i] = 1;
    if (!ever_sparse_[i]) ++fullsparse_count_[c];
    if (double(++full_colours_[v]) >= params_.theta * params_.theta * params_.m)
        blocking_[v] = 1;
    double blocked_thr = std::pow(params_.d, 0.9) * params_.m;
    for (const auto& [nbr, id] : host().adj(v))
        if (double(++full_nbrs_[idx(nbr, c)]) >= blocked_thr) blocked_[nbr] = 1;
}

void GreedyProcess::latch_sparse(int v, int c) {
    auto i = idx(v, c);
    if (ever_sparse_[i]) return;
    ever_sparse_[i] = 1;
    if (!ever_full_[i]) ++fullsparse_count_[c];
    if (double(++sparse_colours_[v]) >= params_.theta * params_.theta * params_.m)
        attacking_[v] = 1;
    double attacked_thr = std::pow(params_.d, 0.9) * params_.m;
    for (const auto& [nbr, id] : host().adj(v))
        if (double(++sparse_nbrs_[idx(nbr, c)]) >= attacked_thr) attacked_[nbr] = 1;
}

void GreedyProcess::latch_unsafe(int v, std::vector<int>& newly) {
    if (unsafe_[v]) return;
    unsafe_[v] = 1;
    ++unsafe_count_;
    for (const auto& [nbr, id] : host().adj(v)) ++unsafe_nbrs_[nbr];
    newly.push_back(v);
}

void GreedyProcess::refresh_after_colouring(int v, int c) {
    ++inv_.colc_cap_checks;
    if (double(colc_[idx(v, c)]) > (1.0 + 2.0 * params_.delta) * params_.d)
        ++inv_.colc_cap_violations;
    if (full_cond(v, c, round_)) latch_full(v, c);
    if (is_early(round_) &&
        std::abs(double(col_[v]) - 2.0 * double(round_)) >
            f_threshold(round_, params_.eta, params_.eps, params_.d, params_.m) *
                params_.d * params_.m)
        atypical_[v] = 1;
}

void GreedyProcess::colour_edge(int eid, int c, bool exceptional_kind,
                                std::vector<int>& newly_unsafe) {
    auto [l, r] = host().edge(eid);
    int ends[2] = {l, host().right_global(r)};
    // Flags are read as of the moment just before the edge is placed.
    for (int w : ends)
        if (atypical_[w] || exceptional_[w] || blocked_[w] || attacked_[w] || blocking_[w] ||
            attacking_[w])
            dangerous_[w] = 1;
    for (int w : ends)
        if (!unsafe_[w] &&
            (dangerous_[w] ||
             double(unsafe_nbrs_[w]) > 2.0 * params_.eta * params_.d * params_.m))
            latch_unsafe(w, newly_unsafe);

    fact_.set_colour(eid, c);
    for (int w : ends) {
        ++col_[w];
        ++colc_[idx(w, c)];
        --uncol_deg_[w];
    }
    if (exceptional_kind)
        for (int w : ends)
            if (double(++exceptional_edges_[w]) >= params_.theta * params_.d * params_.m)
                exceptional_[w] = 1;
    for (int w : ends) refresh_after_colouring(w, c);
}

void GreedyProcess::sweep_round_start() {
    const int V = host().vertex_count();
    double fdm = f_threshold(round_, params_.eta, params_.eps, params_.d, params_.m) *
                 params_.d * params_.m;
    bool window_active =
        is_early(round_) &&
        f_threshold(round_, params_.eta, params_.eps, params_.d, params_.m) <=
            std::pow(params_.eta, 0.9);
    double window = std::pow(params_.eta, 0.9) * params_.d * params_.m;
    for (int v = 0; v < V; ++v) {
        for (int c = 0; c < params_.m; ++c) {
            if (full_cond(v, c, round_)) latch_full(v, c);
            if (sparse_cond(v, c, round_)) latch_sparse(v, c);
        }
        double dev = std::abs(double(col_[v]) - 2.0 * double(round_));
        if (is_early(round_) && dev > fdm) atypical_[v] = 1;
        if (window_active && !unsafe_[v]) {
            ++inv_.col_window_checks;
            if (dev > window) ++inv_.col_window_violations;
        }
    }
}

void GreedyProcess::log_round() {
    RoundStats rs;
    rs.round = round_;
    rs.coloured = fact_.coloured_count();
    const int V = host().vertex_count();
    for (int v = 0; v < V; ++v) {
        rs.atypical += atypical_[v];
        rs.exceptional += exceptional_[v];
        rs.blocked += blocked_[v];
        rs.attacked += attacked_[v];
        rs.blocking += blocking_[v];
        rs.attacking += attacking_[v];
        rs.dangerous += dangerous_[v];
        rs.unsafe += unsafe_[v];
        rs.cleaned += cleaned_[v];
    }
    round_log_.push_back(rs);
}

void GreedyProcess::check_aborts() {
    if (abort_) return;
    if (double(unsafe_count_) >= params_.theta * params_.n) {
        std::ostringstream os;
        os << unsafe_count_ << " unsafe vertices";
        abort_ = AbortReport{AbortReason::UnsafeCount, step_, -1, os.str()};
        return;
    }
    for (int c = 0; c < params_.m; ++c)
        if (double(fullsparse_count_[c]) >=
            std::pow(params_.theta, 4.0) * double(params_.n)) {
            std::ostringstream os;
            os << fullsparse_count_[c] << " vertices ever full or sparse for colour " << c;
            abort_ = AbortReport{AbortReason::BadColour, step_, c, os.str()};
            return;
        }
}

void GreedyProcess::push_trace(StepTrace&& tr) {
    if (tracing_) trace_.push_back(std::move(tr));
}

GreedyProcess::BatchResult GreedyProcess::build_batch(
    const std::vector<int>& newly_unsafe) const {
    const BiGraph& H = host();
    const int V = H.vertex_count();
    BatchResult res;

    std::vector<char> inB(V, 0);
    std::vector<int> nbrs_in_B(V, 0);
    std::vector<int> work;
    for (int v : newly_unsafe)
        if (!inB[v]) {
            inB[v] = 1;
            work.push_back(v);
        }
    // Closure: absorb any safe vertex with at least 12 neighbours inside.
    for (std::size_t q = 0; q < work.size(); ++q) {
        for (const auto& [nbr, id] : H.adj(work[q])) {
            ++nbrs_in_B[nbr];
            if (!inB[nbr] && !unsafe_[nbr] && nbrs_in_B[nbr] >= 12) {
                inB[nbr] = 1;
                work.push_back(nbr);
            }
        }
    }
    res.B = work;
    std::sort(res.B.begin(), res.B.end());

    std::vector<int> local(V, -1);
    for (std::size_t i = 0; i < res.B.size(); ++i) local[res.B[i]] = int(i);

    // Internal degree within B decides membership of the thin core B'.
    std::vector<char> inBprime(V, 0);
    double thin = std::pow(params_.d, 0.1);
    for (int v : res.B) {
        int internal = 0;
        for (const auto& [nbr, id] : H.adj(v))
            if (inB[nbr]) ++internal;
        if (double(internal) < thin) {
            inBprime[v] = 1;
            res.Bprime.push_back(v);
        }
    }

    // Pairs joined directly or through a safe or thin middle vertex.
    const int k = int(res.B.size());
    std::vector<char> pair_mat(std::size_t(k) * k, 0);
    auto mark = [&](int a, int b) {
        pair_mat[std::size_t(a) * k + b] = 1;
        pair_mat[std::size_t(b) * k + a] = 1;
    };
    for (int v : res.B)
        for (const auto& [nbr, id] : H.adj(v)) {
            if (inB[nbr] && nbr > v) mark(local[v], local[nbr]);
            if (!unsafe_[nbr] || inBprime[nbr])
                for (const auto& [x, id2] : H.adj(nbr))
                    if (x > v && inB[x]) mark(local[v], local[x]);
        }
    std::vector<std::vector<int>> adj(k);
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (pair_mat[std::size_t(a) * k + b]) {
                adj[a].push_back(b);
                adj[b].push_back(a);
                res.HB_edges.emplace_back(res.B[a], res.B[b]);
            }

    // Degeneracy order of H_B: reversed min-degree deletion, ties by
    // smallest global id.
    std::vector<int> deg(k);
    std::vector<char> alive(k, 1);
    for (int a = 0; a < k; ++a) deg[a] = int(adj[a].size());
    std::vector<int> deleted;
    deleted.reserve(k);
    for (int s = 0; s < k; ++s) {
        int best = -1;
        for (int a = 0; a < k; ++a)
            if (alive[a] &&
                (best < 0 || deg[a] < deg[best] ||
                 (deg[a] == deg[best] && res.B[a] < res.B[best])))
                best = a;
        alive[best] = 0;
        deleted.push_back(res.B[best]);
        for (int b : adj[best])
            if (alive[b]) --deg[b];
    }
    res.order.assign(deleted.rbegin(), deleted.rend());
    return res;
}

void GreedyProcess::process_new_unsafe(std::vector<int> newly, StepTrace* tr) {
    if (newly.empty()) return;
    BatchResult br = build_batch(newly);
    // Closure members join the unsafe set (they are queued for cleaning),
    // without being marked dangerous.
    std::vector<int> sink;
    for (int v : br.B) latch_unsafe(v, sink);

    if (inv_.host_sparse_gate) {
        ++inv_.batch_checks;
        double dm = params_.d * params_.m;
        if (double(newly.size()) > dm) ++inv_.batch_initial_violations;
        if (double(br.B.size()) > 2.0 * dm) ++inv_.batch_closed_violations;
    }
    for (int v : br.order)
        if (!in_queue_[v] && !cleaned_[v]) {
            in_queue_[v] = 1;
            queue_.push_back(v);
        }
    if (tr) tr->batch = br.order;
}

GreedyProcess::BvResult GreedyProcess::build_Bv(int v) {
    BvResult res;
    res.v = v;
    for (const auto& [nbr, id] : host().adj(v))
        if (!fact_.is_coloured(id)) {
            res.X.push_back(nbr);
            res.edge_of.push_back(id);
        }
    const int x = int(res.X.size());
    if (x == 0) {
        res.ok = true;
        return res;
    }

    for (int c = 0; c < params_.m; ++c) {
        if (full_cond(v, c, round_)) continue;
        int full_members = 0;
        for (int u : res.X)
            if (full_cond(u, c, round_)) ++full_members;
        if (double(full_members) <= params_.theta * double(x)) res.palette.push_back(c);
    }
    ++inv_.palette_checks;
    if (double(res.palette.size()) < (1.0 - 3.0 * params_.theta) * params_.m)
        ++inv_.palette_violations;
    if (res.palette.empty()) return res;  // ok stays false: nothing to colour with

    auto build_graph = [&]() {
        BiGraph B(x);
        for (int ui = 0; ui < x; ++ui)
            for (int yj = 0; yj < x; ++yj)
                if (!full_cond(res.X[ui], res.Y[yj], round_)) B.add_edge(ui, yj);
        return B;
    };

    const int csize = int(res.palette.size());
    if (x >= csize) {
        // Deterministic multiplicities as even as possible, low colours first.
        int base = x / csize, extra = x % csize;
        for (int j = 0; j < csize; ++j)
            for (int t = 0; t < base + (j < extra ? 1 : 0); ++t)
                res.Y.push_back(res.palette[j]);
        res.graph = build_graph();
        res.multiset = true;
        res.ok = true;
        return res;
    }

    // Uniform random colour subset, resampled until the acceptance event
    // (minimum degree of the availability graph large enough) holds.
    double need = (1.0 - std::pow(params_.theta, 0.1)) * double(x);
    for (int attempt = 1; attempt <= params_.clean_retry_cap; ++attempt) {
        res.attempts = attempt;
        auto pick = rng_.sample_indices(csize, x);
        res.Y.clear();
        for (auto j : pick) res.Y.push_back(res.palette[j]);
        res.graph = build_graph();
        int mindeg = res.graph.min_degree();
        if (double(mindeg) >= need) {
            res.ok = true;
            return res;
        }
    }
    return res;
}

bool GreedyProcess::clean_vertex(int v) {
    ++step_;
    StepTrace tr{StepTrace::Kind::Cleaning, step_, round_, v, {}, {}};
    if (cleaned_[v]) {
        push_trace(std::move(tr));
        return true;
    }
    BvResult bv = build_Bv(v);
    if (bv.X.empty()) {
        ++cstats_.cleanings;
        ++cstats_.empty_cleanings;
        cleaned_[v] = 1;
        for (const auto& [nbr, id] : host().adj(v)) ++cleaned_nbrs_[nbr];
        push_trace(std::move(tr));
        return true;
    }
    if (!bv.ok) {
        std::ostringstream os;
        if (bv.palette.empty())
            os << "no admissible colour at vertex " << v;
        else
            os << "acceptance event failed " << bv.attempts << " times at vertex " << v;
        cstats_.sample_attempts += bv.attempts;
        abort_ = AbortReport{AbortReason::CleanRetryExhausted, step_, v, os.str()};
        return false;
    }
    ++cstats_.cleanings;
    if (bv.multiset) {
        ++cstats_.multiset_builds;
    } else {
        cstats_.sample_attempts += bv.attempts;
        ++cstats_.sample_successes;
    }

    std::vector<int> match;
    try {
        match = sample_spread_matching(bv.graph, rng_, params_.matching_restart_cap);
    } catch (const RestartExhausted&) {
        std::ostringstream os;
        os << "availability graph at vertex " << v << " has no perfect matching";
        abort_ = AbortReport{AbortReason::NoPerfectMatching, step_, v, os.str()};
        return false;
    }

    // Colour the edges in increasing order of the far endpoint.
    std::vector<int> order(bv.X.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return bv.X[a] < bv.X[b]; });
    std::vector<int> newly;
    for (int ui : order) {
        int c = bv.Y[match[ui]];
        colour_edge(bv.edge_of[ui], c, false, newly);
        tr.coloured.emplace_back(bv.edge_of[ui], c);
    }
    cleaned_[v] = 1;
    for (const auto& [nbr, id] : host().adj(v)) ++cleaned_nbrs_[nbr];
    process_new_unsafe(std::move(newly), &tr);
    push_trace(std::move(tr));
    check_aborts();
    return !abort_.has_value();
}

void GreedyProcess::do_standard_step() {
    const int v = pos_;
    std::vector<int> candidates = uncoloured_edges_at(v);
    int eid = candidates[rng_.below(candidates.size())];
    int u = host().edge_other(eid, v);

    std::vector<int> eligible;
    for (int c = 0; c < params_.m; ++c)
        if (!full_cond(v, c, round_) && !full_cond(u, c, round_)) eligible.push_back(c);
    if (eligible.empty()) {
        std::ostringstream os;
        os << "no colour open at both ends of edge " << eid;
        abort_ = AbortReport{AbortReason::NoEligibleColour, step_, v, os.str()};
        return;
    }
    int c = eligible[rng_.below(eligible.size())];
    StepTrace tr{StepTrace::Kind::Standard, step_, round_, v, {}, {}};
    std::vector<int> newly;
    colour_edge(eid, c, false, newly);
    tr.coloured.emplace_back(eid, c);
    process_new_unsafe(std::move(newly), &tr);
    push_trace(std::move(tr));
}

void GreedyProcess::do_exceptional_step() {
    const int v = pos_;
    std::vector<int> candidates;
    for (const auto& [nbr, id] : host().adj(v))
        if (!fact_.is_coloured(id) && !full_cond(nbr, cstar_, round_)) candidates.push_back(id);
    if (candidates.empty()) {
        push_trace(StepTrace{StepTrace::Kind::Skip, step_, round_, v, {}, {}});
        return;
    }
    int eid = candidates[rng_.below(candidates.size())];
    StepTrace tr{StepTrace::Kind::Exceptional, step_, round_, v, {}, {}};
    std::vector<int> newly;
    colour_edge(eid, cstar_, true, newly);
    tr.coloured.emplace_back(eid, cstar_);
    process_new_unsafe(std::move(newly), &tr);
    push_trace(std::move(tr));
}

bool GreedyProcess::step() {
    if (abort_ || finished()) return false;

    if (pos_ == 0 && swept_round_ < round_) {
        sweep_round_start();
        swept_round_ = round_;
        log_round();
        check_aborts();
        if (abort_) return false;
    }

    while (!queue_.empty()) {
        int v = queue_.front();
        queue_.pop_front();
        in_queue_[v] = 0;
        if (!clean_vertex(v)) return false;
    }

    if (!cleaned_[pos_] && uncol_deg_[pos_] > 0) {
        ++step_;
        if (is_early(round_) && sparse_cond(pos_, cstar_, round_))
            do_exceptional_step();
        else
            do_standard_step();
    } else {
        ++step_;
        push_trace(StepTrace{StepTrace::Kind::Skip, step_, round_, pos_, {}, {}});
    }
    check_aborts();
    if (abort_) return false;

    if (++pos_ == host().vertex_count()) {
        pos_ = 0;
        ++round_;
        cstar_ = (cstar_ + 1) % params_.m;
    }
    return !finished();
}

void GreedyProcess::run_to_completion() {
    while (step()) {
    }
}

RunResult run_greedy(const BiGraph& H, const Params& params, std::uint64_t seed,
                     bool tracing) {
    GreedyProcess p(H, params, seed);
    p.set_tracing(tracing);
    p.run_to_completion();
    RunResult r;
    if (p.finished() && !p.aborted()) r.factorisation = p.colouring();
    r.abort = p.abort_report();
    r.quasirandom = p.quasirandom_precheck();
    r.rounds = p.round_log();
    r.cleaning = p.cleaning_stats();
    r.invariants = p.invariants();
    r.steps = p.step_count();
    r.rounds_total = p.round();
    return r;
}

std::vector<BiGraph> reduce_colours(const BiGraph& H, int m, int m_prime, Rng& rng) {
    if (m <= 0 || m_prime <= 0 || m_prime > m)
        throw std::invalid_argument("reduce_colours: need 0 < m_prime <= m");
    // Group g owns base or base+1 consecutive colours.
    std::vector<int> owner(m);
    int base = m / m_prime, extra = m % m_prime, at = 0;
    for (int g = 0; g < m_prime; ++g)
        for (int t = 0; t < base + (g < extra ? 1 : 0); ++t) owner[at++] = g;

    std::vector<BiGraph> out(m_prime, BiGraph(H.n()));
    for (const auto& [l, r] : H.edges()) out[owner[rng.below(std::uint64_t(m))]].add_edge(l, r);
    return out;
}

}  // namespace bifactor
