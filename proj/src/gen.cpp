#include "bifactor/gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

namespace bifactor {

namespace {

// Complete the partial matching over allowed pairs by augmenting paths,
// scanning rights in a per-call random order.  Returns false if some left
// cannot be matched (impossible while the complement is non-empty regular,
// kept as a guard).
bool complete_matching(int n, const std::vector<char>& used, std::vector<int>& match_l,
                       std::vector<int>& match_r, Rng& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<char> seen(n);

    auto augment = [&](auto&& self, int l) -> bool {
        for (int rt : order) {
            if (seen[rt] || used[std::size_t(l) * n + rt]) continue;
            seen[rt] = 1;
            if (match_r[rt] < 0 || self(self, match_r[rt])) {
                match_l[l] = rt;
                match_r[rt] = l;
                return true;
            }
        }
        return false;
    };

    for (int l = 0; l < n; ++l) {
        if (match_l[l] >= 0) continue;
        std::fill(seen.begin(), seen.end(), 0);
        if (!augment(augment, l)) return false;
    }
    return true;
}

}  // namespace

BiGraph gen_regular_bipartite(int n, int r, Rng& rng, int restart_cap) {
    if (n <= 0) throw std::invalid_argument("gen_regular_bipartite: n must be positive");
    if (r < 0 || r > n) throw std::invalid_argument("gen_regular_bipartite: need 0 <= r <= n");

    BiGraph H(n);
    if (r == n) {  // the only n-regular subgraph of the complete host
        for (int l = 0; l < n; ++l)
            for (int rt = 0; rt < n; ++rt) H.add_edge(l, rt);
        return H;
    }

    std::vector<char> used(std::size_t(n) * n, 0);
    std::vector<int> perm(n), match_l(n), match_r(n);
    for (int k = 0; k < r; ++k) {
        int restarts = 0;
        for (;;) {
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            std::fill(match_l.begin(), match_l.end(), -1);
            std::fill(match_r.begin(), match_r.end(), -1);
            for (int l = 0; l < n; ++l)
                if (!used[std::size_t(l) * n + perm[l]]) {
                    match_l[l] = perm[l];
                    match_r[perm[l]] = l;
                }
            if (complete_matching(n, used, match_l, match_r, rng)) break;
            if (++restarts >= restart_cap)
                throw RetryExhausted("gen_regular_bipartite: matching " + std::to_string(k) +
                                     " not extendable within restart cap");
        }
        for (int l = 0; l < n; ++l) {
            used[std::size_t(l) * n + match_l[l]] = 1;
            H.add_edge(l, match_l[l]);
        }
    }
    return H;
}

BiGraph gen_regular_bipartite(int n, int r, std::uint64_t seed) {
    Rng rng(seed, streams::gen_graph);
    return gen_regular_bipartite(n, r, rng);
}

BiGraph gen_quasirandom_instance(const Params& params, std::uint64_t seed,
                                 const CheckOptions& check) {
    params.validate();
    double rd = params.d * params.m;
    int r = int(std::llround(rd));
    if (std::abs(rd - double(r)) > 1e-9)
        throw std::invalid_argument("gen_quasirandom_instance: d*m must be an integer");
    Rng rng(seed, streams::gen_graph);
    CheckOptions opts = check;
    opts.seed = seed;
    opts.stream = streams::precheck;

    std::string last;
    for (int attempt = 0; attempt < 100; ++attempt) {
        BiGraph H = gen_regular_bipartite(params.n, r, rng, params.matching_restart_cap);
        CheckResult q = is_quasirandom(H, params.delta, params.delta_prime, params.eta,
                                       params.p(), opts);
        if (q.ok) return H;
        last = q.witness;
    }
    throw GenerationFailed("gen_quasirandom_instance: 100 attempts failed; last witness: " +
                           last);
}

bool ListAssignment::has(int edge, int c) const {
    const auto& l = lists.at(edge);
    return std::binary_search(l.begin(), l.end(), c);
}

ListModel ListModel::binomial(double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("ListModel::binomial: p must lie in [0,1]");
    ListModel m;
    m.kind = Kind::binomial;
    m.p = p;
    return m;
}

ListModel ListModel::fixed_size(int k) {
    if (k < 0) throw std::invalid_argument("ListModel::fixed_size: k must be non-negative");
    ListModel m;
    m.kind = Kind::fixed_size;
    m.k = k;
    return m;
}

ListAssignment gen_list_assignment(const BiGraph& H, int palette, const ListModel& model,
                                   Rng& rng) {
    if (palette < 0) throw std::invalid_argument("gen_list_assignment: palette must be non-negative");
    if (model.kind == ListModel::Kind::fixed_size && model.k > palette)
        throw std::invalid_argument("gen_list_assignment: k exceeds palette");

    ListAssignment L;
    L.palette = palette;
    L.lists.resize(H.edge_count());
    for (int id = 0; id < H.edge_count(); ++id) {
        if (model.kind == ListModel::Kind::binomial) {
            for (int c = 0; c < palette; ++c)
                if (rng.unit() < model.p) L.lists[id].push_back(c);
        } else {
            auto pick = rng.sample_indices(palette, model.k);
            L.lists[id].assign(pick.begin(), pick.end());
        }
    }
    return L;
}

ListAssignment gen_list_assignment(const BiGraph& H, int palette, const ListModel& model,
                                   std::uint64_t seed) {
    Rng rng(seed, streams::gen_lists);
    return gen_list_assignment(H, palette, model, rng);
}

void write_lists(std::ostream& out, const BiGraph& H, const ListAssignment& L) {
    if (int(L.lists.size()) != H.edge_count())
        throw std::invalid_argument("write_lists: list count does not match edge count");
    out << H.n() << ' ' << H.edge_count() << ' ' << L.palette << '\n';
    std::vector<std::tuple<int, int, int>> rows;  // (u, v, edge id)
    rows.reserve(H.edge_count());
    for (int id = 0; id < H.edge_count(); ++id) {
        auto [l, r] = H.edge(id);
        rows.emplace_back(l, r, id);
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [u, v, id] : rows) {
        out << u << ' ' << v << ' ';
        const auto& list = L.lists[id];
        if (list.empty()) {
            out << '-';
        } else {
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (i) out << ',';
                out << list[i];
            }
        }
        out << '\n';
    }
}

void write_lists_file(const std::string& path, const BiGraph& H, const ListAssignment& L) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_lists(out, H, L);
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<BiGraph, ListAssignment> read_lists(std::istream& in) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw FormatError("missing header", 1);
    ++line_no;
    std::istringstream head(line);
    int n = 0, m_edges = 0, palette = 0;
    std::string extra;
    if (!(head >> n >> m_edges >> palette) || (head >> extra))
        throw FormatError("header must be 'n m palette'", line_no);
    if (n <= 0) throw FormatError("n must be positive", line_no);
    if (m_edges < 0 || palette < 0)
        throw FormatError("m and palette must be non-negative", line_no);

    BiGraph H(n);
    ListAssignment L;
    L.palette = palette;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream is(line);
        int u, v;
        std::string tok, rest;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!(is >> u >> v >> tok) || (is >> rest))
            throw FormatError("list line must be 'u v c1,c2,...'", line_no);
        if (u < 0 || u >= n) throw FormatError("left endpoint out of range", line_no);
        if (v < 0 || v >= n) throw FormatError("right endpoint out of range", line_no);
        if (H.has_edge(u, v)) throw FormatError("duplicate edge", line_no);
        if (int(L.lists.size()) == m_edges) throw FormatError("more edges than declared", line_no);

        std::vector<int> list;
        if (tok != "-") {
            std::istringstream ts(tok);
            std::string piece;
            while (std::getline(ts, piece, ',')) {
                try {
                    std::size_t usedc = 0;
                    int c = std::stoi(piece, &usedc);
                    if (usedc != piece.size()) throw std::invalid_argument("trailing");
                    if (c < 0 || c >= palette) throw std::invalid_argument("range");
                    list.push_back(c);
                } catch (const std::exception&) {
                    throw FormatError("bad colour '" + piece + "'", line_no);
                }
            }
            if (list.empty()) throw FormatError("empty colour token", line_no);
            std::sort(list.begin(), list.end());
            if (std::adjacent_find(list.begin(), list.end()) != list.end())
                throw FormatError("repeated colour in list", line_no);
        }
        H.add_edge(u, v);
        L.lists.push_back(std::move(list));
    }
    if (int(L.lists.size()) != m_edges)
        throw FormatError("fewer edges than declared", line_no + 1);
    return {std::move(H), std::move(L)};
}

std::pair<BiGraph, ListAssignment> read_lists_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lists file: " + path);
    return read_lists(in);
}

}  // namespace bifactor
