#include "bifactor/factorisation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

namespace bifactor {

Factorisation::Factorisation(BiGraph host, int m)
    : host_(std::move(host)), m_(m), colour_(host_.edge_count(), -1) {
    if (m <= 0) throw std::invalid_argument("Factorisation: need at least one colour");
}

void Factorisation::set_colour(int edge, int c) {
    if (c < 0 || c >= m_) throw std::invalid_argument("Factorisation::set_colour: colour out of range");
    int& slot = colour_.at(edge);
    if (slot >= 0) throw std::invalid_argument("Factorisation::set_colour: edge already coloured");
    slot = c;
    ++coloured_;
}

int Factorisation::class_degree(int v, int c) const {
    int cnt = 0;
    for (const auto& [nbr, id] : host_.adj(v))
        if (colour_[id] == c) ++cnt;
    return cnt;
}

std::vector<int> Factorisation::class_sizes() const {
    std::vector<int> sz(m_, 0);
    for (int c : colour_)
        if (c >= 0) ++sz[c];
    return sz;
}

BiGraph Factorisation::class_graph(int c) const {
    BiGraph G(host_.n());
    for (int id = 0; id < host_.edge_count(); ++id)
        if (colour_[id] == c) {
            auto [l, r] = host_.edge(id);
            G.add_edge(l, r);
        }
    return G;
}

std::vector<BiGraph> Factorisation::class_graphs() const {
    std::vector<BiGraph> out;
    out.reserve(m_);
    for (int c = 0; c < m_; ++c) out.push_back(BiGraph(host_.n()));
    for (int id = 0; id < host_.edge_count(); ++id)
        if (colour_[id] >= 0) {
            auto [l, r] = host_.edge(id);
            out[colour_[id]].add_edge(l, r);
        }
    return out;
}

CheckResult Factorisation::validate_regular(const DegreeBand& band) const {
    for (int id = 0; id < host_.edge_count(); ++id)
        if (colour_[id] < 0) {
            std::ostringstream w;
            w << "edge " << id << " is uncoloured";
            return {false, true, w.str()};
        }
    // Per-vertex per-colour counts in one pass.
    std::vector<int> cnt(std::size_t(host_.vertex_count()) * m_, 0);
    for (int id = 0; id < host_.edge_count(); ++id) {
        auto [l, r] = host_.edge(id);
        ++cnt[std::size_t(l) * m_ + colour_[id]];
        ++cnt[std::size_t(host_.right_global(r)) * m_ + colour_[id]];
    }
    for (int v = 0; v < host_.vertex_count(); ++v)
        for (int c = 0; c < m_; ++c) {
            int deg = cnt[std::size_t(v) * m_ + c];
            if (!band.contains(double(deg))) {
                std::ostringstream w;
                w << "vertex " << v << " has " << deg << " edges of colour " << c
                  << ", outside [" << band.lo() << ", " << band.hi() << "]";
                return {false, true, w.str()};
            }
        }
    return {true, true, {}};
}

void write_factorisation(std::ostream& out, const Factorisation& F) {
    const BiGraph& H = F.host();
    out << H.n() << ' ' << H.edge_count() << '\n';
    std::vector<std::tuple<int, int, int>> rows;
    rows.reserve(H.edge_count());
    for (int id = 0; id < H.edge_count(); ++id) {
        auto [l, r] = H.edge(id);
        rows.emplace_back(l, r, F.colour_of(id));
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [u, v, c] : rows) out << u << ' ' << v << ' ' << c << '\n';
}

void write_factorisation_file(const std::string& path, const Factorisation& F) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_factorisation(out, F);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Factorisation read_factorisation(std::istream& in, int m) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw FormatError("missing header", 1);
    ++line_no;
    std::istringstream head(line);
    int n = 0, m_edges = 0;
    std::string extra;
    if (!(head >> n >> m_edges) || (head >> extra))
        throw FormatError("header must be 'n m'", line_no);
    if (n <= 0) throw FormatError("n must be positive", line_no);
    if (m_edges < 0) throw FormatError("m must be non-negative", line_no);

    BiGraph H(n);
    std::vector<int> colours;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream is(line);
        int u, v, c;
        std::string rest;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!(is >> u >> v >> c) || (is >> rest))
            throw FormatError("edge line must be 'u v c'", line_no);
        if (u < 0 || u >= n) throw FormatError("left endpoint out of range", line_no);
        if (v < 0 || v >= n) throw FormatError("right endpoint out of range", line_no);
        if (c < 0) throw FormatError("colour must be non-negative", line_no);
        if (m >= 0 && c >= m) throw FormatError("colour exceeds palette", line_no);
        if (H.has_edge(u, v)) throw FormatError("duplicate edge", line_no);
        if (int(colours.size()) == m_edges) throw FormatError("more edges than declared", line_no);
        H.add_edge(u, v);
        colours.push_back(c);
    }
    if (int(colours.size()) != m_edges)
        throw FormatError("fewer edges than declared", line_no + 1);

    int palette = m;
    if (palette < 0) {
        palette = 1;
        for (int c : colours) palette = std::max(palette, c + 1);
    }
    Factorisation F(std::move(H), palette);
    for (int id = 0; id < int(colours.size()); ++id) F.set_colour(id, colours[id]);
    return F;
}

Factorisation read_factorisation_file(const std::string& path, int m) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open factorisation file: " + path);
    return read_factorisation(in, m);
}

}  // namespace bifactor
