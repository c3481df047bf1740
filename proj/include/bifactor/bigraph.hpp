#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bifactor/rng.hpp"

namespace bifactor {

// Balanced bipartite graph on two sides of n vertices each.  Vertices carry
// global ids: left side 0..n-1, right side n..2n-1.  Edges are simple and
// undirected; each edge has a dense id equal to its insertion index.
class BiGraph {
  public:
    BiGraph() = default;
    explicit BiGraph(int n);

    int n() const { return n_; }
    int vertex_count() const { return 2 * n_; }
    int edge_count() const { return int(edges_.size()); }

    bool is_left(int v) const { return v < n_; }
    int right_global(int r) const { return n_ + r; }

    // Adds edge between left-local l and right-local r.  Throws on range
    // errors or duplicates.
    void add_edge(int l, int r);
    bool has_edge(int l, int r) const;

    // (left-local, right-local) endpoints of an edge id.
    std::pair<int, int> edge(int id) const { return edges_[id]; }
    int edge_other(int id, int v) const;

    // Adjacency of a global vertex id as (neighbour global id, edge id) pairs,
    // in insertion order.
    const std::vector<std::pair<int, int>>& adj(int v) const { return adj_[v]; }

    int degree(int v) const { return int(adj_[v].size()); }
    int min_degree() const;
    int max_degree() const;

    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<std::pair<int, int>>> adj_;
};

// Relative degree band [(1 - tol) * centre, (1 + tol) * centre].
struct DegreeBand {
    double centre = 0.0;
    double tol = 0.0;
    double lo() const { return (1.0 - tol) * centre; }
    double hi() const { return (1.0 + tol) * centre; }
    bool contains(double x) const { return x >= lo() && x <= hi(); }
};

// Knobs for the structural checks.  Subset enumeration is exact only up to
// subset_cap vertices per side; larger graphs fall back to seeded random
// subset sampling (or peeling, for the sparseness check) and the result is
// flagged as uncertified.
struct CheckOptions {
    int subset_cap = 12;
    int samples = 200;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

struct CheckResult {
    bool ok = false;
    bool certified = false;  // true when the verdict came from exhaustive search
    std::string witness;     // human-readable description of a violation, if any
    explicit operator bool() const { return ok; }
};

// Every vertex degree inside the band.
CheckResult is_D_regular(const BiGraph& H, const DegreeBand& band);

// For all V1 <= U1, V2 <= U2 with |Vi| >= delta * n:
//   |H[V1, V2]| = (1 +- delta) * p * |V1| * |V2|.
CheckResult is_uniform(const BiGraph& H, double delta, double p, const CheckOptions& opts = {});

// One-sided variant: |H[V1, V2]| >= (1 - delta) * p * |V1| * |V2| for all
// V1, V2 with |Vi| >= delta_size * n.
CheckResult is_dense(const BiGraph& H, double delta, double delta_size, double p,
                     const CheckOptions& opts = {});

// For all V over both sides with |V| <= alpha * n: |H[V]| <= |V| * beta * n.
// Above the cap this peels min-degree vertices: peeling to empty certifies the
// property; a peeling suffix of qualifying size with too many edges refutes it.
CheckResult is_sparse(const BiGraph& H, double alpha, double beta, const CheckOptions& opts = {});

// Conjunction used on generated hosts: (1 +- delta) * p * n regular,
// (3 * delta_size, eta * p)-sparse and (delta, delta_size, p)-dense.
CheckResult is_quasirandom(const BiGraph& H, double delta, double delta_size, double eta,
                           double p, const CheckOptions& opts = {});

// No pair of disjoint S, T with |T| = 20 |S| < sqrt(n) such that each t in T
// is adjacent to a distinct unordered pair of S vertices.  At any size this
// first applies counting guards; the pair-system search itself is exact.
CheckResult check_sparse2(const BiGraph& H, const CheckOptions& opts = {});

// Orders V so that u comes before w whenever w was deleted before u by
// iterated min-degree deletion on H[V] (ties broken by smallest vertex id).
// In the returned order every vertex has few earlier neighbours.
std::vector<int> degeneracy_order(const BiGraph& H, const std::vector<int>& V);

// Thrown by the text-format readers; line is 1-based.
struct FormatError : std::runtime_error {
    int line;
    FormatError(const std::string& what, int line_no)
        : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

// Text format: header "n m", then one "u v" line per edge with u a left-side
// index and v a right-side index, both 0-based.  Writing is canonical: edges
// sorted by (u, v).
BiGraph read_graph(std::istream& in);
BiGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const BiGraph& H);
void write_graph_file(const std::string& path, const BiGraph& H);

}  // namespace bifactor
