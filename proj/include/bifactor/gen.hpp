#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifactor/bigraph.hpp"
#include "bifactor/params.hpp"
#include "bifactor/rng.hpp"

namespace bifactor {

struct RetryExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exactly r-regular bipartite graph: the union of r random perfect matchings.
// Each matching starts from a uniform random permutation; entries colliding
// with already-placed edges are re-matched inside the complement, so the
// draw survives far beyond what plain rejection would allow.
BiGraph gen_regular_bipartite(int n, int r, Rng& rng, int restart_cap = 1000);
BiGraph gen_regular_bipartite(int n, int r, std::uint64_t seed);

// A d*m-regular instance that also passes the quasirandomness gate
// (regenerated up to 100 times; the verdict uses params' tolerances).
BiGraph gen_quasirandom_instance(const Params& params, std::uint64_t seed,
                                 const CheckOptions& check = {});

// Per-edge colour lists over palette 0..palette-1.
struct ListAssignment {
    int palette = 0;
    std::vector<std::vector<int>> lists;  // indexed by edge id, each sorted

    int list_size(int edge) const { return int(lists.at(edge).size()); }
    bool has(int edge, int c) const;
};

// Sampling model for list assignments.
struct ListModel {
    enum class Kind { binomial, fixed_size };
    Kind kind;
    double p = 0.0;
    int k = 0;

    static ListModel binomial(double p);
    static ListModel fixed_size(int k);
};

ListAssignment gen_list_assignment(const BiGraph& H, int palette, const ListModel& model,
                                   Rng& rng);
ListAssignment gen_list_assignment(const BiGraph& H, int palette, const ListModel& model,
                                   std::uint64_t seed);

// Text form: header "n m_edges palette", then per edge "u v c1,c2,..." with
// "-" for an empty list, canonically sorted by (u, v).
void write_lists(std::ostream& out, const BiGraph& H, const ListAssignment& L);
void write_lists_file(const std::string& path, const BiGraph& H, const ListAssignment& L);
// Returns the host graph together with its lists.
std::pair<BiGraph, ListAssignment> read_lists(std::istream& in);
std::pair<BiGraph, ListAssignment> read_lists_file(const std::string& path);

}  // namespace bifactor
