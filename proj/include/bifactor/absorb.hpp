#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bifactor/bigraph.hpp"
#include "bifactor/factorisation.hpp"
#include "bifactor/greedy.hpp"
#include "bifactor/params.hpp"
#include "bifactor/rng.hpp"

namespace bifactor {

// The degree-deficiency flow has no solution: the donor graph cannot top
// every vertex up to the target degree.
struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The colouring process aborted while building or splitting.
struct GreedyAborted : std::runtime_error {
    AbortReport report;
    explicit GreedyAborted(AbortReport r)
        : std::runtime_error("colouring aborted: " + to_string(r.reason) +
                             (r.detail.empty() ? "" : " (" + r.detail + ")")),
          report(std::move(r)) {}
};

// A level of the absorption loop failed; the message carries the cause.
struct LevelAbort : std::runtime_error {
    int level;  // 1-based
    LevelAbort(int level_no, const std::string& what)
        : std::runtime_error("level " + std::to_string(level_no) + ": " + what),
          level(level_no) {}
};

// A leftover or residual graph fell outside its required degree band.
struct RegularityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary-tree-shaped grouping of colour classes: level lv (0-based) holds
// 2^(ell-1-lv) pieces, 2^ell - 1 pieces in total, partitioning the host's
// edges.
struct Vortex {
    int ell = 0;
    std::vector<std::vector<BiGraph>> pieces;

    int piece_count() const {
        int c = 0;
        for (const auto& lvl : pieces) c += int(lvl.size());
        return c;
    }
    // Union of one level's pieces.
    BiGraph level_union(int lv) const;
    // Shape and edge-partition sanity; throws std::invalid_argument.
    void validate(const BiGraph& H) const;
};

// True for m = 1, 3, 7, 15, ...
inline bool is_vortex_palette(int m) { return m >= 1 && ((m + 1) & m) == 0; }

// Colours the host with the process and groups the classes level by level:
// the first 2^(ell-1) colours become level 0, and so on down to the single
// last-level piece.  With one colour the host itself is the vortex.
Vortex build_vortex(const BiGraph& H, const Params& params, std::uint64_t seed);

struct RegulariseResult {
    BiGraph R;                   // spanning, exactly target-regular, contains L
    int target = 0;              // chosen degree: the maximum L-degree
    int max_overlap = 0;         // maximum degree of R within the donor piece
    double overlap_bound = 0.0;  // 4 * delta * p * n
    bool overlap_ok = false;     // max_overlap < overlap_bound
    bool input_banded = false;   // every L-degree inside (x +- delta) * p * n
};

// Tops L up to a spanning regular graph using donor edges from H_piece
// (edge-disjoint from L): each vertex receives target - deg_L extra edges,
// found by one exact max-flow.  Throws Infeasible when no such edge set
// exists.
RegulariseResult regularise(const BiGraph& H_piece, const BiGraph& L, double delta, double p,
                            double x);

struct OverlapReport {
    int level = 0;  // 1-based pass number
    int index = 0;  // piece index within the target level
    int target = 0;
    int max_overlap = 0;
    double bound = 0.0;
    bool ok = false;
};

struct AbsorbOutcome {
    std::vector<BiGraph> classes;  // 2^(ell-1) exactly regular graphs
    std::vector<int> degrees;      // exact degree of each class
    std::vector<double> d_values;  // per-pass split target degree d_i
    std::vector<OverlapReport> overlaps;
};

// The absorption loop: pass i (1-based, i < ell) splits the accumulated
// leftover into one class per next-level piece, regularises each class
// against its piece, and carries the unused piece edges forward; the final
// leftover is the residual class.  All classes are exactly regular and
// partition the host's edges.
AbsorbOutcome vortex_absorb(const Vortex& vx, const Params& params, std::uint64_t seed);

// Perfect matching of a non-empty regular bipartite graph (left-local to
// right-local), by one randomized greedy pass and augmenting-path repair.
std::vector<int> extract_perfect_matching(const BiGraph& G, Rng& rng);

// Splits a graph with all degrees even into two halves with every degree
// exactly halved, by alternating edges along Euler circuits.
std::pair<BiGraph, BiGraph> euler_halve(const BiGraph& G);

// Splits every r-regular class of F into r perfect matchings: even degrees
// are halved first, odd degrees shed one random matching.  The output
// refines the input partition; class c's matchings occupy the colour range
// starting at the sum of the earlier classes' degrees.
Factorisation refine_to_one_factorisation(const Factorisation& F, std::uint64_t seed);

}  // namespace bifactor
