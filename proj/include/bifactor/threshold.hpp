#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifactor/bigraph.hpp"
#include "bifactor/gen.hpp"

namespace bifactor {

// Exhaustive counting was asked for above the exact-enumeration cap.
struct SizeCap : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SolveResult {
    enum class Verdict { Sat, Unsat, Timeout };
    Verdict verdict = Verdict::Unsat;
    std::vector<int> colouring;  // per edge id; filled only for Sat
    long long nodes = 0;         // branching decisions explored
};

inline std::string to_string(SolveResult::Verdict v) {
    switch (v) {
        case SolveResult::Verdict::Sat: return "sat";
        case SolveResult::Verdict::Unsat: return "unsat";
        default: return "timeout";
    }
}

// True when every edge holds a colour from its list and no two edges at a
// common vertex share a colour.  Used as the independent check on every
// colouring the solver reports.
bool is_valid_list_colouring(const BiGraph& H, const ListAssignment& L,
                             const std::vector<int>& colouring);

// Exact backtracking search for a proper edge colouring choosing each
// edge's colour from its list.  Edges are branched most-constrained-first;
// after each assignment the search fails early when some edge runs out of
// colours, and — whenever the host is regular with palette equal to its
// degree, so every colour class must be a perfect matching — when some
// colour becomes unavailable at a vertex it still has to cover.  The budget
// caps branching decisions; exceeding it yields the indeterminate Timeout
// verdict.  Palettes wider than 64 colours are rejected.
SolveResult solve_list_edge_colouring(const BiGraph& H, const ListAssignment& L,
                                      long long node_budget = 1'000'000'000);

// All proper list-respecting edge colourings, as per-edge colour vectors in
// lexicographic order of the search.  Throws SizeCap when more than
// max_solutions exist and std::runtime_error on budget exhaustion.
std::vector<std::vector<int>> enumerate_list_edge_colourings(
    const BiGraph& H, const ListAssignment& L, long long max_solutions,
    long long node_budget = 1'000'000'000);

// Number of proper edge colourings of H using every colour of the full
// palette 0..n-1, counted exhaustively.  For a complete host this is the
// number of Latin squares of that order.  Capped at n <= 6 (SizeCap).
long long count_one_factorisations(const BiGraph& H);

struct ThresholdPoint {
    double x = 0.0;  // grid value: availability probability, or list-size factor
    int trials = 0;
    int sat = 0;
    int unsat = 0;
    int timeouts = 0;
    double freq = 0.0;    // sat / (sat + unsat); timeouts are excluded
    double radius = 0.0;  // Wilson 99% half-width on that ratio
};

struct ThresholdCurve {
    int n = 0;
    int palette = 0;
    std::vector<ThresholdPoint> points;
    bool monotone = true;   // no per-seed Sat-then-Unsat reversal along the grid
    bool crossed = false;   // the frequency curve reaches 1/2
    double crossing_x = 0.0;   // grid value where it first crosses, interpolated
    double crossing_lo = 0.0;  // bracketing grid values with determinate verdicts:
    double crossing_hi = 0.0;  // the crossing lies in [crossing_lo, crossing_hi]
    double crossing_C = 0.0;   // crossing_x scaled to the C in p = C log n / n
};

// Success curve for colouring the complete host from random lists over
// palette n.  Each trial draws one uniform variate per edge-colour pair and
// reuses it across the whole grid: under Kind::binomial the list at p keeps
// the colours with variate below p, under Kind::fixed_size it keeps the
// round(p*n) colours of smallest variate.  Larger p therefore only ever
// grows the lists, so per-trial success is monotone along the grid and the
// curve inherits that without extra variance.  The grid must be ascending.
ThresholdCurve estimate_threshold(int n, ListModel::Kind kind, const std::vector<double>& grid,
                                  int trials, long long node_budget, std::uint64_t seed);

// Same experiment on an arbitrary regular host with palette equal to its
// degree r: grid entry C requests lists of the round(C log n) colours of
// smallest variate (clamped to [0, r]).  crossing_C equals crossing_x.
ThresholdCurve estimate_threshold_subgraph(const BiGraph& H, const std::vector<double>& grid,
                                           int trials, long long node_budget,
                                           std::uint64_t seed);

}  // namespace bifactor
