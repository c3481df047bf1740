#pragma once

#include <cstdint>
#include <stdexcept>

#include "bifactor/bigraph.hpp"

namespace bifactor {

// Fixed stream ids so that enabling or disabling one consumer never shifts
// the draws seen by another.
namespace streams {
inline constexpr std::uint64_t gen_graph = 1;
inline constexpr std::uint64_t gen_lists = 2;
inline constexpr std::uint64_t greedy = 3;
inline constexpr std::uint64_t precheck = 4;
inline constexpr std::uint64_t spread = 5;
inline constexpr std::uint64_t threshold = 6;
inline constexpr std::uint64_t absorb = 7;
inline constexpr std::uint64_t harness = 8;
}  // namespace streams

// Instance and tolerance parameters shared by the generator, the colouring
// process and the absorption pipeline.
struct Params {
    int n = 0;       // side size of the host
    double d = 0.0;  // target per-colour degree (need not be an integer)
    int m = 0;       // number of colours

    double delta = 0.0;        // degree-band and density tolerance
    double delta_prime = 0.0;  // subset-size fraction for density / sparseness
    double eta = 0.0;          // sparseness edge-density factor
    double eps = 0.0;          // early-phase cutoff fraction
    double theta = 0.0;        // status thresholds and cleaning palette slack

    int clean_retry_cap = 64;      // resampling attempts per cleaning
    int matching_restart_cap = 1000;

    double p() const { return double(d) * double(m) / double(n); }

    // Throws std::invalid_argument on the first violated constraint.
    void validate() const;
};

// Desk-scale working point: 400 vertices, 42-regular hosts, 7 colour
// classes of target degree 6.  The tolerances are wide on purpose — at this
// size the status thresholds must sit close to their caps or the per-colour
// abort fires on normal fluctuations.  Empirically (2000 seeds): generated
// hosts pass the quasirandom precheck, completions validate the
// [(1-2*delta)d, (1+2*delta)d] class-degree band at roughly 999 in 1000
// runs, and the worst per-colour full-or-sparse count stays below 0.93 of
// the abort cap.
inline Params desk_preset() {
    Params p;
    p.n = 200;
    p.d = 6.0;
    p.m = 7;
    p.delta = 0.48;
    p.delta_prime = 0.15;
    p.eta = 0.30;
    p.eps = 0.1;
    p.theta = 0.995;
    return p;
}

inline void Params::validate() const {
    if (n <= 0) throw std::invalid_argument("params: n must be positive");
    if (d <= 0) throw std::invalid_argument("params: d must be positive");
    if (m <= 0) throw std::invalid_argument("params: m must be positive");
    if (d * m > double(n)) throw std::invalid_argument("params: d*m must not exceed n");
    if (delta <= 0 || delta >= 1) throw std::invalid_argument("params: delta must lie in (0,1)");
    if (delta_prime <= 0 || delta_prime >= 1)
        throw std::invalid_argument("params: delta_prime must lie in (0,1)");
    if (eta <= 0) throw std::invalid_argument("params: eta must be positive");
    if (eps <= 0 || eps >= 1) throw std::invalid_argument("params: eps must lie in (0,1)");
    if (theta <= 0 || theta >= 1) throw std::invalid_argument("params: theta must lie in (0,1)");
    if (clean_retry_cap <= 0) throw std::invalid_argument("params: clean_retry_cap must be positive");
    if (matching_restart_cap <= 0)
        throw std::invalid_argument("params: matching_restart_cap must be positive");
}

}  // namespace bifactor
