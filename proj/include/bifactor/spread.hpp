#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifactor/bigraph.hpp"
#include "bifactor/factorisation.hpp"
#include "bifactor/rng.hpp"

namespace bifactor {

struct RestartExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Random perfect matching of a balanced bipartite graph: left vertices in
// random order each pick a uniformly random unmatched neighbour; dead ends
// restart the pass, and once restarts are exhausted the last partial
// matching is completed by augmenting paths.  Throws RestartExhausted only
// when no perfect matching exists at all.
std::vector<int> sample_spread_matching(const BiGraph& B, Rng& rng, int restart_cap = 1000);

// Wilson score interval helpers (z defaults to the 99% two-sided quantile).
double wilson_radius(long long hits, long long trials, double z = 2.576);
double wilson_lower_bound(long long hits, long long trials, double z = 2.576);

// A probe asks: are all these (left, right, colour) triples present in the
// sampled factorisation with exactly those colours?
struct Probe {
    struct Entry {
        int u, v, c;
    };
    std::vector<Entry> entries;

    std::string describe() const;
};

struct ProbeStat {
    Probe probe;
    long long hits = 0;
    double freq = 0.0;
    double radius = 0.0;  // Wilson, 99%
};

struct SpreadEstimate {
    std::vector<ProbeStat> probes;
    long long trials = 0;
    double q_hat = 0.0;  // max over probes of freq^(1/|S|)
};

using FactorisationSampler = std::function<Factorisation(Rng&)>;

SpreadEstimate estimate_spread(const FactorisationSampler& sampler,
                               const std::vector<Probe>& probes, long long trials, Rng& rng);

// Empirical check that a composed (outer then inner) sampler stays within
// the product spread bound on every probe, up to the confidence radius.
struct ComposeReport {
    SpreadEstimate estimate;
    double bound_base = 0.0;  // outer_q * inner_q
    bool within_bound = true;
    std::string witness;
};

ComposeReport compose_spread_check(const FactorisationSampler& composed, double outer_q,
                                   double inner_q, const std::vector<Probe>& probes,
                                   long long trials, Rng& rng);

}  // namespace bifactor
