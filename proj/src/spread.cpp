#include "bifactor/spread.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bifactor {

std::vector<int> sample_spread_matching(const BiGraph& B, Rng& rng, int restart_cap) {
    const int n = B.n();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> match_l(n), match_r(n), cands;

    for (int attempt = 0; attempt <= restart_cap; ++attempt) {
        rng.shuffle(order);
        std::fill(match_l.begin(), match_l.end(), -1);
        std::fill(match_r.begin(), match_r.end(), -1);
        bool stuck = false;
        for (int l : order) {
            cands.clear();
            for (const auto& [nbr, id] : B.adj(l))
                if (match_r[nbr - n] < 0) cands.push_back(nbr - n);
            if (cands.empty()) {
                stuck = true;
                break;
            }
            int r = cands[rng.below(cands.size())];
            match_l[l] = r;
            match_r[r] = l;
        }
        if (!stuck) return match_l;
    }

    // Repair the last partial matching by augmenting paths in random scan
    // order; failure here means the graph has no perfect matching.
    std::vector<char> seen(n);
    auto augment = [&](auto&& self, int l) -> bool {
        std::vector<int> rs;
        for (const auto& [nbr, id] : B.adj(l)) rs.push_back(nbr - n);
        rng.shuffle(rs);
        for (int r : rs) {
            if (seen[r]) continue;
            seen[r] = 1;
            if (match_r[r] < 0 || self(self, match_r[r])) {
                match_l[l] = r;
                match_r[r] = l;
                return true;
            }
        }
        return false;
    };
    for (int l = 0; l < n; ++l) {
        if (match_l[l] >= 0) continue;
        std::fill(seen.begin(), seen.end(), 0);
        if (!augment(augment, l))
            throw RestartExhausted("sample_spread_matching: no perfect matching after repair");
    }
    return match_l;
}

double wilson_radius(long long hits, long long trials, double z) {
    if (trials <= 0) throw std::invalid_argument("wilson_radius: trials must be positive");
    double nn = double(trials);
    double p = double(hits) / nn;
    double z2 = z * z;
    return (z / (1.0 + z2 / nn)) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
}

double wilson_lower_bound(long long hits, long long trials, double z) {
    double nn = double(trials);
    double p = double(hits) / nn;
    double z2 = z * z;
    double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    return centre - wilson_radius(hits, trials, z);
}

std::string Probe::describe() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) os << '+';
        os << '(' << entries[i].u << ',' << entries[i].v << ':' << entries[i].c << ')';
    }
    return os.str();
}

namespace {

bool probe_hits(const Factorisation& F, const Probe& p) {
    const BiGraph& H = F.host();
    for (const auto& e : p.entries) {
        if (!H.has_edge(e.u, e.v)) return false;
        // Find the edge id via the left adjacency.
        int found = -1;
        for (const auto& [nbr, id] : H.adj(e.u))
            if (nbr == H.right_global(e.v)) {
                found = id;
                break;
            }
        if (F.colour_of(found) != e.c) return false;
    }
    return true;
}

}  // namespace

SpreadEstimate estimate_spread(const FactorisationSampler& sampler,
                               const std::vector<Probe>& probes, long long trials, Rng& rng) {
    if (trials <= 0) throw std::invalid_argument("estimate_spread: trials must be positive");
    for (const auto& p : probes)
        if (p.entries.empty())
            throw std::invalid_argument("estimate_spread: probe with no entries");

    SpreadEstimate est;
    est.trials = trials;
    est.probes.resize(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) est.probes[i].probe = probes[i];

    for (long long t = 0; t < trials; ++t) {
        Factorisation F = sampler(rng);
        for (auto& ps : est.probes)
            if (probe_hits(F, ps.probe)) ++ps.hits;
    }
    est.q_hat = 0.0;
    for (auto& ps : est.probes) {
        ps.freq = double(ps.hits) / double(trials);
        ps.radius = wilson_radius(ps.hits, trials);
        est.q_hat = std::max(est.q_hat,
                             std::pow(ps.freq, 1.0 / double(ps.probe.entries.size())));
    }
    return est;
}

ComposeReport compose_spread_check(const FactorisationSampler& composed, double outer_q,
                                   double inner_q, const std::vector<Probe>& probes,
                                   long long trials, Rng& rng) {
    if (outer_q <= 0 || inner_q <= 0)
        throw std::invalid_argument("compose_spread_check: spread bounds must be positive");
    ComposeReport rep;
    rep.estimate = estimate_spread(composed, probes, trials, rng);
    rep.bound_base = outer_q * inner_q;
    for (const auto& ps : rep.estimate.probes) {
        double bound = std::pow(rep.bound_base, double(ps.probe.entries.size()));
        if (ps.freq > bound + ps.radius) {
            rep.within_bound = false;
            std::ostringstream os;
            os << "probe " << ps.probe.describe() << " frequency " << ps.freq
               << " exceeds bound " << bound << " by more than radius " << ps.radius;
            rep.witness = os.str();
            break;
        }
    }
    return rep;
}

}  // namespace bifactor
