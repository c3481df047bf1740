// Acceptance harness: eight go/no-go checks over the whole stack, one
// PASS/FAIL line each.  Exit code is the number of failed criteria.
//
// Tolerances are pinned here, next to the check that uses them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bifactor/absorb.hpp"
#include "bifactor/bigraph.hpp"
#include "bifactor/gen.hpp"
#include "bifactor/greedy.hpp"
#include "bifactor/params.hpp"
#include "bifactor/rng.hpp"
#include "bifactor/spread.hpp"
#include "bifactor/threshold.hpp"

namespace fs = std::filesystem;
using namespace bifactor;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

BiGraph complete_bipartite(int n) {
    BiGraph H(n);
    for (int l = 0; l < n; ++l)
        for (int r = 0; r < n; ++r) H.add_edge(l, r);
    return H;
}

ListAssignment full_lists(const BiGraph& H, int palette) {
    ListAssignment L;
    L.palette = palette;
    L.lists.resize(H.edge_count());
    for (auto& lst : L.lists)
        for (int c = 0; c < palette; ++c) lst.push_back(c);
    return L;
}

std::string colour_key(const std::vector<int>& colouring) {
    std::string key;
    for (int c : colouring) key += char('0' + c);
    return key;
}

// ---------------------------------------------------------------------------
// 1. Greedy validity: 500 seeded desk-preset runs; every completed colouring
//    is an exact partition with class degrees in [(1-2delta)d, (1+2delta)d],
//    and no runtime invariant counter ever fired.  Runtime < 10 minutes.
// ---------------------------------------------------------------------------
Outcome criterion_greedy_validity() {
    const Params p = desk_preset();
    const int runs = 500;
    auto t0 = std::chrono::steady_clock::now();

    int aborted = 0, completed = 0;
    long long invariant_checks = 0;
    for (int s = 0; s < runs; ++s) {
        BiGraph H = gen_quasirandom_instance(p, 1000 + std::uint64_t(s));
        RunResult run = run_greedy(H, p, 5000 + std::uint64_t(s));
        const InvariantCounters& inv = run.invariants;
        invariant_checks += inv.colc_cap_checks + inv.palette_checks + inv.col_window_checks +
                            inv.batch_checks;
        if (inv.colc_cap_violations || inv.palette_violations || inv.col_window_violations ||
            inv.batch_initial_violations || inv.batch_closed_violations)
            return {false, "runtime invariant fired at seed pair (" +
                               std::to_string(1000 + s) + ", " + std::to_string(5000 + s) + ")"};
        if (!run.ok()) {
            ++aborted;
            continue;
        }
        ++completed;
        CheckResult partition =
            run.factorisation->validate_regular(DegreeBand{p.d, 2.0 * p.delta});
        if (!partition.ok)
            return {false, "partition check failed at seed pair (" + std::to_string(1000 + s) +
                               ", " + std::to_string(5000 + s) + "): " + partition.witness};
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (completed == 0) return {false, "all runs aborted"};
    if (invariant_checks == 0) return {false, "invariant counters never engaged"};
    if (secs >= 600.0)
        return {false, "took " + std::to_string(secs) + "s, budget is 600s"};

    std::ostringstream os;
    os << completed << "/" << runs << " completed, abort frequency "
       << double(aborted) / double(runs) << ", " << invariant_checks
       << " invariant checks clean, " << int(secs) << "s";
    return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 2. Small-instance oracle: exhaustive counts for K22 and K33, and every
//    refinement of K33 lands in the enumerated 12-element set.  Exact.
// ---------------------------------------------------------------------------
Outcome criterion_small_oracle() {
    long long c22 = count_one_factorisations(complete_bipartite(2));
    long long c33 = count_one_factorisations(complete_bipartite(3));
    if (c22 != 2) return {false, "count(K22) = " + std::to_string(c22) + ", expected 2"};
    if (c33 != 12) return {false, "count(K33) = " + std::to_string(c33) + ", expected 12"};

    BiGraph K33 = complete_bipartite(3);
    std::vector<std::vector<int>> all =
        enumerate_list_edge_colourings(K33, full_lists(K33, 3), 100);
    if (all.size() != 12)
        return {false, "enumeration found " + std::to_string(all.size()) + " colourings"};
    std::set<std::string> valid;
    for (const auto& col : all) valid.insert(colour_key(col));

    Factorisation single(K33, 1);
    for (int id = 0; id < K33.edge_count(); ++id) single.set_colour(id, 0);

    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) {
        Factorisation ones = refine_to_one_factorisation(single, std::uint64_t(s));
        std::vector<int> col(K33.edge_count());
        for (int id = 0; id < K33.edge_count(); ++id) col[id] = ones.colour_of(id);
        if (!valid.count(colour_key(col)))
            return {false, "refinement at seed " + std::to_string(s) +
                               " is outside the enumerated set"};
    }
    return {true, "counts exact; 10^4 refinements all inside the 12-element set"};
}

// ---------------------------------------------------------------------------
// 3. Symmetry spread: uniform labelled decompositions of K44 give each
//    single-edge probe frequency 1/4 within 5 sigma over 10^5 trials.
// ---------------------------------------------------------------------------
Outcome criterion_symmetry_spread() {
    BiGraph K44 = complete_bipartite(4);
    std::vector<std::vector<int>> all =
        enumerate_list_edge_colourings(K44, full_lists(K44, 4), 1000);
    if (all.size() != 576)
        return {false, "enumeration found " + std::to_string(all.size()) + " colourings"};

    const long long trials = 100000;
    auto sampler = [&](Rng& rng) {
        const std::vector<int>& col = all[rng.below(all.size())];
        Factorisation F(K44, 4);
        for (int id = 0; id < K44.edge_count(); ++id) F.set_colour(id, col[id]);
        return F;
    };
    std::vector<Probe> probes;
    for (int c = 0; c < 4; ++c) {
        Probe pr;
        pr.entries.push_back(Probe::Entry{0, 0, c});
        probes.push_back(pr);
    }
    Rng rng(2024, streams::harness);
    SpreadEstimate est = estimate_spread(sampler, probes, trials, rng);

    const double sigma = std::sqrt(0.25 * 0.75 / double(trials));
    std::ostringstream os;
    os << "freqs";
    for (const auto& ps : est.probes) {
        os << " " << ps.freq;
        if (std::abs(ps.freq - 0.25) > 5.0 * sigma)
            return {false, "probe frequency " + std::to_string(ps.freq) +
                               " outside 1/4 +- " + std::to_string(5.0 * sigma)};
    }
    os << " all within 1/4 +- " << 5.0 * sigma;
    return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 4. Cleaning statistics: the resampling acceptance event succeeds on more
//    than half of all attempts, over at least 10^3 sampled cleanings forced
//    on copies of frozen late-round states.  Wilson 99% lower bound > 0.4.
// ---------------------------------------------------------------------------
Outcome criterion_cleaning_stats() {
    const Params p = desk_preset();
    long long cleanings = 0, attempts = 0, successes = 0;

    for (int s = 0; s < 8 && cleanings < 1500; ++s) {
        BiGraph H = gen_quasirandom_instance(p, 1000 + std::uint64_t(s));
        GreedyProcess proc(H, p, 5000 + std::uint64_t(s));
        while (!proc.finished() && !proc.aborted() && proc.round() < 18) proc.step();
        if (proc.aborted()) continue;
        for (int v = 0; v < H.vertex_count() && cleanings < 1500; ++v) {
            auto unc = proc.uncoloured_edges_at(v);
            if (unc.empty() || unc.size() > 12) continue;
            GreedyProcess copy = proc;
            copy.reseed(splitmix64(std::uint64_t(s) * 100003 + std::uint64_t(v)),
                        streams::harness);
            long long a0 = copy.cleaning_stats().sample_attempts;
            long long s0 = copy.cleaning_stats().sample_successes;
            copy.clean_vertex(v);
            long long da = copy.cleaning_stats().sample_attempts - a0;
            if (da == 0) continue;  // deterministic multiset path: no draw made
            ++cleanings;
            attempts += da;
            successes += copy.cleaning_stats().sample_successes - s0;
        }
    }
    if (cleanings < 1000)
        return {false, "only " + std::to_string(cleanings) + " sampled cleanings collected"};
    double rate = double(successes) / double(attempts);
    double lb = wilson_lower_bound(successes, attempts);
    std::ostringstream os;
    os << cleanings << " cleanings, " << attempts << " attempts, rate " << rate
       << ", Wilson 99% LB " << lb;
    if (rate <= 0.5) return {false, os.str() + " (rate <= 1/2)"};
    if (lb <= 0.4) return {false, os.str() + " (LB <= 0.4)"};
    return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 5. Step probabilities: replaying one frozen mid-run standard step 10^5
//    times, each candidate edge's colouring frequency lies in the
//    (1 +- 2 theta)/m band widened by 5 sigma.
// ---------------------------------------------------------------------------
Outcome criterion_step_probabilities() {
    const Params p = desk_preset();
    BiGraph H = gen_quasirandom_instance(p, 1000);
    GreedyProcess proc(H, p, 5000);
    proc.set_tracing(true);
    while (!proc.finished() && !proc.aborted() && proc.round() < 10) proc.step();

    GreedyProcess frozen = proc;
    bool found = false;
    for (int guard = 0; guard < 5000 && !found; ++guard) {
        GreedyProcess before = proc;
        if (!proc.step()) break;
        const StepTrace& tr = proc.trace().back();
        if (tr.kind == StepTrace::Kind::Standard && !tr.coloured.empty()) {
            frozen = before;
            found = true;
        }
    }
    if (!found) return {false, "no colouring standard step found mid-run"};

    const long long trials = 100000;
    std::map<int, long long> freq;
    long long standard = 0;
    for (long long t = 0; t < trials; ++t) {
        GreedyProcess copy = frozen;
        copy.reseed(std::uint64_t(t), streams::harness);
        copy.step();
        const StepTrace& tr = copy.trace().back();
        if (tr.kind != StepTrace::Kind::Standard) continue;
        ++standard;
        for (auto [eid, c] : tr.coloured) ++freq[eid];
    }
    if (standard != trials)
        return {false, "only " + std::to_string(standard) + " replays were standard steps"};

    const double lo = (1.0 - 2.0 * p.theta) / p.m;
    const double hi = (1.0 + 2.0 * p.theta) / p.m;
    const double sigma = std::sqrt((1.0 / p.m) * (1.0 - 1.0 / p.m) / double(trials));
    double fmin = 1.0, fmax = 0.0;
    for (auto [eid, cnt] : freq) {
        double f = double(cnt) / double(trials);
        fmin = std::min(fmin, f);
        fmax = std::max(fmax, f);
        if (f < lo - 5.0 * sigma || f > hi + 5.0 * sigma)
            return {false, "edge " + std::to_string(eid) + " frequency " + std::to_string(f) +
                               " outside band"};
    }
    std::ostringstream os;
    os << freq.size() << " candidate edges, frequencies in [" << fmin << ", " << fmax
       << "], band (" << lo << ", " << hi << ") + 5 sigma";
    return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 6. Regularise feasibility: 100 random in-band (piece, L) instances at
//    n <= 64 all top up to a spanning regular superset; donor overlap stays
//    under 4 delta p n in at least 95 of 100.
// ---------------------------------------------------------------------------
Outcome criterion_regularise() {
    const double delta = 0.48, pn = 10.0, x = 0.55;
    const int rL = 8, rP = 12;
    int overlap_in_bound = 0, banded = 0;
    int max_overlap_seen = 0;

    for (int t = 0; t < 100; ++t) {
        Rng rng(7000 + std::uint64_t(t), streams::harness);
        int n = 16 + int(rng.below(49));  // 16..64
        BiGraph L0 = gen_regular_bipartite(n, rL, rng);
        // Thin randomly, but never drop a vertex to degree zero so every
        // degree stays inside the (x +- delta) p n band.
        BiGraph L(n);
        std::vector<int> degl(n, rL), degr(n, rL);
        for (int id = 0; id < L0.edge_count(); ++id) {
            auto [l, r] = L0.edge(id);
            if (rng.unit() < 0.2 && degl[l] > 1 && degr[r] > 1) {
                --degl[l];
                --degr[r];
                continue;
            }
            L.add_edge(l, r);
        }
        BiGraph P0 = gen_regular_bipartite(n, rP, rng);
        BiGraph piece(n);
        for (int id = 0; id < P0.edge_count(); ++id) {
            auto [l, r] = P0.edge(id);
            if (!L.has_edge(l, r)) piece.add_edge(l, r);
        }

        RegulariseResult res;
        try {
            res = regularise(piece, L, delta, pn / double(n), x);
        } catch (const Infeasible& e) {
            return {false, "instance " + std::to_string(t) + " infeasible: " + e.what()};
        }
        if (res.R.n() != n)
            return {false, "instance " + std::to_string(t) + " output not spanning"};
        if (!is_D_regular(res.R, DegreeBand{double(res.target), 0.0}).ok)
            return {false, "instance " + std::to_string(t) + " output not regular"};
        for (int id = 0; id < L.edge_count(); ++id) {
            auto [l, r] = L.edge(id);
            if (!res.R.has_edge(l, r))
                return {false, "instance " + std::to_string(t) + " does not contain L"};
        }
        if (res.input_banded) ++banded;
        if (double(res.max_overlap) < 4.0 * delta * pn) ++overlap_in_bound;
        max_overlap_seen = std::max(max_overlap_seen, res.max_overlap);
    }
    std::ostringstream os;
    os << "100/100 spanning regular supersets, " << banded << " in band, overlap < "
       << 4.0 * delta * pn << " in " << overlap_in_bound << "/100 (max seen "
       << max_overlap_seen << ")";
    if (banded != 100) return {false, os.str() + " (instances left the regime)"};
    if (overlap_in_bound < 95) return {false, os.str()};
    return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 7. Threshold lab: binomial curves at n = 8 and 16 are per-seed monotone,
//    hit frequency 1 exactly at p = 1, and the 50% crossing moves down as n
//    grows.  Crossing constants reported with their bracketing interval.
// ---------------------------------------------------------------------------
Outcome criterion_threshold_lab() {
    std::vector<double> grid8;
    for (int i = 1; i <= 10; ++i) grid8.push_back(0.1 * i);
    ThresholdCurve c8 =
        estimate_threshold(8, ListModel::Kind::binomial, grid8, 100, 200000, 42);

    // p = 0.5 sits in an all-timeout belt at n = 16 for any desk budget, so
    // the grid brackets it instead of sampling it.
    std::vector<double> grid16{0.25, 0.4, 0.6, 0.8, 1.0};
    ThresholdCurve c16 =
        estimate_threshold(16, ListModel::Kind::binomial, grid16, 25, 1000000, 42);

    for (const ThresholdCurve* c : {&c8, &c16}) {
        if (!c->monotone)
            return {false, "n=" + std::to_string(c->n) + " curve not per-seed monotone"};
        const ThresholdPoint& top = c->points.back();
        if (top.x != 1.0 || top.sat != top.trials)
            return {false, "n=" + std::to_string(c->n) + " not always satisfiable at p=1"};
        if (!c->crossed)
            return {false, "n=" + std::to_string(c->n) + " curve never crossed 1/2"};
    }
    if (!(c16.crossing_x < c8.crossing_x))
        return {false, "crossing did not decrease: x*(8)=" + std::to_string(c8.crossing_x) +
                           ", x*(16)=" + std::to_string(c16.crossing_x)};

    std::ostringstream os;
    os << "x*(8)=" << c8.crossing_x << " in [" << c8.crossing_lo << ", " << c8.crossing_hi
       << "] C=" << c8.crossing_C << "; x*(16)=" << c16.crossing_x << " in ["
       << c16.crossing_lo << ", " << c16.crossing_hi << "] C=" << c16.crossing_C
       << "; decreasing";
    return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 8. Determinism: every CLI subcommand rerun with the same configuration and
//    seed produces byte-identical primary outputs.
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
    std::string cmd = std::string("\"") + BIFACTOR_CLI_PATH + "\" " + args + " > " +
                      stdout_file.string() + " 2> /dev/null";
    int rc = std::system(cmd.c_str());
    return rc < 0 ? rc : WEXITSTATUS(rc);
}

Outcome criterion_cli_determinism() {
    fs::path scratch = "acceptance_scratch";
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    const std::string inst = "--n 16 --d 5 --m 3 --seed 1000";

    struct Cmd {
        std::string name;
        std::string args_a, args_b;
        std::vector<std::string> artifacts;  // relative to the out dirs
    };
    auto dir = [&](const std::string& s) { return (scratch / s).string(); };
    std::vector<Cmd> cmds = {
        {"gen", inst + " --out-dir " + dir("genA"), inst + " --out-dir " + dir("genB"),
         {"host.txt", "manifest.json"}},
        {"greedy", inst + " --out-dir " + dir("runA"), inst + " --out-dir " + dir("runB"),
         {"host.txt", "colours.txt", "manifest.json"}},
        {"absorb", inst + " --out-dir " + dir("absA"), inst + " --out-dir " + dir("absB"),
         {"host.txt", "classes.txt", "manifest.json"}},
        {"refine",
         "--host " + dir("absA") + "/host.txt --colours " + dir("absA") +
             "/classes.txt --seed 7000 --out-dir " + dir("refA"),
         "--host " + dir("absA") + "/host.txt --colours " + dir("absA") +
             "/classes.txt --seed 7000 --out-dir " + dir("refB"),
         {"ones.txt", "manifest.json"}},
        {"spread", inst + " --trials 10 --probes 3", inst + " --trials 10 --probes 3", {}},
        {"threshold", "--n 4 --grid 0.5,1.0 --trials 5 --budget-nodes 20000 --seed 3",
         "--n 4 --grid 0.5,1.0 --trials 5 --budget-nodes 20000 --seed 3", {}},
        {"pipeline", inst + " --spread-trials 5 --out-dir " + dir("pipA"),
         inst + " --spread-trials 5 --out-dir " + dir("pipB"),
         {"host.txt", "classes.txt", "ones.txt", "manifest.json"}},
    };

    for (const Cmd& cmd : cmds) {
        fs::path outA = scratch / (cmd.name + "_a.json");
        fs::path outB = scratch / (cmd.name + "_b.json");
        int rcA = run_cli(cmd.name + " " + cmd.args_a, outA);
        int rcB = run_cli(cmd.name + " " + cmd.args_b, outB);
        if (rcA != 0 || rcB != 0)
            return {false, cmd.name + " exited " + std::to_string(rcA) + "/" +
                               std::to_string(rcB)};
        if (slurp(outA) != slurp(outB))
            return {false, cmd.name + " stdout differs between reruns"};
        // Artifact directories differ by name only; their contents must match.
        for (const std::string& art : cmd.artifacts) {
            fs::path a, b;
            if (cmd.name == "gen") a = scratch / "genA" / art, b = scratch / "genB" / art;
            if (cmd.name == "greedy") a = scratch / "runA" / art, b = scratch / "runB" / art;
            if (cmd.name == "absorb") a = scratch / "absA" / art, b = scratch / "absB" / art;
            if (cmd.name == "refine") a = scratch / "refA" / art, b = scratch / "refB" / art;
            if (cmd.name == "pipeline") a = scratch / "pipA" / art, b = scratch / "pipB" / art;
            std::string ca = slurp(a), cb = slurp(b);
            if (ca.empty() || ca != cb)
                return {false, cmd.name + " artifact " + art + " differs between reruns"};
        }
    }

    // Campaign mode: rerun over the same config and compare stdout plus every
    // manifest against a snapshot of the first pass.
    fs::path cfg = scratch / "camp.cfg";
    {
        std::ofstream out(cfg);
        out << "out = " << dir("camp") << "\n[job]\nop = pipeline\nseeds = 1000\n"
            << "n = 16\nd = 5\nm = 3\n[job]\nop = threshold\nn = 4\ngrid = 0.5,1.0\n"
            << "trials = 5\nbudget_nodes = 20000\nseeds = 3\n";
    }
    fs::path campA = scratch / "camp_a.out", campB = scratch / "camp_b.out";
    if (run_cli("pipeline --config " + cfg.string(), campA) != 0)
        return {false, "campaign run failed"};
    std::map<std::string, std::string> snapshot;
    for (const auto& entry : fs::recursive_directory_iterator(scratch / "camp"))
        if (entry.is_regular_file()) snapshot[entry.path().string()] = slurp(entry.path());
    if (run_cli("pipeline --config " + cfg.string(), campB) != 0)
        return {false, "campaign rerun failed"};
    if (slurp(campA) != slurp(campB)) return {false, "campaign stdout differs"};
    for (const auto& [path, content] : snapshot)
        if (slurp(path) != content) return {false, "campaign file " + path + " differs"};

    return {true, std::to_string(cmds.size()) + " subcommands plus campaign mode "
                  "byte-identical across reruns"};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {"greedy validity", criterion_greedy_validity},
        {"small-instance oracle", criterion_small_oracle},
        {"symmetry spread", criterion_symmetry_spread},
        {"cleaning statistics", criterion_cleaning_stats},
        {"step probabilities", criterion_step_probabilities},
        {"regularise feasibility", criterion_regularise},
        {"threshold lab", criterion_threshold_lab},
        {"determinism", criterion_cli_determinism},
    };
    int failures = 0;
    int idx = 0;
    for (const Entry& e : entries) {
        ++idx;
        Outcome o;
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        std::printf("criterion %d (%s): %s%s%s\n", idx, e.name, o.pass ? "PASS" : "FAIL",
                    o.detail.empty() ? "" : " - ", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}
