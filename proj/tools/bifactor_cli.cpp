// Command-line workbench: generation, colouring, absorption, refinement,
// spread probes, and list-colouring threshold scans, plus a campaign runner.
//
// Exit codes: 0 success, 2 algorithmic abort (the process or a downstream
// stage gave up honestly), 3 invariant violation (a result failed its own
// audit), 4 configuration error (flags, config file, malformed inputs).
//
// Primary outputs are deterministic functions of the configuration and seed:
// manifests carry no timestamps, and every random draw is attributable to a
// (seed, stream) pair listed under "draws".

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bifactor/absorb.hpp"
#include "bifactor/bigraph.hpp"
#include "bifactor/config.hpp"
#include "bifactor/gen.hpp"
#include "bifactor/greedy.hpp"
#include "bifactor/params.hpp"
#include "bifactor/rng.hpp"
#include "bifactor/spread.hpp"
#include "bifactor/threshold.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace bifactor;

namespace {

// ---------------------------------------------------------------------------
// Shared argument bundles
// ---------------------------------------------------------------------------

struct RunArgs {
    Params params = desk_preset();
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string host_file;     // read the host instead of generating it
    std::string colours_file;  // refine input
    long long trials = 200;    // spread
    int probes = 8;            // spread
    long long spread_trials = 0;  // pipeline add-on report
    int spread_probes = 8;
};

struct ThresholdArgs {
    int n = 8;
    std::string model = "binomial";
    std::string grid = "0.2,0.4,0.6,0.8,1.0";
    long long trials = 50;
    long long budget_nodes = 1'000'000;
    std::uint64_t seed = 1;
    std::string host_file;  // scan an explicit host's own palette instead
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> xs;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
        if (pos != tok.size())
            throw std::invalid_argument("grid: bad entry '" + tok + "'");
        xs.push_back(v);
    }
    if (xs.empty()) throw std::invalid_argument("grid: no entries");
    return xs;
}

// ---------------------------------------------------------------------------
// JSON rendering
// ---------------------------------------------------------------------------

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

ordered_json params_json(const Params& p) {
    return ordered_json{{"n", p.n},
                        {"d", p.d},
                        {"m", p.m},
                        {"delta", p.delta},
                        {"delta_prime", p.delta_prime},
                        {"eta", p.eta},
                        {"eps", p.eps},
                        {"theta", p.theta},
                        {"clean_retry_cap", p.clean_retry_cap},
                        {"matching_restart_cap", p.matching_restart_cap}};
}

ordered_json check_json(const CheckResult& c) {
    ordered_json j{{"ok", c.ok}, {"certified", c.certified}};
    if (!c.ok) j["witness"] = c.witness;
    return j;
}

ordered_json draw_json(const std::string& stage, std::uint64_t seed, std::uint64_t stream,
                       const char* stream_name) {
    return ordered_json{
        {"stage", stage}, {"seed", seed}, {"stream", stream}, {"stream_name", stream_name}};
}

ordered_json abort_json(const AbortReport& a) {
    return ordered_json{{"reason", to_string(a.reason)},
                        {"step", a.step},
                        {"witness", a.witness},
                        {"detail", a.detail}};
}

ordered_json greedy_json(const RunResult& run) {
    ordered_json j;
    j["ok"] = run.ok();
    j["steps"] = run.steps;
    j["rounds"] = run.rounds_total;
    j["quasirandom"] = check_json(run.quasirandom);
    j["cleaning"] = {{"cleanings", run.cleaning.cleanings},
                     {"empty_cleanings", run.cleaning.empty_cleanings},
                     {"multiset_builds", run.cleaning.multiset_builds},
                     {"sample_attempts", run.cleaning.sample_attempts},
                     {"sample_successes", run.cleaning.sample_successes}};
    const InvariantCounters& inv = run.invariants;
    j["invariants"] = {{"colc_cap_checks", inv.colc_cap_checks},
                       {"colc_cap_violations", inv.colc_cap_violations},
                       {"palette_checks", inv.palette_checks},
                       {"palette_violations", inv.palette_violations},
                       {"col_window_checks", inv.col_window_checks},
                       {"col_window_violations", inv.col_window_violations},
                       {"host_sparse_gate", inv.host_sparse_gate},
                       {"batch_checks", inv.batch_checks},
                       {"batch_initial_violations", inv.batch_initial_violations},
                       {"batch_closed_violations", inv.batch_closed_violations}};
    if (run.abort) j["abort"] = abort_json(*run.abort);
    return j;
}

ordered_json overlap_json(const OverlapReport& o) {
    return ordered_json{{"level", o.level},     {"index", o.index}, {"target", o.target},
                        {"max_overlap", o.max_overlap}, {"bound", o.bound}, {"ok", o.ok}};
}

ordered_json probe_stat_json(const ProbeStat& ps) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : ps.probe.entries)
        entries.push_back(ordered_json{{"u", e.u}, {"v", e.v}, {"c", e.c}});
    return ordered_json{{"entries", entries},
                        {"hits", ps.hits},
                        {"freq", ps.freq},
                        {"radius", ps.radius}};
}

ordered_json spread_json(const SpreadEstimate& est) {
    ordered_json probes = ordered_json::array();
    for (const auto& ps : est.probes) probes.push_back(probe_stat_json(ps));
    return ordered_json{{"trials", est.trials}, {"q_hat", est.q_hat}, {"probes", probes}};
}

ordered_json curve_json(const ThresholdCurve& curve, const std::string& model) {
    ordered_json points = ordered_json::array();
    for (const auto& pt : curve.points)
        points.push_back(ordered_json{{"x", pt.x},
                                      {"trials", pt.trials},
                                      {"sat", pt.sat},
                                      {"unsat", pt.unsat},
                                      {"timeouts", pt.timeouts},
                                      {"freq", pt.freq},
                                      {"radius", pt.radius}});
    ordered_json j{{"n", curve.n},
                   {"palette", curve.palette},
                   {"model", model},
                   {"points", points},
                   {"monotone", curve.monotone},
                   {"crossed", curve.crossed}};
    if (curve.crossed)
        j["crossing"] = ordered_json{{"x", curve.crossing_x},
                                     {"lo", curve.crossing_lo},
                                     {"hi", curve.crossing_hi},
                                     {"C", curve.crossing_C}};
    return j;
}

// ---------------------------------------------------------------------------
// Host + class plumbing
// ---------------------------------------------------------------------------

void require_readable(const std::string& path) {
    if (!fs::exists(path))
        throw std::invalid_argument("input file does not exist: " + path);
}

// Loads the host from a file or generates a fresh instance, recording the
// source and the draws it consumed.
BiGraph obtain_host(const RunArgs& a, ordered_json& manifest, ordered_json& draws,
                    bool write_copy) {
    if (!a.host_file.empty()) {
        require_readable(a.host_file);
        BiGraph H = read_graph_file(a.host_file);
        manifest["host"] = ordered_json{{"source", a.host_file},
                                        {"n", H.n()},
                                        {"edges", H.edge_count()},
                                        {"min_degree", H.min_degree()},
                                        {"max_degree", H.max_degree()}};
        return H;
    }
    BiGraph H = gen_quasirandom_instance(a.params, a.seed);
    draws.push_back(draw_json("gen", a.seed, streams::gen_graph, "gen_graph"));
    draws.push_back(draw_json("gen_gate", a.seed, streams::precheck, "precheck"));
    manifest["host"] = ordered_json{{"source", "generated"},
                                    {"n", H.n()},
                                    {"edges", H.edge_count()},
                                    {"min_degree", H.min_degree()},
                                    {"max_degree", H.max_degree()}};
    if (write_copy) {
        fs::path path = fs::path(a.out_dir) / "host.txt";
        write_graph_file(path.string(), H);
        manifest["host"]["file"] = "host.txt";
    }
    return H;
}

std::unordered_map<long long, int> edge_index(const BiGraph& H) {
    std::unordered_map<long long, int> idx;
    idx.reserve(std::size_t(H.edge_count()));
    for (int id = 0; id < H.edge_count(); ++id) {
        auto [l, r] = H.edge(id);
        idx[static_cast<long long>(l) * H.n() + r] = id;
    }
    return idx;
}

// Rewrites a list of edge-disjoint classes covering the host as a colouring.
Factorisation classes_to_factorisation(const BiGraph& H, const std::vector<BiGraph>& classes) {
    Factorisation F(H, int(classes.size()));
    auto idx = edge_index(H);
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (int id = 0; id < classes[c].edge_count(); ++id) {
            auto [l, r] = classes[c].edge(id);
            F.set_colour(idx.at(static_cast<long long>(l) * H.n() + r), int(c));
        }
    if (!F.is_complete())
        throw std::logic_error("classes do not cover the host");
    return F;
}

// True iff every colour class of F is a perfect matching.
bool all_perfect_matchings(const Factorisation& F) {
    if (!F.is_complete()) return false;
    CheckResult band = F.validate_regular(DegreeBand{1.0, 0.0});
    return band.ok;
}

// Single-edge probes drawn from a produced colouring.
std::vector<Probe> edge_probes(const Factorisation& F, int count, Rng& rng) {
    const BiGraph& H = F.host();
    int k = std::min(count, H.edge_count());
    std::vector<Probe> probes;
    for (std::size_t id : rng.sample_indices(std::size_t(H.edge_count()), std::size_t(k))) {
        auto [l, r] = H.edge(int(id));
        Probe p;
        p.entries.push_back(Probe::Entry{l, r, F.colour_of(int(id))});
        probes.push_back(std::move(p));
    }
    return probes;
}

void write_manifest(const RunArgs& a, const ordered_json& manifest) {
    fs::path path = fs::path(a.out_dir) / "manifest.json";
    std::ofstream out(path);
    out << manifest.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Subcommand bodies.  Each fills `manifest` and returns the exit code;
// algorithmic aborts are caught here so the manifest records them.
// ---------------------------------------------------------------------------

int run_gen(const RunArgs& a, ordered_json& manifest) {
    a.params.validate();
    fs::create_directories(a.out_dir);
    manifest["op"] = "gen";
    manifest["params"] = params_json(a.params);
    manifest["seed"] = a.seed;
    ordered_json draws = ordered_json::array();

    BiGraph H = gen_quasirandom_instance(a.params, a.seed);
    draws.push_back(draw_json("gen", a.seed, streams::gen_graph, "gen_graph"));
    draws.push_back(draw_json("gen_gate", a.seed, streams::precheck, "precheck"));

    fs::path path = fs::path(a.out_dir) / "host.txt";
    write_graph_file(path.string(), H);

    CheckOptions opts;
    opts.seed = a.seed;
    opts.stream = streams::precheck;
    CheckResult q = is_quasirandom(H, a.params.delta, a.params.delta_prime, a.params.eta,
                                   a.params.p(), opts);
    draws.push_back(draw_json("report_gate", a.seed, streams::precheck, "precheck"));

    manifest["host"] = ordered_json{{"file", "host.txt"},
                                    {"n", H.n()},
                                    {"edges", H.edge_count()},
                                    {"min_degree", H.min_degree()},
                                    {"max_degree", H.max_degree()}};
    manifest["quasirandom"] = check_json(q);
    manifest["draws"] = draws;
    return 0;
}

int run_colour(const RunArgs& a, ordered_json& manifest) {
    a.params.validate();
    fs::create_directories(a.out_dir);
    manifest["op"] = "greedy";
    manifest["params"] = params_json(a.params);
    manifest["seed"] = a.seed;
    ordered_json draws = ordered_json::array();

    BiGraph H = obtain_host(a, manifest, draws, /*write_copy=*/true);
    RunResult run = run_greedy(H, a.params, a.seed);
    draws.push_back(draw_json("greedy", a.seed, streams::greedy, "greedy"));
    draws.push_back(draw_json("greedy_gate", a.seed, streams::precheck, "precheck"));

    manifest["greedy"] = greedy_json(run);
    manifest["draws"] = draws;
    if (!run.ok()) return 2;

    fs::path path = fs::path(a.out_dir) / "colours.txt";
    write_factorisation_file(path.string(), *run.factorisation);
    manifest["outputs"] = ordered_json{{"colours", "colours.txt"}};

    DegreeBand band{a.params.d, 2.0 * a.params.delta};
    CheckResult partition = run.factorisation->validate_regular(band);
    manifest["partition"] = check_json(partition);
    manifest["partition"]["band_lo"] = band.lo();
    manifest["partition"]["band_hi"] = band.hi();
    return partition.ok ? 0 : 3;
}

int run_absorb(const RunArgs& a, ordered_json& manifest) {
    a.params.validate();
    fs::create_directories(a.out_dir);
    manifest["op"] = "absorb";
    manifest["params"] = params_json(a.params);
    manifest["seed"] = a.seed;
    ordered_json draws = ordered_json::array();

    BiGraph H = obtain_host(a, manifest, draws, /*write_copy=*/true);

    Vortex vx;
    try {
        vx = build_vortex(H, a.params, a.seed);
    } catch (const GreedyAborted& e) {
        draws.push_back(draw_json("vortex", a.seed, streams::greedy, "greedy"));
        manifest["abort"] = abort_json(e.report);
        manifest["abort"]["stage"] = "vortex";
        manifest["draws"] = draws;
        return 2;
    }
    draws.push_back(draw_json("vortex", a.seed, streams::greedy, "greedy"));
    draws.push_back(draw_json("vortex_gate", a.seed, streams::precheck, "precheck"));
    ordered_json levels = ordered_json::array();
    for (const auto& level : vx.pieces) levels.push_back(level.size());
    manifest["vortex"] = ordered_json{{"ell", vx.ell}, {"pieces_per_level", levels}};

    AbsorbOutcome out;
    try {
        out = vortex_absorb(vx, a.params, a.seed);
    } catch (const LevelAbort& e) {
        manifest["abort"] =
            ordered_json{{"stage", "absorb"}, {"level", e.level}, {"detail", e.what()}};
        manifest["draws"] = draws;
        return 2;
    }
    for (int pass = 0; pass + 1 < vx.ell; ++pass) {
        std::uint64_t sub = splitmix64(a.seed ^ std::uint64_t(pass));
        draws.push_back(
            draw_json("absorb_pass_" + std::to_string(pass + 1), sub, streams::greedy, "greedy"));
    }

    Factorisation F = classes_to_factorisation(H, out.classes);
    fs::path path = fs::path(a.out_dir) / "classes.txt";
    write_factorisation_file(path.string(), F);

    ordered_json overlaps = ordered_json::array();
    for (const auto& o : out.overlaps) overlaps.push_back(overlap_json(o));
    manifest["absorb"] = ordered_json{{"classes", int(out.classes.size())},
                                      {"degrees", out.degrees},
                                      {"d_values", out.d_values},
                                      {"overlaps", overlaps}};
    manifest["outputs"] = ordered_json{{"classes", "classes.txt"}};
    manifest["draws"] = draws;
    return 0;
}

int run_refine(const RunArgs& a, ordered_json& manifest) {
    fs::create_directories(a.out_dir);
    manifest["op"] = "refine";
    manifest["seed"] = a.seed;
    manifest["inputs"] =
        ordered_json{{"host", a.host_file}, {"colours", a.colours_file}};

    require_readable(a.host_file);
    require_readable(a.colours_file);
    BiGraph H = read_graph_file(a.host_file);
    Factorisation F = read_factorisation_file(a.colours_file);
    if (F.host().n() != H.n() || F.host().edge_count() != H.edge_count())
        throw std::invalid_argument("refine: colours file does not match the host file");
    for (int id = 0; id < H.edge_count(); ++id)
        if (F.host().edge(id) != H.edge(id))
            throw std::invalid_argument("refine: colours file does not match the host file");

    Factorisation ones = refine_to_one_factorisation(F, a.seed);
    ordered_json draws = ordered_json::array();
    draws.push_back(draw_json("refine", a.seed, streams::absorb, "absorb"));

    fs::path path = fs::path(a.out_dir) / "ones.txt";
    write_factorisation_file(path.string(), ones);

    bool perfect = all_perfect_matchings(ones);
    manifest["refine"] = ordered_json{{"classes_in", F.m()},
                                      {"classes_out", ones.m()},
                                      {"all_perfect_matchings", perfect}};
    manifest["outputs"] = ordered_json{{"ones", "ones.txt"}};
    manifest["draws"] = draws;
    return perfect ? 0 : 3;
}

int run_spread(const RunArgs& a, ordered_json& manifest) {
    a.params.validate();
    manifest["op"] = "spread";
    manifest["params"] = params_json(a.params);
    manifest["seed"] = a.seed;
    ordered_json draws = ordered_json::array();

    BiGraph H = obtain_host(a, manifest, draws, /*write_copy=*/false);
    draws.push_back(draw_json("spread", a.seed, streams::spread, "spread"));
    draws.push_back(ordered_json{
        {"stage", "spread_trials"},
        {"derivation", "per-trial seeds are drawn from the spread stream; each trial "
                       "runs the colouring process on (derived_seed, greedy)"}});

    Rng rng(a.seed, streams::spread);
    auto sampler = [&](Rng& r) -> Factorisation {
        for (int attempt = 0; attempt < 200; ++attempt) {
            RunResult run = run_greedy(H, a.params, r.next());
            if (run.ok()) return std::move(*run.factorisation);
        }
        throw RestartExhausted("spread sampler: 200 colouring attempts all aborted");
    };

    Factorisation reference = sampler(rng);
    std::vector<Probe> probes = edge_probes(reference, a.probes, rng);
    SpreadEstimate est = estimate_spread(sampler, probes, a.trials, rng);

    manifest["spread"] = spread_json(est);
    manifest["spread"]["q_hat_times_n"] = est.q_hat * double(H.n());
    manifest["draws"] = draws;
    return 0;
}

int run_threshold(const ThresholdArgs& a, ordered_json& manifest) {
    manifest["op"] = "threshold";
    manifest["seed"] = a.seed;
    std::vector<double> grid = parse_grid(a.grid);

    ThresholdCurve curve;
    if (!a.host_file.empty()) {
        require_readable(a.host_file);
        BiGraph H = read_graph_file(a.host_file);
        manifest["host"] = ordered_json{{"source", a.host_file},
                                        {"n", H.n()},
                                        {"edges", H.edge_count()}};
        curve = estimate_threshold_subgraph(H, grid, a.trials, a.budget_nodes, a.seed);
        manifest["curve"] = curve_json(curve, "binomial_subgraph");
    } else {
        ListModel::Kind kind;
        if (a.model == "binomial")
            kind = ListModel::Kind::binomial;
        else if (a.model == "fixed")
            kind = ListModel::Kind::fixed_size;
        else
            throw std::invalid_argument("threshold: model must be binomial or fixed");
        curve = estimate_threshold(a.n, kind, grid, a.trials, a.budget_nodes, a.seed);
        manifest["curve"] = curve_json(curve, a.model);
    }
    manifest["budget_nodes"] = a.budget_nodes;
    manifest["draws"] = ordered_json::array(
        {draw_json("threshold", a.seed, streams::threshold, "threshold")});
    return 0;
}

int run_pipeline(const RunArgs& a, ordered_json& manifest) {
    a.params.validate();
    fs::create_directories(a.out_dir);
    manifest["op"] = "pipeline";
    manifest["params"] = params_json(a.params);
    manifest["seed"] = a.seed;
    ordered_json draws = ordered_json::array();

    BiGraph H = obtain_host(a, manifest, draws, /*write_copy=*/true);

    Vortex vx;
    try {
        vx = build_vortex(H, a.params, a.seed);
    } catch (const GreedyAborted& e) {
        draws.push_back(draw_json("vortex", a.seed, streams::greedy, "greedy"));
        manifest["abort"] = abort_json(e.report);
        manifest["abort"]["stage"] = "vortex";
        manifest["draws"] = draws;
        return 2;
    }
    draws.push_back(draw_json("vortex", a.seed, streams::greedy, "greedy"));
    draws.push_back(draw_json("vortex_gate", a.seed, streams::precheck, "precheck"));
    ordered_json levels = ordered_json::array();
    for (const auto& level : vx.pieces) levels.push_back(level.size());
    manifest["vortex"] = ordered_json{{"ell", vx.ell}, {"pieces_per_level", levels}};

    AbsorbOutcome out;
    try {
        out = vortex_absorb(vx, a.params, a.seed);
    } catch (const LevelAbort& e) {
        manifest["abort"] =
            ordered_json{{"stage", "absorb"}, {"level", e.level}, {"detail", e.what()}};
        manifest["draws"] = draws;
        return 2;
    }
    for (int pass = 0; pass + 1 < vx.ell; ++pass) {
        std::uint64_t sub = splitmix64(a.seed ^ std::uint64_t(pass));
        draws.push_back(
            draw_json("absorb_pass_" + std::to_string(pass + 1), sub, streams::greedy, "greedy"));
    }

    Factorisation classes = classes_to_factorisation(H, out.classes);
    write_factorisation_file((fs::path(a.out_dir) / "classes.txt").string(), classes);
    ordered_json overlaps = ordered_json::array();
    for (const auto& o : out.overlaps) overlaps.push_back(overlap_json(o));
    manifest["absorb"] = ordered_json{{"classes", int(out.classes.size())},
                                      {"degrees", out.degrees},
                                      {"d_values", out.d_values},
                                      {"overlaps", overlaps}};

    Factorisation ones = refine_to_one_factorisation(classes, a.seed);
    draws.push_back(draw_json("refine", a.seed, streams::absorb, "absorb"));
    write_factorisation_file((fs::path(a.out_dir) / "ones.txt").string(), ones);

    bool perfect = all_perfect_matchings(ones);
    manifest["refine"] = ordered_json{{"classes_in", classes.m()},
                                      {"classes_out", ones.m()},
                                      {"all_perfect_matchings", perfect}};

    if (a.spread_trials > 0) {
        Rng rng(a.seed, streams::spread);
        draws.push_back(draw_json("spread", a.seed, streams::spread, "spread"));
        draws.push_back(ordered_json{
            {"stage", "spread_trials"},
            {"derivation", "per-trial refinement seeds are drawn from the spread stream"}});
        std::vector<Probe> probes = edge_probes(ones, a.spread_probes, rng);
        auto sampler = [&](Rng& r) -> Factorisation {
            return refine_to_one_factorisation(classes, r.next());
        };
        SpreadEstimate est = estimate_spread(sampler, probes, a.spread_trials, rng);
        manifest["spread"] = spread_json(est);
        manifest["spread"]["q_hat_times_n"] = est.q_hat * double(H.n());
    }

    manifest["outputs"] = ordered_json{
        {"classes", "classes.txt"}, {"ones", "ones.txt"}, {"manifest", "manifest.json"}};
    manifest["draws"] = draws;
    return perfect ? 0 : 3;
}

// ---------------------------------------------------------------------------
// Campaign runner
// ---------------------------------------------------------------------------

RunArgs args_from_job(const Job& job, std::uint64_t seed, const std::string& dir) {
    RunArgs a;
    a.seed = seed;
    a.out_dir = dir;
    if (job.op != "refine" && job.op != "threshold") a.params = job.instance();
    if (job.op == "refine") {
        a.host_file = job.get("host_file");
        a.colours_file = job.get("colours_file");
    }
    if (job.op == "spread") {
        a.trials = job.get_int("trials");
        a.probes = int(job.get_int("probes"));
    }
    if (job.op == "pipeline") {
        a.spread_trials = job.get_int("spread_trials");
        a.spread_probes = int(job.get_int("spread_probes"));
    }
    return a;
}

ThresholdArgs threshold_args_from_job(const Job& job, std::uint64_t seed) {
    ThresholdArgs t;
    t.seed = seed;
    t.n = int(job.get_int("n"));
    t.model = job.get("model");
    t.grid = job.get("grid");
    t.trials = job.get_int("trials");
    t.budget_nodes = job.get_int("budget_nodes");
    if (job.has("host_file")) t.host_file = job.get("host_file");
    return t;
}

int dispatch_job(const Job& job, std::uint64_t seed, const std::string& dir,
                 ordered_json& manifest) {
    if (job.op == "threshold") {
        ThresholdArgs t = threshold_args_from_job(job, seed);
        return run_threshold(t, manifest);
    }
    RunArgs a = args_from_job(job, seed, dir);
    if (job.op == "gen") return run_gen(a, manifest);
    if (job.op == "greedy") return run_colour(a, manifest);
    if (job.op == "absorb") return run_absorb(a, manifest);
    if (job.op == "refine") return run_refine(a, manifest);
    if (job.op == "spread") return run_spread(a, manifest);
    if (job.op == "pipeline") return run_pipeline(a, manifest);
    throw std::invalid_argument("unknown op " + job.op);
}

int run_campaign(const std::string& config_path) {
    Campaign campaign = parse_config_file(config_path);
    // The parallelism key is accepted for forward compatibility; runs execute
    // serially so stdout order and manifests stay reproducible.
    int exit_code = 0;
    long long runs = 0, ok = 0, aborted = 0, failed = 0;

    for (std::size_t idx = 0; idx < campaign.jobs.size(); ++idx) {
        const Job& job = campaign.jobs[idx];
        for (std::uint64_t s = job.seed_lo;; ++s) {
            std::string dir = campaign.out_dir + "/job" + std::to_string(idx) + "_seed" +
                              std::to_string(s);
            fs::create_directories(dir);
            ordered_json manifest;
            ordered_json line{{"job", idx}, {"op", job.op}, {"seed", s}, {"dir", dir}};
            int code;
            try {
                code = dispatch_job(job, s, dir, manifest);
            } catch (const std::invalid_argument& e) {
                code = 4;
                manifest["error"] = e.what();
            } catch (const std::logic_error& e) {
                code = 3;
                manifest["error"] = e.what();
            } catch (const std::runtime_error& e) {
                code = 2;
                manifest["error"] = e.what();
            }
            manifest["exit"] = code;
            {
                std::ofstream out(fs::path(dir) / "manifest.json");
                out << manifest.dump(2) << "\n";
            }
            line["exit"] = code;
            if (manifest.contains("abort")) line["abort"] = manifest["abort"];
            if (manifest.contains("error")) line["error"] = manifest["error"];
            std::cout << line.dump() << "\n";

            ++runs;
            if (code == 0)
                ++ok;
            else if (code == 2)
                ++aborted;
            else
                ++failed;
            if (code != 0) exit_code = std::max(exit_code, code == 2 ? 2 : code);
            if (s == job.seed_hi) break;
        }
    }
    ordered_json summary{{"campaign", ordered_json{{"config", config_path},
                                                   {"runs", runs},
                                                   {"ok", ok},
                                                   {"aborted", aborted},
                                                   {"failed", failed},
                                                   {"exit", exit_code}}}};
    std::cout << summary.dump() << "\n";
    return exit_code;
}

// ---------------------------------------------------------------------------
// Flag wiring
// ---------------------------------------------------------------------------

void add_instance_flags(CLI::App* cmd, Params& p) {
    cmd->add_option("--n", p.n, "vertices per side");
    cmd->add_option("--d", p.d, "per-class degree target");
    cmd->add_option("--m", p.m, "number of colour classes");
    cmd->add_option("--delta", p.delta, "degree-band tolerance");
    cmd->add_option("--delta-prime", p.delta_prime, "subset-size floor factor");
    cmd->add_option("--eta", p.eta, "sparseness scale");
    cmd->add_option("--eps", p.eps, "spread exponent margin");
    cmd->add_option("--theta", p.theta, "fullness cut-off");
    cmd->add_option("--clean-retry-cap", p.clean_retry_cap, "cleaning retry budget");
    cmd->add_option("--matching-restart-cap", p.matching_restart_cap,
                    "matching sampler restart budget");
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const std::logic_error& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "abort: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasirandom bipartite factorisation workbench"};
    app.require_subcommand(1);
    int rc = 0;

    RunArgs gen_a;
    auto* gen_cmd = app.add_subcommand("gen", "generate a quasirandom regular host");
    add_instance_flags(gen_cmd, gen_a.params);
    gen_cmd->add_option("--seed", gen_a.seed, "master seed");
    gen_cmd->add_option("--out-dir", gen_a.out_dir, "output directory");
    gen_cmd->callback([&] {
        rc = guarded([&] {
            ordered_json manifest;
            int code = run_gen(gen_a, manifest);
            write_manifest(gen_a, manifest);
            emit(manifest);
            return code;
        });
    });

    RunArgs greedy_a;
    auto* greedy_cmd =
        app.add_subcommand("greedy", "run the random greedy colouring process");
    add_instance_flags(greedy_cmd, greedy_a.params);
    greedy_cmd->add_option("--seed", greedy_a.seed, "master seed");
    greedy_cmd->add_option("--out-dir", greedy_a.out_dir, "output directory");
    greedy_cmd->add_option("--host", greedy_a.host_file, "host graph file (skips generation)");
    greedy_cmd->callback([&] {
        rc = guarded([&] {
            ordered_json manifest;
            int code = run_colour(greedy_a, manifest);
            write_manifest(greedy_a, manifest);
            emit(manifest);
            return code;
        });
    });

    RunArgs absorb_a;
    auto* absorb_cmd =
        app.add_subcommand("absorb", "build a vortex and absorb it into regular classes");
    add_instance_flags(absorb_cmd, absorb_a.params);
    absorb_cmd->add_option("--seed", absorb_a.seed, "master seed");
    absorb_cmd->add_option("--out-dir", absorb_a.out_dir, "output directory");
    absorb_cmd->add_option("--host", absorb_a.host_file, "host graph file (skips generation)");
    absorb_cmd->callback([&] {
        rc = guarded([&] {
            ordered_json manifest;
            int code = run_absorb(absorb_a, manifest);
            write_manifest(absorb_a, manifest);
            emit(manifest);
            return code;
        });
    });

    RunArgs refine_a;
    auto* refine_cmd =
        app.add_subcommand("refine", "split regular classes into perfect matchings");
    refine_cmd->add_option("--host", refine_a.host_file, "host graph file")->required();
    refine_cmd->add_option("--colours", refine_a.colours_file, "class colouring file")
        ->required();
    refine_cmd->add_option("--seed", refine_a.seed, "master seed");
    refine_cmd->add_option("--out-dir", refine_a.out_dir, "output directory");
    refine_cmd->callback([&] {
        rc = guarded([&] {
            ordered_json manifest;
            int code = run_refine(refine_a, manifest);
            write_manifest(refine_a, manifest);
            emit(manifest);
            return code;
        });
    });

    RunArgs spread_a;
    auto* spread_cmd =
        app.add_subcommand("spread", "estimate the spread of the colouring distribution");
    add_instance_flags(spread_cmd, spread_a.params);
    spread_cmd->add_option("--seed", spread_a.seed, "master seed");
    spread_cmd->add_option("--host", spread_a.host_file, "host graph file (skips generation)");
    spread_cmd->add_option("--trials", spread_a.trials, "sampling trials");
    spread_cmd->add_option("--probes", spread_a.probes, "single-edge probes");
    spread_cmd->callback([&] {
        rc = guarded([&] {
            ordered_json manifest;
            int code = run_spread(spread_a, manifest);
            emit(manifest);
            return code;
        });
    });

    ThresholdArgs thr_a;
    auto* thr_cmd =
        app.add_subcommand("threshold", "scan list-colouring solvability over a grid");
    thr_cmd->add_option("--n", thr_a.n, "side size of the complete host");
    thr_cmd->add_option("--model", thr_a.model, "list model: binomial or fixed");
    thr_cmd->add_option("--grid", thr_a.grid, "comma-separated grid values");
    thr_cmd->add_option("--trials", thr_a.trials, "trials per grid point");
    thr_cmd->add_option("--budget-nodes", thr_a.budget_nodes,
                        "search-node budget per solve (deterministic)");
    thr_cmd->add_option("--seed", thr_a.seed, "master seed");
    thr_cmd->add_option("--host", thr_a.host_file, "scan this host instead of a complete one");
    thr_cmd->callback([&] {
        rc = guarded([&] {
            ordered_json manifest;
            int code = run_threshold(thr_a, manifest);
            emit(manifest);
            return code;
        });
    });

    RunArgs pipe_a;
    std::string config_path;
    auto* pipe_cmd = app.add_subcommand(
        "pipeline", "full chain: generate, vortex, absorb, refine, verify");
    add_instance_flags(pipe_cmd, pipe_a.params);
    pipe_cmd->add_option("--seed", pipe_a.seed, "master seed");
    pipe_cmd->add_option("--out-dir", pipe_a.out_dir, "output directory");
    pipe_cmd->add_option("--host", pipe_a.host_file, "host graph file (skips generation)");
    pipe_cmd->add_option("--spread-trials", pipe_a.spread_trials,
                         "re-refinement trials for a spread report (0 = off)");
    pipe_cmd->add_option("--spread-probes", pipe_a.spread_probes,
                         "probes for the spread report");
    pipe_cmd->add_option("--config", config_path,
                         "campaign config file; runs every job x seed");
    pipe_cmd->callback([&] {
        rc = guarded([&] {
            if (!config_path.empty()) return run_campaign(config_path);
            ordered_json manifest;
            int code = run_pipeline(pipe_a, manifest);
            write_manifest(pipe_a, manifest);
            emit(manifest);
            return code;
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }
    return rc;
}
