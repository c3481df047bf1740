#include "bifactor/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace bifactor {

namespace {

const std::set<std::string> kOps{"gen",    "greedy",    "absorb",  "refine",
                                 "spread", "threshold", "pipeline"};

const std::set<std::string> kInstanceKeys{"n",   "d",     "m",     "delta",
                                          "delta_prime", "eta",   "eps",
                                          "theta",       "clean_retry_cap",
                                          "matching_restart_cap"};

std::set<std::string> allowed_keys(const std::string& op) {
    std::set<std::string> keys{"op", "seeds"};
    if (op == "gen" || op == "greedy" || op == "absorb" || op == "spread" ||
        op == "pipeline")
        keys.insert(kInstanceKeys.begin(), kInstanceKeys.end());
    if (op == "spread") {
        keys.insert("trials");
        keys.insert("probes");
    }
    if (op == "pipeline") {
        keys.insert("spread_trials");
        keys.insert("spread_probes");
    }
    if (op == "threshold") {
        keys.insert({"n", "model", "grid", "trials", "budget_nodes", "host_file"});
    }
    if (op == "refine") {
        keys.insert({"host_file", "colours_file"});
    }
    return keys;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_ll(const std::string& s, long long& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtoll(s.c_str(), &end, 10);
    return errno == 0 && end == s.c_str() + s.size();
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-') return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtoull(s.c_str(), &end, 10);
    return errno == 0 && end == s.c_str() + s.size();
}

bool parse_d(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size();
}

struct RawJob {
    Job job;
    std::map<std::string, int> key_line;  // where each key was set
    int section_line = 0;
};

void require_int_range(const RawJob& rj, const std::string& key, long long lo, long long hi) {
    auto it = rj.job.params.find(key);
    if (it == rj.job.params.end()) return;
    int line = rj.key_line.count(key) ? rj.key_line.at(key) : rj.section_line;
    long long v;
    if (!parse_ll(it->second, v))
        throw SchemaError("key '" + key + "' needs an integer, got '" + it->second + "'", line);
    if (v < lo || v > hi)
        throw SchemaError("key '" + key + "' out of range [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]",
                          line);
}

void require_double_range(const RawJob& rj, const std::string& key, double lo, double hi,
                          bool open) {
    auto it = rj.job.params.find(key);
    if (it == rj.job.params.end()) return;
    int line = rj.key_line.count(key) ? rj.key_line.at(key) : rj.section_line;
    double v;
    if (!parse_d(it->second, v))
        throw SchemaError("key '" + key + "' needs a number, got '" + it->second + "'", line);
    bool ok = open ? (v > lo && v < hi) : (v >= lo && v <= hi);
    if (!ok)
        throw SchemaError("key '" + key + "' out of range " + (open ? "(" : "[") +
                              std::to_string(lo) + ", " + std::to_string(hi) +
                              (open ? ")" : "]"),
                          line);
}

void apply_default(Job& job, const std::string& key, const std::string& value) {
    job.params.emplace(key, value);  // keeps an explicit setting
}

void validate_job(RawJob& rj) {
    Job& job = rj.job;
    if (job.op.empty())
        throw SchemaError("job needs op = gen|greedy|absorb|refine|spread|threshold|pipeline",
                          rj.section_line);

    const std::set<std::string> allowed = allowed_keys(job.op);
    for (const auto& [key, value] : job.params)
        if (!allowed.count(key))
            throw SchemaError("key '" + key + "' is not valid for op " + job.op,
                              rj.key_line.count(key) ? rj.key_line.at(key) : rj.section_line);

    // Fill defaults, then range-check everything uniformly.
    if (allowed.count("n") && job.op != "threshold") {
        apply_default(job, "n", "200");
        apply_default(job, "d", "6");
        apply_default(job, "m", "7");
        apply_default(job, "delta", "0.48");
        apply_default(job, "delta_prime", "0.15");
        apply_default(job, "eta", "0.3");
        apply_default(job, "eps", "0.1");
        apply_default(job, "theta", "0.995");
        apply_default(job, "clean_retry_cap", "64");
        apply_default(job, "matching_restart_cap", "1000");
    }
    if (job.op == "spread") {
        apply_default(job, "trials", "200");
        apply_default(job, "probes", "8");
    }
    if (job.op == "pipeline") {
        apply_default(job, "spread_trials", "0");
        apply_default(job, "spread_probes", "8");
    }
    if (job.op == "threshold") {
        apply_default(job, "n", "8");
        apply_default(job, "model", "binomial");
        apply_default(job, "grid", "0.2,0.4,0.6,0.8,1.0");
        apply_default(job, "trials", "50");
        apply_default(job, "budget_nodes", "1000000");
    }
    if (job.op == "refine") {
        for (const char* key : {"host_file", "colours_file"})
            if (!job.params.count(key))
                throw SchemaError(std::string("op refine needs key '") + key + "'",
                                  rj.section_line);
    }

    require_int_range(rj, "n", 1, 1 << 20);
    require_double_range(rj, "d", 0.0, 1e9, true);
    require_int_range(rj, "m", 1, 1 << 20);
    require_double_range(rj, "delta", 0.0, 1.0, true);
    require_double_range(rj, "delta_prime", 0.0, 1.0, true);
    require_double_range(rj, "eta", 0.0, 1e9, true);
    require_double_range(rj, "eps", 0.0, 1.0, true);
    require_double_range(rj, "theta", 0.0, 1.0, true);
    require_int_range(rj, "clean_retry_cap", 1, 1 << 20);
    require_int_range(rj, "matching_restart_cap", 1, 1 << 20);
    require_int_range(rj, "trials", 1, 1 << 20);
    require_int_range(rj, "probes", 1, 1 << 20);
    require_int_range(rj, "spread_trials", 0, 1 << 20);
    require_int_range(rj, "spread_probes", 1, 1 << 20);
    require_int_range(rj, "budget_nodes", 1, std::numeric_limits<long long>::max());

    if (job.op == "threshold") {
        const std::string& model = job.params.at("model");
        int line = rj.key_line.count("model") ? rj.key_line.at("model") : rj.section_line;
        if (model != "binomial" && model != "fixed")
            throw SchemaError("key 'model' must be binomial or fixed", line);
        const std::string& grid = job.params.at("grid");
        int gline = rj.key_line.count("grid") ? rj.key_line.at("grid") : rj.section_line;
        std::vector<double> xs;
        std::stringstream ss(grid);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double v;
            if (!parse_d(trim(tok), v))
                throw SchemaError("key 'grid' needs comma-separated numbers", gline);
            xs.push_back(v);
        }
        if (xs.empty()) throw SchemaError("key 'grid' must not be empty", gline);
        if (!std::is_sorted(xs.begin(), xs.end()))
            throw SchemaError("key 'grid' must be ascending", gline);
        if (xs.front() < 0.0) throw SchemaError("key 'grid' values must be >= 0", gline);
        if (model == "binomial" && !job.params.count("host_file") && xs.back() > 1.0)
            throw SchemaError("key 'grid' probabilities must be <= 1", gline);
    }
}

}  // namespace

long long Job::get_int(const std::string& key) const {
    long long v = 0;
    if (!parse_ll(get(key), v))
        throw std::invalid_argument("job key '" + key + "' is not an integer");
    return v;
}

double Job::get_double(const std::string& key) const {
    double v = 0;
    if (!parse_d(get(key), v))
        throw std::invalid_argument("job key '" + key + "' is not a number");
    return v;
}

std::string Job::get(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw std::invalid_argument("job has no key '" + key + "'");
    return it->second;
}

Params Job::instance() const {
    Params p;
    p.n = int(get_int("n"));
    p.d = get_double("d");
    p.m = int(get_int("m"));
    p.delta = get_double("delta");
    p.delta_prime = get_double("delta_prime");
    p.eta = get_double("eta");
    p.eps = get_double("eps");
    p.theta = get_double("theta");
    p.clean_retry_cap = int(get_int("clean_retry_cap"));
    p.matching_restart_cap = int(get_int("matching_restart_cap"));
    p.validate();
    return p;
}

Campaign parse_config(std::istream& in) {
    Campaign campaign;
    std::vector<RawJob> raw;
    bool in_job = false;
    int parallelism_line = 0;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string s = trim(line);
        if (s.empty()) continue;

        if (s == "[job]") {
            raw.push_back({});
            raw.back().section_line = lineno;
            in_job = true;
            continue;
        }
        if (s.front() == '[')
            throw SchemaError("unknown section '" + s + "'; only [job] exists", lineno);

        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw SchemaError("expected key = value, got '" + s + "'", lineno);
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw SchemaError("empty key", lineno);
        if (value.empty()) throw SchemaError("key '" + key + "' has no value", lineno);

        if (!in_job) {
            if (key == "out")
                campaign.out_dir = value;
            else if (key == "parallelism") {
                long long v;
                if (!parse_ll(value, v) || v < 1)
                    throw SchemaError("parallelism must be a positive integer", lineno);
                campaign.parallelism = int(v);
                parallelism_line = lineno;
            } else
                throw SchemaError("key '" + key +
                                      "' is not valid before the first [job] section "
                                      "(top level takes out, parallelism)",
                                  lineno);
            continue;
        }

        RawJob& rj = raw.back();
        if (rj.job.params.count(key) || (key == "op" && !rj.job.op.empty()))
            throw SchemaError("key '" + key + "' set twice in one job", lineno);
        if (key == "op") {
            if (!kOps.count(value))
                throw SchemaError("unknown op '" + value +
                                      "'; expected gen|greedy|absorb|refine|spread|"
                                      "threshold|pipeline",
                                  lineno);
            rj.job.op = value;
        } else if (key == "seeds") {
            std::uint64_t lo = 0, hi = 0;
            std::size_t dots = value.find("..");
            bool ok;
            if (dots == std::string::npos) {
                ok = parse_u64(value, lo);
                hi = lo;
            } else {
                ok = parse_u64(trim(value.substr(0, dots)), lo) &&
                     parse_u64(trim(value.substr(dots + 2)), hi);
            }
            if (!ok || hi < lo)
                throw SchemaError("seeds needs 'A' or 'A..B' with A <= B", lineno);
            rj.job.seed_lo = lo;
            rj.job.seed_hi = hi;
        } else {
            rj.job.params[key] = value;
        }
        rj.key_line[key] = lineno;
    }

    (void)parallelism_line;
    if (raw.empty())
        throw SchemaError(
            "config has no jobs; add a [job] section with op = "
            "gen|greedy|absorb|refine|spread|threshold|pipeline",
            0);
    for (RawJob& rj : raw) {
        validate_job(rj);
        campaign.jobs.push_back(std::move(rj.job));
    }
    return campaign;
}

Campaign parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

Campaign parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config file '" + path + "'", 0);
    return parse_config(in);
}

}  // namespace bifactor
