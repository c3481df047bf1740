#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifactor/params.hpp"

namespace bifactor {

// Config rejection; line is 1-based and 0 for file-level complaints.
struct SchemaError : std::runtime_error {
    int line;
    SchemaError(const std::string& what, int line_no)
        : std::runtime_error(line_no > 0 ? what + " (line " + std::to_string(line_no) + ")"
                                         : what),
          line(line_no) {}
};

// One seeded job of a campaign.  params holds every op-relevant key as its
// textual value, with defaults filled in at parse time so a manifest echo
// shows the complete effective configuration.
struct Job {
    std::string op;
    std::map<std::string, std::string> params;
    std::uint64_t seed_lo = 0;
    std::uint64_t seed_hi = 0;  // inclusive

    // Typed accessors over the resolved params.
    long long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::string get(const std::string& key) const;
    bool has(const std::string& key) const { return params.count(key) > 0; }

    // Instance parameters (n, d, m and the tolerance block) as a Params.
    Params instance() const;
};

struct Campaign {
    std::string out_dir = "out";
    int parallelism = 1;
    std::vector<Job> jobs;
};

// Parses the campaign format:
//   - `key = value` lines; `#` starts a comment; blank lines are ignored.
//   - Top level accepts `out` and `parallelism`.
//   - Each `[job]` section opens a job; `op` is required and must be one of
//     gen, greedy, absorb, refine, spread, threshold, pipeline.
//   - `seeds = A..B` (or a single value) gives the job's seed range.
//   - Remaining keys must belong to the op's allowlist; instance keys
//     default to the desk preset, op keys to documented values.
// Violations (unknown key, bad number, out-of-range tolerance, missing op)
// throw SchemaError carrying the offending line.
Campaign parse_config(std::istream& in);
Campaign parse_config_text(const std::string& text);
Campaign parse_config_file(const std::string& path);

}  // namespace bifactor
