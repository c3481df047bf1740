#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "bifactor/bigraph.hpp"
#include "bifactor/factorisation.hpp"
#include "bifactor/params.hpp"
#include "bifactor/rng.hpp"

namespace bifactor {

// Growth threshold for the typical-degree window at round i.
double f_threshold(long long i, double eta, double eps, double d, int m);

enum class AbortReason {
    UnsafeCount,
    BadColour,
    NoEligibleColour,
    CleanRetryExhausted,
    NoPerfectMatching,
};
std::string to_string(AbortReason r);

struct AbortReport {
    AbortReason reason;
    long long step = 0;
    int witness = -1;  // vertex or colour, depending on the reason
    std::string detail;
};

struct StepTrace {
    enum class Kind { Standard, Exceptional, Cleaning, Skip };
    Kind kind;
    long long step = 0;
    long long round = 0;
    int vertex = -1;
    std::vector<std::pair<int, int>> coloured;  // (edge id, colour), in event order
    std::vector<int> batch;                     // batch appended to the queue, if any
};

struct CleaningStats {
    long long cleanings = 0;        // completed cleaning steps
    long long empty_cleanings = 0;  // no uncoloured edges left at the vertex
    long long multiset_builds = 0;  // |Y| >= |C_v|: deterministic multiplicities
    long long sample_attempts = 0;  // random-subset draws tried
    long long sample_successes = 0; // draws that passed the acceptance event
};

struct InvariantCounters {
    // Per-colour degree cap at every vertex, checked at every colouring.
    long long colc_cap_checks = 0;
    long long colc_cap_violations = 0;
    // Cleaning palette size |C_v| >= (1-3*theta)m, checked at every cleaning.
    long long palette_checks = 0;
    long long palette_violations = 0;
    // Safe-vertex degree window at early rounds; only meaningful while the
    // growth threshold stays below eta^0.9, so checks count those rounds.
    long long col_window_checks = 0;
    long long col_window_violations = 0;
    // Batch sizes against dm and 2dm; meaningful only on hosts passing the
    // sparseness gate recorded below.
    bool host_sparse_gate = false;
    long long batch_checks = 0;
    long long batch_initial_violations = 0;
    long long batch_closed_violations = 0;
};

struct RoundStats {
    long long round = 0;
    long long coloured = 0;  // edges coloured before the round's first slot
    int atypical = 0, exceptional = 0, blocked = 0, attacked = 0;
    int blocking = 0, attacking = 0, dangerous = 0, unsafe = 0, cleaned = 0;
};

// The colouring process as a copyable, steppable state machine.  One call to
// step() serves one scheduler slot: it drains the cleaning queue, then makes
// a standard or exceptional step at the active (vertex, colour) cursor, and
// advances the cursor.
class GreedyProcess {
  public:
    GreedyProcess(const BiGraph& H, const Params& params, std::uint64_t seed);

    bool step();  // false once finished or aborted
    void run_to_completion();

    // Replace the random stream (used for replaying copies of a state).
    void reseed(std::uint64_t seed, std::uint64_t stream);

    bool finished() const { return fact_.is_complete(); }
    bool aborted() const { return abort_.has_value(); }
    const std::optional<AbortReport>& abort_report() const { return abort_; }

    const BiGraph& host() const { return fact_.host(); }
    const Params& params() const { return params_; }
    const Factorisation& colouring() const { return fact_; }

    long long round() const { return round_; }
    long long step_count() const { return step_; }
    int active_vertex() const { return pos_; }
    int active_colour() const { return cstar_; }
    bool early() const { return is_early(round_); }
    double par() const { return 2.0 * double(round_) / params_.m; }

    int col(int v) const { return col_.at(v); }
    int col_c(int v, int c) const { return colc_.at(idx(v, c)); }
    std::vector<int> uncoloured_edges_at(int v) const;

    bool currently_full(int v, int c) const { return full_cond(v, c, round_); }
    bool currently_sparse(int v, int c) const { return sparse_cond(v, c, round_); }
    bool ever_full(int v, int c) const { return ever_full_.at(idx(v, c)) != 0; }
    bool ever_sparse(int v, int c) const { return ever_sparse_.at(idx(v, c)) != 0; }

    bool is_atypical(int v) const { return atypical_.at(v) != 0; }
    bool is_exceptional(int v) const { return exceptional_.at(v) != 0; }
    bool is_blocked(int v) const { return blocked_.at(v) != 0; }
    bool is_attacked(int v) const { return attacked_.at(v) != 0; }
    bool is_blocking(int v) const { return blocking_.at(v) != 0; }
    bool is_attacking(int v) const { return attacking_.at(v) != 0; }
    bool is_dangerous(int v) const { return dangerous_.at(v) != 0; }
    bool is_unsafe(int v) const { return unsafe_.at(v) != 0; }
    bool is_cleaned(int v) const { return cleaned_.at(v) != 0; }
    bool is_safe(int v) const { return !is_unsafe(v); }

    int unsafe_count() const { return unsafe_count_; }
    int fullsparse_count(int c) const { return fullsparse_count_.at(c); }
    int unsafe_neighbours(int v) const { return unsafe_nbrs_.at(v); }
    int cleaned_neighbours(int v) const { return cleaned_nbrs_.at(v); }
    const std::deque<int>& queue() const { return queue_; }

    // Batch construction around a set of just-latched unsafe vertices:
    // closure, the low-internal-degree core B', the auxiliary graph H_B and
    // the queue order (a degeneracy order of H_B).
    struct BatchResult {
        std::vector<int> B;
        std::vector<int> Bprime;
        std::vector<std::pair<int, int>> HB_edges;
        std::vector<int> order;
    };
    BatchResult build_batch(const std::vector<int>& newly_unsafe) const;

    // Auxiliary cleaning graph at v: X are the far endpoints of uncoloured
    // edges, Y a colour multiset over the admissible palette, edges joining
    // each u to the colours it is not currently full for.
    struct BvResult {
        int v = -1;
        std::vector<int> X;       // global endpoint per uncoloured edge
        std::vector<int> edge_of; // host edge id aligned with X
        std::vector<int> Y;       // colour per Y slot
        std::vector<int> palette; // C_v
        BiGraph graph{1};         // |X| by |X| availability graph
        bool ok = false;
        bool multiset = false;    // deterministic multiplicity mode
        int attempts = 0;
    };
    BvResult build_Bv(int v);

    // One full cleaning step at v; false when it aborted the run.
    bool clean_vertex(int v);

    void set_tracing(bool on) { tracing_ = on; }
    const std::vector<StepTrace>& trace() const { return trace_; }

    const CleaningStats& cleaning_stats() const { return cstats_; }
    const InvariantCounters& invariants() const { return inv_; }
    const std::vector<RoundStats>& round_log() const { return round_log_; }
    const CheckResult& quasirandom_precheck() const { return precheck_; }

  private:
    std::size_t idx(int v, int c) const { return std::size_t(v) * params_.m + c; }
    bool is_early(long long i) const;
    double par_at(long long i) const { return 2.0 * double(i) / params_.m; }
    bool full_cond(int v, int c, long long i) const;
    bool sparse_cond(int v, int c, long long i) const;

    void latch_full(int v, int c);
    void latch_sparse(int v, int c);
    void latch_unsafe(int v, std::vector<int>& newly);
    void refresh_after_colouring(int v, int c);
    void colour_edge(int eid, int c, bool exceptional_kind, std::vector<int>& newly_unsafe);
    void sweep_round_start();
    void log_round();
    void check_aborts();
    void process_new_unsafe(std::vector<int> newly, StepTrace* tr);
    void do_standard_step();
    void do_exceptional_step();
    void push_trace(StepTrace&& tr);

    Params params_;
    Factorisation fact_;
    Rng rng_;
    CheckResult precheck_{true, false, {}};

    long long round_ = 0;
    int pos_ = 0;
    int cstar_ = 0;
    long long step_ = 0;
    long long swept_round_ = -1;
    std::optional<AbortReport> abort_;

    std::vector<int> col_, uncol_deg_;
    std::vector<int> colc_;
    std::vector<std::uint8_t> ever_full_, ever_sparse_;
    std::vector<int> full_nbrs_, sparse_nbrs_;
    std::vector<int> full_colours_, sparse_colours_;
    std::vector<int> fullsparse_count_;
    std::vector<std::uint8_t> atypical_, exceptional_, blocked_, attacked_, blocking_,
        attacking_, dangerous_, unsafe_, cleaned_, in_queue_;
    std::vector<int> exceptional_edges_, unsafe_nbrs_, cleaned_nbrs_;
    int unsafe_count_ = 0;
    std::deque<int> queue_;

    CleaningStats cstats_;
    InvariantCounters inv_;
    std::vector<RoundStats> round_log_;
    bool tracing_ = false;
    std::vector<StepTrace> trace_;
};

struct RunResult {
    std::optional<Factorisation> factorisation;
    std::optional<AbortReport> abort;
    CheckResult quasirandom;
    std::vector<RoundStats> rounds;
    CleaningStats cleaning;
    InvariantCounters invariants;
    long long steps = 0;
    long long rounds_total = 0;

    bool ok() const { return factorisation.has_value(); }
};

RunResult run_greedy(const BiGraph& H, const Params& params, std::uint64_t seed,
                     bool tracing = false);

// Random split of the edges into m_prime groups whose colour-count
// multiplicities differ by at most one: each edge draws a uniform colour in
// [m] and lands in the group owning that colour.
std::vector<BiGraph> reduce_colours(const BiGraph& H, int m, int m_prime, Rng& rng);

}  // namespace bifactor
