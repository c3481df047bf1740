#include "bifactor/threshold.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "bifactor/params.hpp"
#include "bifactor/rng.hpp"
#include "bifactor/spread.hpp"

namespace bifactor {

bool is_valid_list_colouring(const BiGraph& H, const ListAssignment& L,
                             const std::vector<int>& colouring) {
    if (int(colouring.size()) != H.edge_count()) return false;
    std::vector<std::uint64_t> seen(2 * H.n(), 0);
    for (int e = 0; e < H.edge_count(); ++e) {
        int c = colouring[e];
        if (c < 0 || c >= L.palette || c >= 64) return false;
        if (!L.has(e, c)) return false;
        auto [l, r] = H.edge(e);
        std::uint64_t bit = 1ULL << c;
        if ((seen[l] | seen[H.right_global(r)]) & bit) return false;
        seen[l] |= bit;
        seen[H.right_global(r)] |= bit;
    }
    return true;
}

namespace {

// Backtracking search state.  Colour sets are 64-bit masks; avail_ keeps
// each uncoloured edge's remaining choices.  When every colour class must
// be a perfect matching (regular host, palette == degree), cnt_ tracks how
// many uncoloured edges at each vertex still offer each colour, so a colour
// that dies at a vertex it must cover prunes the branch immediately.
class ListSolver {
  public:
    ListSolver(const BiGraph& H, const ListAssignment& L, long long budget)
        : H_(H), L_(L), r_(L.palette), budget_(budget) {
        if (r_ < 0 || r_ > 64)
            throw std::invalid_argument("list solver: palette must fit in 64 colours");
        if (int(L.lists.size()) != H.edge_count())
            throw std::invalid_argument("list solver: need one list per edge");
        const int E = H_.edge_count();
        avail_.resize(E);
        for (int e = 0; e < E; ++e) {
            std::uint64_t mask = 0;
            for (int c : L.lists[e]) {
                if (c < 0 || c >= r_)
                    throw std::invalid_argument("list solver: list entry outside the palette");
                mask |= 1ULL << c;
            }
            avail_[e] = mask;
        }
        colour_.assign(E, -1);
        used_.assign(2 * H_.n(), 0);
        uncoloured_ = E;
        perfect_ = E > 0 && r_ > 0 && H_.min_degree() == H_.max_degree() &&
                   H_.max_degree() == r_;
        if (perfect_) {
            cnt_.assign(std::size_t(r_) * 2 * H_.n(), 0);
            for (int e = 0; e < E; ++e) {
                auto [l, rr] = H_.edge(e);
                for (std::uint64_t m = avail_[e]; m; m &= m - 1) {
                    int c = std::countr_zero(m);
                    ++cnt(c, l);
                    ++cnt(c, H_.right_global(rr));
                }
            }
        }
    }

    // Runs the search until stop_after solutions have been found (each one
    // passed to the independent validity check), the tree is exhausted, or
    // the node budget runs out.
    void search(long long stop_after, bool collect) {
        stop_after_ = stop_after;
        collect_ = collect;
        if (!root_feasible()) return;
        dfs();
    }

    long long found() const { return found_; }
    bool timed_out() const { return timed_out_; }
    long long nodes() const { return nodes_; }
    std::vector<std::vector<int>>& solutions() { return solutions_; }

  private:
    int& cnt(int c, int v) { return cnt_[std::size_t(c) * 2 * H_.n() + v]; }

    bool root_feasible() const {
        for (int e = 0; e < H_.edge_count(); ++e)
            if (avail_[e] == 0) return false;
        if (perfect_)
            for (std::size_t i = 0; i < cnt_.size(); ++i)
                if (cnt_[i] == 0) return false;
        return true;
    }

    struct Trail {
        int edge = -1;
        std::uint64_t edge_avail = 0;
        std::vector<int> removed;  // edges that lost the assigned colour
    };

    bool assign(int e, int c, Trail& t) {
        const std::uint64_t bit = 1ULL << c;
        auto [l, rr] = H_.edge(e);
        const int lg = l, rg = H_.right_global(rr);
        bool ok = true;

        t.edge = e;
        t.edge_avail = avail_[e];
        colour_[e] = c;
        --uncoloured_;
        if (perfect_)
            for (std::uint64_t m = avail_[e]; m; m &= m - 1) {
                int cp = std::countr_zero(m);
                if (--cnt(cp, lg) == 0 && cp != c && !(used_[lg] & (1ULL << cp))) ok = false;
                if (--cnt(cp, rg) == 0 && cp != c && !(used_[rg] & (1ULL << cp))) ok = false;
            }
        used_[lg] |= bit;
        used_[rg] |= bit;

        for (int side = 0; side < 2; ++side)
            for (const auto& [nbr, f] : H_.adj(side == 0 ? lg : rg)) {
                if (colour_[f] >= 0 || !(avail_[f] & bit)) continue;
                avail_[f] &= ~bit;
                t.removed.push_back(f);
                if (avail_[f] == 0) ok = false;
                if (perfect_) {
                    auto [fl, fr] = H_.edge(f);
                    const int a = fl, b = H_.right_global(fr);
                    if (--cnt(c, a) == 0 && !(used_[a] & bit)) ok = false;
                    if (--cnt(c, b) == 0 && !(used_[b] & bit)) ok = false;
                }
            }
        return ok;
    }

    void undo(const Trail& t) {
        const int e = t.edge;
        const int c = colour_[e];
        const std::uint64_t bit = 1ULL << c;
        auto [l, rr] = H_.edge(e);
        const int lg = l, rg = H_.right_global(rr);

        for (int f : t.removed) {
            avail_[f] |= bit;
            if (perfect_) {
                auto [fl, fr] = H_.edge(f);
                ++cnt(c, fl);
                ++cnt(c, H_.right_global(fr));
            }
        }
        used_[lg] &= ~bit;
        used_[rg] &= ~bit;
        if (perfect_)
            for (std::uint64_t m = t.edge_avail; m; m &= m - 1) {
                int cp = std::countr_zero(m);
                ++cnt(cp, lg);
                ++cnt(cp, rg);
            }
        colour_[e] = -1;
        ++uncoloured_;
    }

    // Returns true when the search is over (enough solutions or timeout).
    bool dfs() {
        if (uncoloured_ == 0) {
            if (!is_valid_list_colouring(H_, L_, colour_))
                throw std::logic_error("list solver: produced an invalid colouring");
            ++found_;
            if (collect_) solutions_.push_back(colour_);
            return found_ >= stop_after_;
        }
        int best = -1, best_width = 65;
        for (int e = 0; e < H_.edge_count(); ++e) {
            if (colour_[e] >= 0) continue;
            int w = std::popcount(avail_[e]);
            if (w == 0) return false;
            if (w < best_width) {
                best_width = w;
                best = e;
            }
        }
        for (std::uint64_t m = avail_[best]; m; m &= m - 1) {
            if (++nodes_ > budget_) {
                timed_out_ = true;
                return true;
            }
            Trail t;
            bool viable = assign(best, std::countr_zero(m), t);
            if (viable && dfs()) {
                undo(t);
                return true;
            }
            undo(t);
        }
        return false;
    }

    const BiGraph& H_;
    const ListAssignment& L_;
    int r_;
    long long budget_;
    long long nodes_ = 0;
    long long found_ = 0;
    long long stop_after_ = 1;
    bool collect_ = false;
    bool timed_out_ = false;
    bool perfect_ = false;
    int uncoloured_ = 0;
    std::vector<std::uint64_t> avail_;
    std::vector<int> colour_;
    std::vector<std::uint64_t> used_;
    std::vector<int> cnt_;
    std::vector<std::vector<int>> solutions_;
};

}  // namespace

SolveResult solve_list_edge_colouring(const BiGraph& H, const ListAssignment& L,
                                      long long node_budget) {
    ListSolver solver(H, L, node_budget);
    solver.search(1, true);
    SolveResult res;
    res.nodes = solver.nodes();
    if (solver.timed_out())
        res.verdict = SolveResult::Verdict::Timeout;
    else if (solver.found() > 0) {
        res.verdict = SolveResult::Verdict::Sat;
        res.colouring = std::move(solver.solutions().front());
    } else
        res.verdict = SolveResult::Verdict::Unsat;
    return res;
}

std::vector<std::vector<int>> enumerate_list_edge_colourings(const BiGraph& H,
                                                             const ListAssignment& L,
                                                             long long max_solutions,
                                                             long long node_budget) {
    ListSolver solver(H, L, node_budget);
    solver.search(max_solutions + 1, true);
    if (solver.timed_out())
        throw std::runtime_error("enumerate_list_edge_colourings: node budget exhausted");
    if (solver.found() > max_solutions)
        throw SizeCap("enumerate_list_edge_colourings: more than " +
                      std::to_string(max_solutions) + " colourings");
    return std::move(solver.solutions());
}

long long count_one_factorisations(const BiGraph& H) {
    if (H.n() > 6) throw SizeCap("count_one_factorisations: exact count capped at n <= 6");
    ListAssignment L;
    L.palette = H.n();
    std::vector<int> full(H.n());
    std::iota(full.begin(), full.end(), 0);
    L.lists.assign(H.edge_count(), full);
    ListSolver solver(H, L, std::numeric_limits<long long>::max());
    solver.search(std::numeric_limits<long long>::max(), false);
    return solver.found();
}

namespace {

ThresholdCurve run_coupled_curve(const BiGraph& H, int palette, const std::vector<double>& grid,
                                 int trials, long long node_budget, std::uint64_t seed,
                                 bool binomial, double list_size_scale) {
    if (grid.empty()) throw std::invalid_argument("threshold curve: empty grid");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("threshold curve: grid must be ascending");
    if (trials <= 0) throw std::invalid_argument("threshold curve: trials must be positive");
    if (binomial)
        for (double x : grid)
            if (x < 0.0 || x > 1.0)
                throw std::invalid_argument("threshold curve: probabilities must lie in [0,1]");

    const int E = H.edge_count();
    ThresholdCurve curve;
    curve.n = H.n();
    curve.palette = palette;
    curve.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        curve.points[i].x = grid[i];
        curve.points[i].trials = trials;
    }

    Rng rng(seed, streams::threshold);
    std::vector<double> u(std::size_t(E) * palette);
    std::vector<int> order(std::size_t(E) * palette);  // per-edge colours by rising variate
    ListAssignment L;
    L.palette = palette;

    for (int t = 0; t < trials; ++t) {
        for (auto& v : u) v = rng.unit();
        if (!binomial)
            for (int e = 0; e < E; ++e) {
                int* o = order.data() + std::size_t(e) * palette;
                std::iota(o, o + palette, 0);
                std::sort(o, o + palette, [&](int a, int b) {
                    double ua = u[std::size_t(e) * palette + a];
                    double ub = u[std::size_t(e) * palette + b];
                    return ua != ub ? ua < ub : a < b;
                });
            }

        bool sat_seen = false;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            L.lists.assign(E, {});
            if (binomial) {
                for (int e = 0; e < E; ++e)
                    for (int c = 0; c < palette; ++c)
                        if (u[std::size_t(e) * palette + c] < grid[i])
                            L.lists[e].push_back(c);
            } else {
                int k = std::clamp(int(std::lround(grid[i] * list_size_scale)), 0, palette);
                for (int e = 0; e < E; ++e) {
                    const int* o = order.data() + std::size_t(e) * palette;
                    L.lists[e].assign(o, o + k);
                    std::sort(L.lists[e].begin(), L.lists[e].end());
                }
            }
            SolveResult res = solve_list_edge_colouring(H, L, node_budget);
            switch (res.verdict) {
                case SolveResult::Verdict::Sat:
                    ++curve.points[i].sat;
                    sat_seen = true;
                    break;
                case SolveResult::Verdict::Unsat:
                    ++curve.points[i].unsat;
                    if (sat_seen) curve.monotone = false;
                    break;
                default: ++curve.points[i].timeouts; break;
            }
        }
    }

    for (auto& pt : curve.points) {
        int determinate = pt.sat + pt.unsat;
        pt.freq = determinate > 0 ? double(pt.sat) / determinate : 0.0;
        pt.radius = determinate > 0 ? wilson_radius(pt.sat, determinate) : 1.0;
    }
    // The crossing is located using only points that produced determinate
    // verdicts; a point that only timed out carries no frequency evidence.
    bool have_below = false;
    double x0 = 0.0, f0 = 0.0;
    for (const auto& pt : curve.points) {
        if (pt.sat + pt.unsat == 0) continue;
        if (pt.freq < 0.5) {
            have_below = true;
            x0 = pt.x;
            f0 = pt.freq;
            continue;
        }
        curve.crossed = true;
        if (!have_below) {
            curve.crossing_x = curve.crossing_lo = curve.crossing_hi = pt.x;
        } else {
            curve.crossing_x = x0 + (0.5 - f0) * (pt.x - x0) / (pt.freq - f0);
            curve.crossing_lo = x0;
            curve.crossing_hi = pt.x;
        }
        break;
    }
    return curve;
}

}  // namespace

ThresholdCurve estimate_threshold(int n, ListModel::Kind kind, const std::vector<double>& grid,
                                  int trials, long long node_budget, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("estimate_threshold: n must be positive");
    if (n > 64) throw std::invalid_argument("estimate_threshold: palette capped at 64");
    BiGraph H(n);
    for (int l = 0; l < n; ++l)
        for (int r = 0; r < n; ++r) H.add_edge(l, r);
    ThresholdCurve curve =
        run_coupled_curve(H, n, grid, trials, node_budget, seed,
                          kind == ListModel::Kind::binomial, double(n));
    if (curve.crossed && n > 1) curve.crossing_C = curve.crossing_x * n / std::log(double(n));
    return curve;
}

ThresholdCurve estimate_threshold_subgraph(const BiGraph& H, const std::vector<double>& grid,
                                           int trials, long long node_budget,
                                           std::uint64_t seed) {
    if (H.n() <= 1 || H.edge_count() == 0)
        throw std::invalid_argument("estimate_threshold_subgraph: host too small");
    int r = H.max_degree();
    if (H.min_degree() != r)
        throw std::invalid_argument("estimate_threshold_subgraph: host must be regular");
    if (r > 64) throw std::invalid_argument("estimate_threshold_subgraph: palette capped at 64");
    ThresholdCurve curve = run_coupled_curve(H, r, grid, trials, node_budget, seed,
                                             /*binomial=*/false, std::log(double(H.n())));
    curve.crossing_C = curve.crossing_x;
    return curve;
}

}  // namespace bifactor
