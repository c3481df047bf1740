#include <algorithm>
#include <set>

#include "bifactor/gen.hpp"
#include "bifactor/greedy.hpp"
#include "doctest.h"

using namespace bifactor;

namespace {

BiGraph identity_matching(int n) {
    BiGraph B(n);
    for (int i = 0; i < n; ++i) B.add_edge(i, i);
    return B;
}

Params pm_params(int n) {
    Params p;
    p.n = n;
    p.d = 1.0;
    p.m = 1;
    p.delta = 0.3;
    p.delta_prime = 0.3;
    p.eta = 0.5;
    p.eps = 0.1;
    p.theta = 0.9;
    return p;
}

}  // namespace

TEST_CASE("growth threshold oracle values") {
    // Base value 3*eta at round zero.
    CHECK(f_threshold(0, 0.01, 0.1, 10.0, 10) == doctest::Approx(0.03));
    // With eps^2*d*m = 1 the factor doubles every round: 0.03 * 2^10.
    CHECK(f_threshold(10, 0.01, 0.1, 10.0, 10) == doctest::Approx(30.72));
    CHECK(f_threshold(5, 0.2, 0.5, 4.0, 4) < f_threshold(6, 0.2, 0.5, 4.0, 4));
    CHECK_THROWS_AS(f_threshold(-1, 0.1, 0.1, 4.0, 4), std::invalid_argument);
}

TEST_CASE("construction rejects a palette the host cannot carry") {
    BiGraph H = identity_matching(4);  // maximum degree 1
    Params p = pm_params(4);
    p.d = 3.0;  // d*m = 3 > 1
    CHECK_THROWS_AS(GreedyProcess(H, p, 1), std::invalid_argument);
    p.d = 1.0;
    p.theta = 0.0;  // out of range
    CHECK_THROWS_AS(GreedyProcess(H, p, 1), std::invalid_argument);
}

TEST_CASE("virgin process exposes a consistent zero state") {
    BiGraph H = gen_regular_bipartite(8, 3, 42);
    Params p;
    p.n = 8;
    p.d = 1.5;
    p.m = 2;
    p.delta = 0.4;
    p.delta_prime = 0.3;
    p.eta = 0.5;
    p.eps = 0.1;
    p.theta = 0.9;
    GreedyProcess g(H, p, 9);
    CHECK(g.round() == 0);
    CHECK(g.step_count() == 0);
    CHECK(g.active_vertex() == 0);
    CHECK(g.active_colour() == 0);
    CHECK(g.early());
    CHECK(g.par() == doctest::Approx(0.0));
    CHECK_FALSE(g.finished());
    CHECK_FALSE(g.aborted());
    for (int v = 0; v < 16; ++v) {
        CHECK(g.col(v) == 0);
        CHECK(g.uncoloured_edges_at(v).size() == 3);
        CHECK(g.is_safe(v));
        CHECK_FALSE(g.is_cleaned(v));
        for (int c = 0; c < 2; ++c) {
            CHECK(g.col_c(v, c) == 0);
            CHECK_FALSE(g.ever_full(v, c));
            CHECK_FALSE(g.currently_full(v, c));
            // At round zero the sparse condition needs a negative count.
            CHECK_FALSE(g.currently_sparse(v, c));
        }
    }
    CHECK(g.unsafe_count() == 0);
    CHECK(g.queue().empty());
}

TEST_CASE("single-colour matching host latches and aborts on the shared colour") {
    // Every colouring makes both endpoints full for colour 0 immediately, so
    // the per-colour cap theta^4*n = 3.93 trips once four vertices latch.
    BiGraph H = identity_matching(6);
    GreedyProcess g(H, pm_params(6), 3);
    g.set_tracing(true);

    CHECK(g.step());  // vertex 0 colours its edge
    CHECK(g.ever_full(0, 0));
    CHECK(g.ever_full(H.right_global(0), 0));
    CHECK(g.fullsparse_count(0) == 2);
    CHECK_FALSE(g.aborted());

    CHECK_FALSE(g.step());  // vertex 1 colours; four latches reach the cap
    REQUIRE(g.aborted());
    CHECK(g.abort_report()->reason == AbortReason::BadColour);
    CHECK(g.abort_report()->witness == 0);
    CHECK(g.fullsparse_count(0) == 4);
    CHECK(to_string(g.abort_report()->reason) == "bad-colour");

    // Trace shows two standard steps, one coloured edge each.
    REQUIRE(g.trace().size() == 2);
    for (const auto& tr : g.trace()) {
        CHECK(tr.kind == StepTrace::Kind::Standard);
        CHECK(tr.coloured.size() == 1);
        CHECK(tr.batch.empty());
    }
    CHECK(g.trace()[0].step < g.trace()[1].step);

    // The round log was opened at the round boundary, before any colouring.
    REQUIRE(g.round_log().size() == 1);
    CHECK(g.round_log()[0].round == 0);
    CHECK(g.round_log()[0].coloured == 0);
    CHECK(g.round_log()[0].unsafe == 0);
}

TEST_CASE("trace replay reproduces the colouring") {
    BiGraph H = gen_regular_bipartite(10, 4, 17);
    Params p;
    p.n = 10;
    p.d = 2.0;
    p.m = 2;
    p.delta = 0.45;
    p.delta_prime = 0.3;
    p.eta = 0.5;
    p.eps = 0.1;
    p.theta = 0.9;
    GreedyProcess g(H, p, 21);
    g.set_tracing(true);
    g.run_to_completion();

    Factorisation replay(H, p.m);
    for (const auto& tr : g.trace())
        for (const auto& [eid, c] : tr.coloured) replay.set_colour(eid, c);
    for (int e = 0; e < H.edge_count(); ++e) {
        CHECK(replay.is_coloured(e) == g.colouring().is_coloured(e));
        if (replay.is_coloured(e)) CHECK(replay.colour_of(e) == g.colouring().colour_of(e));
    }
}

TEST_CASE("same seed gives identical runs") {
    BiGraph H = gen_regular_bipartite(12, 4, 55);
    Params p;
    p.n = 12;
    p.d = 2.0;
    p.m = 2;
    p.delta = 0.45;
    p.delta_prime = 0.3;
    p.eta = 0.5;
    p.eps = 0.1;
    p.theta = 0.9;
    auto a = run_greedy(H, p, 100);
    auto b = run_greedy(H, p, 100);
    CHECK(a.steps == b.steps);
    CHECK(a.rounds_total == b.rounds_total);
    CHECK(a.abort.has_value() == b.abort.has_value());
    if (a.abort) {
        CHECK(a.abort->reason == b.abort->reason);
        CHECK(a.abort->step == b.abort->step);
    }
    if (a.ok()) {
        REQUIRE(b.ok());
        for (int e = 0; e < H.edge_count(); ++e)
            CHECK(a.factorisation->colour_of(e) == b.factorisation->colour_of(e));
    }
}

TEST_CASE("batch construction around fresh unsafe seeds") {
    BiGraph H = gen_regular_bipartite(20, 15, 7);
    Params p;
    p.n = 20;
    p.d = 5.0;
    p.m = 3;
    p.delta = 0.45;
    p.delta_prime = 0.3;
    p.eta = 0.5;
    p.eps = 0.1;
    p.theta = 0.9;
    GreedyProcess g(H, p, 1);

    SUBCASE("a lone seed stays alone") {
        auto br = g.build_batch({5});
        CHECK(br.B == std::vector<int>{5});
        CHECK(br.Bprime == std::vector<int>{5});  // no internal neighbours
        CHECK(br.HB_edges.empty());
        CHECK(br.order == std::vector<int>{5});
    }

    SUBCASE("high-degree closure absorbs the other side") {
        // Every right vertex sees 15 of the 20 left seeds, beyond the
        // closure threshold of 12, so the whole graph joins the batch.
        std::vector<int> seeds(20);
        for (int i = 0; i < 20; ++i) seeds[i] = i;
        auto br = g.build_batch(seeds);
        CHECK(int(br.B.size()) == 40);
        CHECK(br.Bprime.empty());  // internal degree 15 is far above d^0.1
        CHECK(int(br.order.size()) == 40);
        std::set<int> ordered(br.order.begin(), br.order.end());
        CHECK(ordered == std::set<int>(br.B.begin(), br.B.end()));
        // H_B contains at least the host edges inside B.
        CHECK(br.HB_edges.size() >= std::size_t(H.edge_count()));
    }
}

TEST_CASE("cleaning graph in deterministic multiplicity mode") {
    BiGraph H = gen_regular_bipartite(12, 4, 23);
    Params p;
    p.n = 12;
    p.d = 2.0;
    p.m = 2;
    p.delta = 0.4;
    p.delta_prime = 0.3;
    p.eta = 0.5;
    p.eps = 0.1;
    p.theta = 0.5;
    GreedyProcess g(H, p, 2);
    auto bv = g.build_Bv(0);
    CHECK(bv.ok);
    CHECK(bv.multiset);
    CHECK(bv.X.size() == 4);
    CHECK(bv.palette == std::vector<int>{0, 1});
    CHECK(bv.Y == std::vector<int>{0, 0, 1, 1});  // multiplicities split evenly
    // Nobody is full yet, so the availability graph is complete.
    CHECK(bv.graph.n() == 4);
    CHECK(bv.graph.edge_count() == 16);
    CHECK(bv.attempts == 0);
}

TEST_CASE("cleaning graph in sampled subset mode and a full cleaning") {
    // Degree-one host with a three-colour palette: |X| = 1 < |C_v| = 3.
    BiGraph H = identity_matching(4);
    Params p;
    p.n = 4;
    p.d = 1.0 / 3.0;
    p.m = 3;
    p.delta = 0.3;
    p.delta_prime = 0.3;
    p.eta = 0.5;
    p.eps = 0.1;
    p.theta = 0.98;
    GreedyProcess g(H, p, 8);
    auto bv = g.build_Bv(0);
    CHECK(bv.ok);
    CHECK_FALSE(bv.multiset);
    CHECK(bv.attempts == 1);  // virgin availability graph always passes
    CHECK(bv.X == std::vector<int>{H.right_global(0)});
    CHECK(bv.palette == std::vector<int>{0, 1, 2});
    CHECK(bv.Y.size() == 1);

    GreedyProcess h(H, p, 8);
    CHECK(h.clean_vertex(1));
    CHECK(h.is_cleaned(1));
    CHECK(h.colouring().is_coloured(1));
    CHECK(h.cleaning_stats().cleanings == 1);
    CHECK(h.cleaning_stats().sample_successes == 1);
    CHECK(h.cleaned_neighbours(H.right_global(1)) == 1);

    // Cleaning the far endpoint now finds nothing left to colour.
    CHECK(h.clean_vertex(H.right_global(1)));
    CHECK(h.is_cleaned(H.right_global(1)));
    CHECK(h.cleaning_stats().empty_cleanings == 1);
}

TEST_CASE("desk preset run completes and validates") {
    Params p = desk_preset();
    BiGraph H = gen_regular_bipartite(p.n, int(p.d) * p.m, 1000);
    auto r = run_greedy(H, p, 5000);
    REQUIRE(r.ok());
    CHECK(r.quasirandom.ok);
    CHECK(r.factorisation->is_complete());
    CHECK(r.factorisation->validate_regular(DegreeBand{p.d, 2.0 * p.delta}).ok);
    // Runtime assertions must never have fired.
    CHECK(r.invariants.colc_cap_checks > 0);
    CHECK(r.invariants.colc_cap_violations == 0);
    CHECK(r.invariants.palette_violations == 0);
    CHECK(r.invariants.col_window_violations == 0);
    CHECK(r.invariants.batch_closed_violations == 0);
    // At this working point the danger machinery stays quiet: the round log
    // never sees an unsafe vertex and no cleaning is triggered.
    for (const auto& rs : r.rounds) {
        CHECK(rs.unsafe == 0);
        CHECK(rs.cleaned == 0);
    }
    CHECK(r.cleaning.cleanings == 0);
    // Every round after the first makes progress.
    for (std::size_t i = 1; i < r.rounds.size(); ++i)
        CHECK(r.rounds[i].coloured > r.rounds[i - 1].coloured);
    CHECK(r.rounds_total < 3 * (int(p.d) * p.m / 2 + 1));
}

TEST_CASE("colour reduction groups every edge exactly once") {
    BiGraph H = gen_regular_bipartite(6, 4, 31);
    Rng rng(4, 9);
    auto groups = reduce_colours(H, 4, 2, rng);
    REQUIRE(groups.size() == 2);
    int total = 0;
    for (const auto& G : groups) total += G.edge_count();
    CHECK(total == H.edge_count());
    for (const auto& [l, r] : H.edges())
        CHECK((groups[0].has_edge(l, r) ? 1 : 0) + (groups[1].has_edge(l, r) ? 1 : 0) == 1);

    Rng rng2(4, 9);
    auto again = reduce_colours(H, 4, 2, rng2);
    for (int gi = 0; gi < 2; ++gi) CHECK(again[gi].edge_count() == groups[gi].edge_count());

    Rng rng3(1, 1);
    auto one = reduce_colours(H, 4, 1, rng3);
    REQUIRE(one.size() == 1);
    CHECK(one[0].edge_count() == H.edge_count());
    CHECK_THROWS_AS(reduce_colours(H, 4, 5, rng3), std::invalid_argument);
}
