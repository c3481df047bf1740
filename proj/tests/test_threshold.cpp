#include "bifactor/threshold.hpp"

#include <algorithm>
#include <set>

#include "bifactor/gen.hpp"
#include "doctest.h"

using namespace bifactor;

namespace {

BiGraph complete_bipartite(int n) {
    BiGraph H(n);
    for (int l = 0; l < n; ++l)
        for (int r = 0; r < n; ++r) H.add_edge(l, r);
    return H;
}

ListAssignment full_lists(const BiGraph& H, int palette) {
    ListAssignment L;
    L.palette = palette;
    std::vector<int> all(palette);
    for (int c = 0; c < palette; ++c) all[c] = c;
    L.lists.assign(H.edge_count(), all);
    return L;
}

// Product-space enumeration, the slow way, as an independent oracle.
long long brute_count(const BiGraph& H, const ListAssignment& L) {
    for (const auto& lst : L.lists)
        if (lst.empty()) return 0;
    std::vector<int> choice(H.edge_count(), 0);
    std::vector<int> col(H.edge_count());
    long long count = 0;
    while (true) {
        for (int e = 0; e < H.edge_count(); ++e) col[e] = L.lists[e][choice[e]];
        if (is_valid_list_colouring(H, L, col)) ++count;
        int e = 0;
        while (e < H.edge_count() && ++choice[e] == int(L.lists[e].size())) choice[e++] = 0;
        if (e == H.edge_count()) break;
    }
    return count;
}

}  // namespace

TEST_CASE("factorisation counts match the classical small values") {
    CHECK(count_one_factorisations(complete_bipartite(1)) == 1);
    CHECK(count_one_factorisations(complete_bipartite(2)) == 2);
    CHECK(count_one_factorisations(complete_bipartite(3)) == 12);
    CHECK(count_one_factorisations(complete_bipartite(4)) == 576);
    CHECK(count_one_factorisations(complete_bipartite(5)) == 161280);
}

TEST_CASE("counting beyond the exhaustive cap is refused") {
    CHECK_THROWS_AS(count_one_factorisations(complete_bipartite(7)), SizeCap);
}

TEST_CASE("the solver agrees with product-space enumeration on tiny hosts") {
    for (int n = 2; n <= 3; ++n) {
        BiGraph H = complete_bipartite(n);
        for (int s = 0; s < 30; ++s) {
            ListAssignment L = gen_list_assignment(H, n, ListModel::binomial(0.55),
                                                   std::uint64_t(4000 + 100 * n + s));
            long long slow = brute_count(H, L);
            auto sols = enumerate_list_edge_colourings(H, L, 100000);
            CHECK(static_cast<long long>(sols.size()) == slow);
            SolveResult one = solve_list_edge_colouring(H, L);
            CHECK((one.verdict == SolveResult::Verdict::Sat) == (slow > 0));
        }
    }
}

TEST_CASE("a full palette on the complete host is always satisfiable") {
    BiGraph H = complete_bipartite(4);
    SolveResult res = solve_list_edge_colouring(H, full_lists(H, 4));
    REQUIRE(res.verdict == SolveResult::Verdict::Sat);
    CHECK(is_valid_list_colouring(H, full_lists(H, 4), res.colouring));
}

TEST_CASE("an empty list forces unsat") {
    BiGraph H = complete_bipartite(2);
    ListAssignment L = full_lists(H, 2);
    L.lists[3].clear();
    CHECK(solve_list_edge_colouring(H, L).verdict == SolveResult::Verdict::Unsat);
}

TEST_CASE("enumeration finds exactly the two colourings of the smallest square") {
    BiGraph H = complete_bipartite(2);
    auto sols = enumerate_list_edge_colourings(H, full_lists(H, 2), 10);
    REQUIRE(sols.size() == 2);
    CHECK(sols[0] != sols[1]);
    for (const auto& col : sols) CHECK(is_valid_list_colouring(H, full_lists(H, 2), col));
}

TEST_CASE("an exhausted node budget is an honest indeterminate verdict") {
    BiGraph H = complete_bipartite(5);
    SolveResult res = solve_list_edge_colouring(H, full_lists(H, 5), 3);
    CHECK(res.verdict == SolveResult::Verdict::Timeout);
    CHECK(res.colouring.empty());
    CHECK_THROWS_AS(enumerate_list_edge_colourings(H, full_lists(H, 5), 10, 3),
                    std::runtime_error);
}

TEST_CASE("malformed list assignments are rejected") {
    BiGraph H = complete_bipartite(2);
    ListAssignment L = full_lists(H, 2);
    L.lists[0] = {2};  // outside the palette
    CHECK_THROWS_AS(solve_list_edge_colouring(H, L), std::invalid_argument);
    ListAssignment M = full_lists(H, 2);
    M.lists.pop_back();
    CHECK_THROWS_AS(solve_list_edge_colouring(H, M), std::invalid_argument);
    ListAssignment wide = full_lists(H, 2);
    wide.palette = 65;
    CHECK_THROWS_AS(solve_list_edge_colouring(H, wide), std::invalid_argument);
}

TEST_CASE("the independent colouring check catches each failure mode") {
    BiGraph H = complete_bipartite(2);
    ListAssignment L = full_lists(H, 2);
    // Edge ids of K_{2,2} in insertion order: (0,0), (0,1), (1,0), (1,1).
    CHECK(is_valid_list_colouring(H, L, {0, 1, 1, 0}));
    CHECK(!is_valid_list_colouring(H, L, {0, 1, 1}));     // wrong length
    CHECK(!is_valid_list_colouring(H, L, {0, 1, 1, 2}));  // outside the palette
    CHECK(!is_valid_list_colouring(H, L, {0, 1, 0, 1}));  // colour repeated at a vertex
    L.lists[0] = {1};
    CHECK(!is_valid_list_colouring(H, L, {0, 1, 1, 0}));  // colour not on the list
}

TEST_CASE("binomial curves are monotone with exact endpoints") {
    std::vector<double> grid{0.0, 0.4, 0.7, 1.0};
    ThresholdCurve c = estimate_threshold(5, ListModel::Kind::binomial, grid, 30, 50000, 7);
    REQUIRE(c.points.size() == 4);
    CHECK(c.monotone);
    CHECK(c.points[0].sat == 0);  // empty lists can never colour anything
    CHECK(c.points[0].unsat == 30);
    CHECK(c.points[3].sat == 30);  // full lists always can
    CHECK(c.points[3].freq == 1.0);
    for (const auto& pt : c.points) {
        CHECK(pt.freq >= 0.0);
        CHECK(pt.freq <= 1.0);
        CHECK(pt.sat + pt.unsat + pt.timeouts == 30);
    }
    CHECK(c.crossed);
    CHECK(c.crossing_x > 0.0);
    CHECK(c.crossing_x <= 1.0);
    CHECK(c.crossing_lo <= c.crossing_x);
    CHECK(c.crossing_x <= c.crossing_hi);

    ThresholdCurve again =
        estimate_threshold(5, ListModel::Kind::binomial, grid, 30, 50000, 7);
    CHECK(again.crossing_x == c.crossing_x);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(again.points[i].sat == c.points[i].sat);
        CHECK(again.points[i].unsat == c.points[i].unsat);
        CHECK(again.points[i].timeouts == c.points[i].timeouts);
    }
}

TEST_CASE("fixed-size curves run on prefixes of the same variates") {
    std::vector<double> grid{0.0, 0.5, 1.0};
    ThresholdCurve c = estimate_threshold(5, ListModel::Kind::fixed_size, grid, 20, 50000, 9);
    CHECK(c.monotone);
    CHECK(c.points[0].unsat == 20);       // zero-length lists
    CHECK(c.points[2].freq == 1.0);       // full lists
    CHECK(c.points[1].sat + c.points[1].unsat + c.points[1].timeouts == 20);
}

TEST_CASE("the subgraph curve saturates once lists cover the whole palette") {
    BiGraph H = gen_regular_bipartite(8, 4, 42u);
    std::vector<double> grid{0.0, 1.0, 2.0};  // list sizes 0, 2, 4 of palette 4
    ThresholdCurve c = estimate_threshold_subgraph(H, grid, 20, 200000, 5);
    CHECK(c.palette == 4);
    CHECK(c.monotone);
    CHECK(c.points[0].unsat == 20);
    CHECK(c.points[2].freq == 1.0);  // a regular host always has a full colouring
}

TEST_CASE("curve preconditions are enforced") {
    std::vector<double> good{0.1, 0.9};
    CHECK_THROWS_AS(estimate_threshold(5, ListModel::Kind::binomial, {}, 10, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        estimate_threshold(5, ListModel::Kind::binomial, {0.9, 0.1}, 10, 100, 1),
        std::invalid_argument);
    CHECK_THROWS_AS(
        estimate_threshold(5, ListModel::Kind::binomial, {0.5, 1.5}, 10, 100, 1),
        std::invalid_argument);
    CHECK_THROWS_AS(estimate_threshold(5, ListModel::Kind::binomial, good, 0, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_threshold(0, ListModel::Kind::binomial, good, 10, 100, 1),
                    std::invalid_argument);
    BiGraph lopsided(2);
    lopsided.add_edge(0, 0);
    lopsided.add_edge(0, 1);
    CHECK_THROWS_AS(estimate_threshold_subgraph(lopsided, good, 10, 100, 1),
                    std::invalid_argument);
}
