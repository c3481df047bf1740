#include "doctest.h"

#include <sstream>

#include "bifactor/bigraph.hpp"

using namespace bifactor;

namespace {

BiGraph complete(int n) {
    BiGraph H(n);
    for (int l = 0; l < n; ++l)
        for (int r = 0; r < n; ++r) H.add_edge(l, r);
    return H;
}

}  // namespace

TEST_CASE("BiGraph construction and adjacency") {
    BiGraph H(3);
    CHECK(H.n() == 3);
    CHECK(H.vertex_count() == 6);
    H.add_edge(0, 0);
    H.add_edge(0, 1);
    H.add_edge(1, 1);
    CHECK(H.edge_count() == 3);
    CHECK(H.has_edge(0, 1));
    CHECK(!H.has_edge(1, 0));
    CHECK(H.degree(0) == 2);
    CHECK(H.degree(H.right_global(1)) == 2);
    CHECK(H.degree(2) == 0);
    CHECK(H.min_degree() == 0);
    CHECK(H.max_degree() == 2);
    CHECK(H.is_left(0));
    CHECK(!H.is_left(3));
    auto [l, r] = H.edge(1);
    CHECK(l == 0);
    CHECK(r == 1);
    CHECK(H.edge_other(1, 0) == H.right_global(1));
    CHECK(H.edge_other(1, H.right_global(1)) == 0);
    CHECK_THROWS_AS(H.edge_other(1, 2), std::invalid_argument);
    CHECK_THROWS_AS(H.add_edge(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(H.add_edge(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(H.add_edge(0, -1), std::invalid_argument);
    CHECK_THROWS_AS(BiGraph(0), std::invalid_argument);
    // Insertion order of incident edges is preserved.
    const auto& a = H.adj(0);
    REQUIRE(a.size() == 2);
    CHECK(a[0].second == 0);
    CHECK(a[1].second == 1);
}

TEST_CASE("DegreeBand arithmetic") {
    DegreeBand b{10.0, 0.2};
    CHECK(b.lo() == doctest::Approx(8.0));
    CHECK(b.hi() == doctest::Approx(12.0));
    CHECK(b.contains(8.0));
    CHECK(b.contains(12.0));
    CHECK(!b.contains(7.99));
    CHECK(!b.contains(12.01));
}

TEST_CASE("is_D_regular") {
    auto H = complete(3);
    CHECK(is_D_regular(H, DegreeBand{3.0, 0.1}).ok);
    BiGraph P(3);
    P.add_edge(0, 0);
    auto res = is_D_regular(P, DegreeBand{1.0, 0.5});
    CHECK(!res.ok);
    CHECK(res.certified);
    CHECK(!res.witness.empty());
}

TEST_CASE("is_uniform exhaustive on complete and near-complete graphs") {
    auto H = complete(4);
    auto full = is_uniform(H, 0.2, 1.0, {});
    CHECK(full.ok);
    CHECK(full.certified);

    BiGraph M(4);  // complete minus the (0,0) edge
    for (int l = 0; l < 4; ++l)
        for (int r = 0; r < 4; ++r)
            if (l != 0 || r != 0) M.add_edge(l, r);
    // With size threshold 0.2*4 the singleton pair ({0},{0}) qualifies and
    // spans 0 edges against a lower bound of 0.8.
    auto res = is_uniform(M, 0.2, 1.0, {});
    CHECK(!res.ok);
    CHECK(res.certified);
    // Widening the size threshold to 0.5 hides the singleton; a (2,2) pair
    // containing the hole spans 3 edges, inside [2, 6].
    CHECK(is_uniform(M, 0.5, 1.0, {}).ok);

    CHECK_THROWS_AS(is_uniform(H, 0.0, 1.0, {}), std::invalid_argument);
}

TEST_CASE("is_uniform sampled mode is flagged uncertified") {
    auto H = complete(14);
    CheckOptions opts;
    opts.subset_cap = 8;
    opts.samples = 50;
    auto res = is_uniform(H, 0.3, 1.0, opts);
    CHECK(res.ok);
    CHECK(!res.certified);
}

TEST_CASE("is_dense only enforces the lower bound") {
    // Complete minus a perfect matching: each side degree 3, p = 0.75.
    BiGraph H(4);
    for (int l = 0; l < 4; ++l)
        for (int r = 0; r < 4; ++r)
            if (l != r) H.add_edge(l, r);
    // Tight band: the (2,2) pair {0,1} x {0,1} spans 2 < 0.7 * 3 = 2.1.
    auto tight = is_dense(H, 0.3, 0.4, 0.75, {});
    CHECK(!tight.ok);
    CHECK(tight.certified);
    // Looser band passes: minimum (2,2) count 2 >= 0.6 * 3 = 1.8.
    auto loose = is_dense(H, 0.4, 0.4, 0.75, {});
    CHECK(loose.ok);
    CHECK(loose.certified);
    // A graph denser than p never fails the one-sided check.
    CHECK(is_dense(complete(4), 0.3, 0.5, 0.5, {}).ok);
    CHECK(!is_uniform(complete(4), 0.3, 0.5, {}).ok);
}

TEST_CASE("is_sparse exhaustive catches a planted dense spot") {
    // A lone complete (2,2) block inside an n = 8 host.
    BiGraph H(8);
    for (int l = 0; l < 2; ++l)
        for (int r = 0; r < 2; ++r) H.add_edge(l, r);
    auto bad = is_sparse(H, 0.6, 0.1, {});
    CHECK(!bad.ok);
    CHECK(bad.certified);
    auto good = is_sparse(H, 0.6, 0.2, {});
    CHECK(good.ok);
    CHECK(good.certified);
}

TEST_CASE("is_sparse peeling mode") {
    // Star: right vertex 0 joined to 20 left vertices, inside n = 25.
    BiGraph S(25);
    for (int l = 0; l < 20; ++l) S.add_edge(l, 0);
    auto bad = is_sparse(S, 0.9, 0.02, {});
    CHECK(!bad.ok);
    CHECK(bad.certified);

    // A perfect matching peels to empty with every deletion at degree <= 1.
    BiGraph M(25);
    for (int i = 0; i < 25; ++i) M.add_edge(i, i);
    auto good = is_sparse(M, 0.9, 0.2, {});
    CHECK(good.ok);
    CHECK(good.certified);
}

TEST_CASE("is_quasirandom composes the three checks") {
    auto H = complete(6);
    auto res = is_quasirandom(H, 0.1, 0.2, 2.0, 1.0, {});
    CHECK(res.ok);
    CHECK(res.certified);

    BiGraph P(6);
    P.add_edge(0, 0);
    auto bad = is_quasirandom(P, 0.1, 0.2, 2.0, 1.0, {});
    CHECK(!bad.ok);
    CHECK(bad.witness.substr(0, 11) == "regularity:");
}

TEST_CASE("check_sparse2 is vacuous below the size threshold") {
    auto H = complete(8);
    auto res = check_sparse2(H, {});
    CHECK(res.ok);
    CHECK(res.certified);
}

TEST_CASE("degeneracy_order on a hand-worked example") {
    // Left 0,1,2 (global 0,1,2), right 0,1,2 (global 3,4,5).
    BiGraph H(3);
    H.add_edge(0, 0);
    H.add_edge(0, 1);
    H.add_edge(1, 1);
    H.add_edge(2, 2);
    std::vector<int> all{0, 1, 2, 3, 4, 5};
    auto ord = degeneracy_order(H, all);
    CHECK(ord == std::vector<int>{4, 0, 3, 5, 2, 1});

    // Induced on a subset: only edges inside {0, 3, 4} count.
    auto sub = degeneracy_order(H, {0, 3, 4});
    CHECK(sub == std::vector<int>{4, 0, 3});

    CHECK_THROWS_AS(degeneracy_order(H, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(degeneracy_order(H, {9}), std::invalid_argument);
}

TEST_CASE("graph text round trip is canonical") {
    BiGraph H(3);
    H.add_edge(2, 1);
    H.add_edge(0, 0);
    H.add_edge(1, 2);
    std::ostringstream out;
    write_graph(out, H);
    CHECK(out.str() == "3 3\n0 0\n1 2\n2 1\n");

    std::istringstream in(out.str());
    auto G = read_graph(in);
    CHECK(G.n() == 3);
    CHECK(G.edge_count() == 3);
    CHECK(G.has_edge(2, 1));
    std::ostringstream again;
    write_graph(again, G);
    CHECK(again.str() == out.str());
}

TEST_CASE("graph reader reports line numbers") {
    auto expect_line = [](const std::string& text, int line) {
        std::istringstream in(text);
        try {
            read_graph(in);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.line == line);
        }
    };
    expect_line("", 1);
    expect_line("3\n", 1);
    expect_line("x 1\n", 1);
    expect_line("3 1\n0 0 0\n", 2);
    expect_line("3 2\n0 0\n0 3\n", 3);
    expect_line("3 2\n0 0\n0 0\n", 3);
    expect_line("3 2\n0 0\n", 3);          // fewer edges than declared
    expect_line("3 1\n0 0\n1 1\n", 3);     // more edges than declared
    expect_line("0 0\n", 1);
}
