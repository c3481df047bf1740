#include "doctest.h"

#include <sstream>

#include "bifactor/factorisation.hpp"

using namespace bifactor;

namespace {

// K_{2,2} split into its two perfect matchings.
Factorisation k22_two_matchings() {
    BiGraph H(2);
    H.add_edge(0, 0);
    H.add_edge(0, 1);
    H.add_edge(1, 0);
    H.add_edge(1, 1);
    Factorisation F(std::move(H), 2);
    F.set_colour(0, 0);
    F.set_colour(1, 1);
    F.set_colour(2, 1);
    F.set_colour(3, 0);
    return F;
}

}  // namespace

TEST_CASE("Factorisation bookkeeping") {
    auto F = k22_two_matchings();
    CHECK(F.m() == 2);
    CHECK(F.is_complete());
    CHECK(F.coloured_count() == 4);
    CHECK(F.colour_of(2) == 1);
    CHECK(F.class_sizes() == std::vector<int>{2, 2});
    CHECK(F.class_degree(0, 0) == 1);
    CHECK(F.class_degree(0, 1) == 1);
    auto C0 = F.class_graph(0);
    CHECK(C0.edge_count() == 2);
    CHECK(C0.has_edge(0, 0));
    CHECK(C0.has_edge(1, 1));
    auto all = F.class_graphs();
    REQUIRE(all.size() == 2);
    CHECK(all[1].has_edge(0, 1));
    CHECK(all[1].has_edge(1, 0));

    CHECK_THROWS_AS(F.set_colour(0, 1), std::invalid_argument);  // already coloured
    BiGraph H(2);
    H.add_edge(0, 0);
    Factorisation G(std::move(H), 2);
    CHECK_THROWS_AS(G.set_colour(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Factorisation(BiGraph(2), 0), std::invalid_argument);
}

TEST_CASE("validate_regular accepts exact matchings and reports gaps") {
    auto F = k22_two_matchings();
    CHECK(F.validate_regular(DegreeBand{1.0, 0.0}).ok);
    CHECK(!F.validate_regular(DegreeBand{2.0, 0.1}).ok);

    BiGraph H(2);
    H.add_edge(0, 0);
    Factorisation P(std::move(H), 1);
    auto res = P.validate_regular(DegreeBand{1.0, 0.0});
    CHECK(!res.ok);
    CHECK(res.witness == "edge 0 is uncoloured");
}

TEST_CASE("factorisation text round trip") {
    auto F = k22_two_matchings();
    std::ostringstream out;
    write_factorisation(out, F);
    CHECK(out.str() == "2 4\n0 0 0\n0 1 1\n1 0 1\n1 1 0\n");

    std::istringstream in(out.str());
    auto G = read_factorisation(in);  // palette derived
    CHECK(G.m() == 2);
    CHECK(G.is_complete());
    std::ostringstream again;
    write_factorisation(again, G);
    CHECK(again.str() == out.str());

    std::istringstream in2(out.str());
    CHECK_THROWS_AS(read_factorisation(in2, 1), FormatError);  // colour 1 outside palette
}

TEST_CASE("factorisation reader reports line numbers") {
    auto expect_line = [](const std::string& text, int line) {
        std::istringstream in(text);
        try {
            read_factorisation(in);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.line == line);
        }
    };
    expect_line("", 1);
    expect_line("2 1\n0 0\n", 2);
    expect_line("2 1\n0 0 -1\n", 2);
    expect_line("2 1\n0 2 0\n", 2);
    expect_line("2 2\n0 0 0\n0 0 1\n", 3);
    expect_line("2 1\n", 2);
}
