#include <doctest.h>

#include "bifactor/config.hpp"

using namespace bifactor;

TEST_CASE("empty config is rejected with guidance") {
    try {
        parse_config_text("");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line == 0);
        CHECK(std::string(e.what()).find("[job]") != std::string::npos);
        CHECK(std::string(e.what()).find("op") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("# only a comment\n\n"), SchemaError);
}

TEST_CASE("minimal job picks up the preset defaults") {
    Campaign c = parse_config_text("[job]\nop = greedy\nseeds = 7\n");
    REQUIRE(c.jobs.size() == 1);
    const Job& j = c.jobs[0];
    CHECK(j.op == "greedy");
    CHECK(j.seed_lo == 7);
    CHECK(j.seed_hi == 7);
    Params p = j.instance();
    Params preset = desk_preset();
    CHECK(p.n == preset.n);
    CHECK(p.d == doctest::Approx(preset.d));
    CHECK(p.m == preset.m);
    CHECK(p.delta == doctest::Approx(preset.delta));
    CHECK(p.delta_prime == doctest::Approx(preset.delta_prime));
    CHECK(p.eta == doctest::Approx(preset.eta));
    CHECK(p.eps == doctest::Approx(preset.eps));
    CHECK(p.theta == doctest::Approx(preset.theta));
    // The echo map holds every effective key, not just the ones written.
    CHECK(j.has("matching_restart_cap"));
    CHECK(j.get_int("clean_retry_cap") == 64);
}

TEST_CASE("explicit keys override the defaults") {
    Campaign c = parse_config_text(
        "out = runs\n"
        "parallelism = 4\n"
        "[job]\n"
        "op = pipeline\n"
        "seeds = 10..12\n"
        "n = 32\n"
        "d = 5\n"
        "m = 3\n"
        "spread_trials = 50\n");
    CHECK(c.out_dir == "runs");
    CHECK(c.parallelism == 4);
    REQUIRE(c.jobs.size() == 1);
    const Job& j = c.jobs[0];
    CHECK(j.seed_lo == 10);
    CHECK(j.seed_hi == 12);
    Params p = j.instance();
    CHECK(p.n == 32);
    CHECK(p.d == doctest::Approx(5.0));
    CHECK(p.m == 3);
    CHECK(p.theta == doctest::Approx(0.995));  // untouched default
    CHECK(j.get_int("spread_trials") == 50);
    CHECK(j.get_int("spread_probes") == 8);
}

TEST_CASE("out-of-range tolerances are caught at parse time") {
    try {
        parse_config_text("[job]\nop = greedy\ntheta = 2\n");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("theta") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[job]\nop = greedy\ndelta = 0\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = greedy\nd = -1\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = greedy\nn = 0\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = greedy\nn = shoe\n"), SchemaError);
}

TEST_CASE("keys outside the op allowlist are rejected with their line") {
    try {
        parse_config_text("[job]\nop = greedy\n\n\ngrid = 0.5\n");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line == 5);
        CHECK(std::string(e.what()).find("grid") != std::string::npos);
    }
    // Threshold jobs take no instance tolerances.
    CHECK_THROWS_AS(parse_config_text("[job]\nop = threshold\ntheta = 0.9\n"), SchemaError);
}

TEST_CASE("structure violations carry line numbers") {
    try {
        parse_config_text("speed = 9\n");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line == 1);
    }
    CHECK_THROWS_AS(parse_config_text("[job]\nseeds = 3\n"), SchemaError);     // missing op
    CHECK_THROWS_AS(parse_config_text("[job]\nop = dance\n"), SchemaError);    // unknown op
    CHECK_THROWS_AS(parse_config_text("[run]\nop = gen\n"), SchemaError);      // bad section
    CHECK_THROWS_AS(parse_config_text("[job]\nop = gen\nop = gen\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = gen\nn = 8\nn = 8\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = gen\nn =\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = gen\njust words\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("parallelism = 0\n[job]\nop = gen\n"), SchemaError);
}

TEST_CASE("seed ranges parse as single values or inclusive spans") {
    Campaign c = parse_config_text("[job]\nop = gen\nseeds = 100..104\n");
    CHECK(c.jobs[0].seed_lo == 100);
    CHECK(c.jobs[0].seed_hi == 104);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = gen\nseeds = 5..2\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = gen\nseeds = -3\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = gen\nseeds = a..b\n"), SchemaError);
}

TEST_CASE("threshold jobs validate their model and grid") {
    Campaign c = parse_config_text(
        "[job]\n"
        "op = threshold\n"
        "n = 8\n"
        "model = fixed\n"
        "grid = 1, 2, 3\n"
        "trials = 10\n"
        "budget_nodes = 5000\n");
    const Job& j = c.jobs[0];
    CHECK(j.get("model") == "fixed");
    CHECK(j.get("grid") == "1, 2, 3");
    CHECK(j.get_int("budget_nodes") == 5000);

    CHECK_THROWS_AS(parse_config_text("[job]\nop = threshold\nmodel = gauss\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = threshold\ngrid = 0.9,0.1\n"), SchemaError);
    CHECK_THROWS_AS(parse_config_text("[job]\nop = threshold\ngrid = 0.2,,0.4\n"), SchemaError);
    // Binomial probabilities live in [0, 1].
    CHECK_THROWS_AS(parse_config_text("[job]\nop = threshold\ngrid = 0.5,1.5\n"), SchemaError);
}

TEST_CASE("refine jobs must name their input files") {
    Campaign c = parse_config_text(
        "[job]\nop = refine\nhost_file = h.txt\ncolours_file = c.txt\nseeds = 1\n");
    CHECK(c.jobs[0].get("host_file") == "h.txt");
    CHECK_THROWS_AS(parse_config_text("[job]\nop = refine\nhost_file = h.txt\n"), SchemaError);
}

TEST_CASE("comments and multiple jobs coexist") {
    Campaign c = parse_config_text(
        "# campaign header\n"
        "out = results  # trailing comment\n"
        "[job]\n"
        "op = gen\n"
        "n = 16  # small\n"
        "d = 5\n"
        "m = 3\n"
        "[job]\n"
        "op = threshold\n"
        "n = 4\n");
    CHECK(c.out_dir == "results");
    REQUIRE(c.jobs.size() == 2);
    CHECK(c.jobs[0].op == "gen");
    CHECK(c.jobs[0].get_int("n") == 16);
    CHECK(c.jobs[1].op == "threshold");
    CHECK(c.jobs[1].get_int("n") == 4);
}

TEST_CASE("instance() round-trips through Params::validate") {
    Campaign c = parse_config_text("[job]\nop = absorb\nn = 64\nd = 6\nm = 3\n");
    Params p = c.jobs[0].instance();
    CHECK(p.n == 64);
    CHECK(p.m == 3);
    CHECK(p.p() == doctest::Approx(6.0 * 3 / 64));
}

TEST_CASE("missing config file reports its path") {
    try {
        parse_config_file("/nonexistent/campaign.cfg");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line == 0);
        CHECK(std::string(e.what()).find("campaign.cfg") != std::string::npos);
    }
}
