#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "suffstat/prob.hpp"

using namespace suffstat;

namespace {

ProbTable xor_table() {
    // Z = X xor Y with uniform X, Y
    std::vector<double> m(8, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) m[x * 4 + y * 2 + (x ^ y)] = 0.25;
    return ProbTable({{"X", 2}, {"Y", 2}, {"Z", 2}}, m);
}

std::vector<VariableSpec> random_vars(Rng& rng, int n) {
    std::vector<VariableSpec> v;
    for (int i = 0; i < n; ++i) v.push_back({"A" + std::to_string(i), 2 + static_cast<int>(rng.below(3))});
    return v;
}

}  // namespace

TEST_CASE("table layout is row-major with the last variable fastest") {
    ProbTable p({{"A", 2}, {"B", 3}}, {0.1, 0.1, 0.1, 0.2, 0.2, 0.3});
    CHECK(p.encode({1, 0}) == 3);
    CHECK(p.encode({0, 2}) == 2);
    CHECK(p.decode(5) == std::vector<int>{1, 2});
    CHECK(p.at({1, 2}) == doctest::Approx(0.3));
    CHECK(p.stride(0) == 3);
    CHECK(p.cardinality("B") == 3);
    CHECK_THROWS_AS(p.index_of("C"), ProbError);
    CHECK_THROWS_AS(p.encode({2, 0}), ProbError);
}

TEST_CASE("table construction rejects malformed input") {
    CHECK_THROWS_AS(ProbTable({{"A", 2}}, {0.5}), ProbError);
    CHECK_THROWS_AS(ProbTable({{"A", 2}}, {0.6, 0.6}), ProbError);
    CHECK_THROWS_AS(ProbTable({{"A", 2}}, {1.5, -0.5}), ProbError);
    CHECK_THROWS_AS(ProbTable({{"A", 2}, {"A", 2}}, {0.25, 0.25, 0.25, 0.25}), ProbError);
    CHECK_THROWS_AS(ProbTable({{"A", 0}}, {}), ProbError);
}

TEST_CASE("entropy and mutual information on known tables") {
    ProbTable p = xor_table();
    CHECK(entropy(p, {"X"}) == doctest::Approx(1.0));
    CHECK(entropy(p, {"X", "Y", "Z"}) == doctest::Approx(2.0));
    CHECK(mutual_info(p, {"X"}, {"Z"}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mutual_info(p, {"X"}, {"Z"}, {"Y"}) == doctest::Approx(1.0));
    CHECK(mutual_info(p, {"X", "Y"}, {"Z"}) == doctest::Approx(1.0));
    CHECK(entropy_bits({1, 1, 2}) == doctest::Approx(1.5));
    CHECK(entropy_bits({0, 0}) == 0.0);
    CHECK_THROWS_AS(mutual_info(p, {"X"}, {"X"}), ProbError);
}

TEST_CASE("marginal and condition") {
    ProbTable p = xor_table();
    ProbTable m = marginal(p, {"Z", "X"});
    CHECK(m.names() == VarList{"Z", "X"});
    CHECK(m.at({1, 0}) == doctest::Approx(0.25));
    ProbTable c = condition(p, {{"X", {1}}});
    CHECK(c.names() == VarList{"Y", "Z"});
    CHECK(c.at({0, 1}) == doctest::Approx(0.5));
    CHECK(c.at({0, 0}) == 0.0);
    CHECK_THROWS_AS(condition(p, {{"X", {1}}, {"X", {0}}}), ProbError);
    CHECK_THROWS_AS(condition(p, {{"X", {2}}}), ProbError);
    ProbTable z({{"A", 2}, {"B", 2}}, {0.5, 0.5, 0, 0});
    CHECK_THROWS_AS(condition(z, {{"A", {1}}}), ProbError);
    CHECK_THROWS_AS(marginal(p, {"X", "X"}), ProbError);
}

TEST_CASE("kl divergence modes") {
    CHECK(kl_divergence({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    CHECK(kl_divergence({1, 0}, {0.5, 0.5}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(kl_divergence({0.5, 0.5}, {1, 0}), ProbError);
    CHECK(kl_divergence({0.5, 0.5}, {1, 0}, KlMode::Clamped) > 10.0);
    CHECK_THROWS_AS(kl_divergence({1}, {0.5, 0.5}), ProbError);
}

TEST_CASE("independence test uses the ratio above the floor and the absolute test below it") {
    ProbTable p = xor_table();
    auto r = independence_test(p, {"X"}, {"Z"}, {"Y"}, 0.025);
    CHECK(r.used_floor);
    CHECK_FALSE(r.independent);
    auto q = independence_test(p, {"X"}, {"Y"}, {}, 0.025);
    CHECK(q.used_floor);
    CHECK(q.independent);
    // A weak dependence that the default floor hides but a tiny floor exposes.
    ProbTable w({{"A", 2}, {"B", 2}}, {0.2505, 0.2495, 0.2495, 0.2505});
    CHECK(independence_test(w, {"A"}, {"B"}, {}, 0.025).independent);
    CHECK_FALSE(independence_test(w, {"A"}, {"B"}, {}, 0.025, 1e-12).independent);
}

TEST_CASE("information identities hold on random tables") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        auto vars = random_vars(rng, 4);
        ProbTable p = oracle::random_table(rng, vars);
        VarList a{"A0"}, b{"A1"}, c{"A2"}, d{"A3"};
        CAPTURE(trial);
        // chain rule
        CHECK(entropy(p, {"A0", "A1"}) == doctest::Approx(entropy(p, a) + entropy(p, b, a)).epsilon(1e-9));
        // symmetry
        CHECK(mutual_info(p, a, b, c) == doctest::Approx(mutual_info(p, b, a, c)).epsilon(1e-9));
        // I(a;b) = H(a) - H(a|b)
        CHECK(mutual_info(p, a, b) == doctest::Approx(entropy(p, a) - entropy(p, a, b)).epsilon(1e-9));
        // chain rule for information
        CHECK(mutual_info(p, a, {"A1", "A2"}) ==
              doctest::Approx(mutual_info(p, a, b) + mutual_info(p, a, c, b)).epsilon(1e-9));
        CHECK(mutual_info(p, a, b, {"A2", "A3"}) >= 0.0);
        CHECK(entropy(p, a, d) <= entropy(p, a) + 1e-12);
        CHECK(marginal(p, {"A3", "A1"}).total() == doctest::Approx(1.0));
    }
}

TEST_CASE("product tables are independent under both tests") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int ca = 2 + static_cast<int>(rng.below(3)), cb = 2 + static_cast<int>(rng.below(3));
        std::vector<double> pa(ca), pb(cb);
        double ta = 0, tb = 0;
        for (auto& v : pa) ta += v = 0.1 + rng.uniform();
        for (auto& v : pb) tb += v = 0.1 + rng.uniform();
        std::vector<double> m;
        for (double x : pa)
            for (double y : pb) m.push_back(x / ta * y / tb);
        ProbTable p({{"A", ca}, {"B", cb}}, m);
        CHECK(mutual_info(p, {"A"}, {"B"}) < 1e-12);
        CHECK(independence_test(p, {"A"}, {"B"}, {}, 0.025, 1e-12).independent);
    }
}

TEST_CASE("estimate_joint counts and smooths") {
    SampleDataset d{{{"A", 2}, {"B", 2}}, {0, 0, 0, 1, 1, 1, 1, 1}};
    ProbTable p = estimate_joint(d);
    CHECK(p.at({0, 0}) == doctest::Approx(0.25));
    CHECK(p.at({1, 1}) == doctest::Approx(0.5));
    CHECK(p.at({1, 0}) == 0.0);
    ProbTable s = estimate_joint(d, 1.0);
    CHECK(s.at({1, 0}) == doctest::Approx(1.0 / 8.0));
    CHECK_THROWS_AS(estimate_joint(SampleDataset{{{"A", 2}}, {}}), ProbError);
    CHECK_THROWS_AS(estimate_joint(SampleDataset{{{"A", 2}}, {2}}), ProbError);
    CHECK_THROWS_AS(estimate_joint(d, -1.0), ProbError);
}

TEST_CASE("csv round trip and errors") {
    SampleDataset d{{{"X", 2}, {"Z", 5}}, {0, 4, 1, 3, 1, 0}};
    std::string text = format_csv(d);
    CHECK(text == "X,Z\n0,4\n1,3\n1,0\n");
    SampleDataset back = parse_csv(text);
    CHECK(back.cells == d.cells);
    CHECK(back.variables == d.variables);
    std::vector<VariableSpec> schema{{"X", 3}, {"Z", 6}};
    CHECK(parse_csv(text, &schema).variables == schema);
    std::vector<VariableSpec> small{{"X", 2}, {"Z", 2}};
    CHECK_THROWS_AS(parse_csv(text, &small), ProbError);
    CHECK_THROWS_AS(parse_csv("X,Z\n0\n"), ProbError);
    CHECK_THROWS_AS(parse_csv("X\na\n"), ProbError);
    CHECK_THROWS_AS(parse_csv("X\n-1\n"), ProbError);
    CHECK_THROWS_AS(parse_csv(""), ProbError);
    CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), ProbError);
}
