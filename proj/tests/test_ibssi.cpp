#include <doctest.h>

#include "oracles.hpp"
#include "suffstat/boolean_rule.hpp"
#include "suffstat/ibssi.hpp"
#include "suffstat/simgen.hpp"

using namespace suffstat;

namespace {

GlmSpec sum_spec() {
    GlmSpec s;
    s.a = {-0.4, 0.9, 1.3, -0.7, 0.5, 0.8};
    return s;
}

IbssiQuery query(const ProbTable& p, VarList inputs) {
    IbssiQuery q;
    q.x = "X";
    q.z = "Z";
    q.inputs = std::move(inputs);
    q.train = q.test = p;
    q.options.restarts = 50;
    q.options.seed = 1;
    return q;
}

SuiteOptions desk(int k, std::uint64_t seed) {
    SuiteOptions o;
    o.k = k;
    o.full_grid = false;
    o.seed = seed;
    return o;
}

}  // namespace

TEST_CASE("sum table yields the sum statistic") {
    ProbTable p = analysis_table(sum_spec());
    StatisticVerdict v = ibssi_sweep(query(p, {"X", "V1"}));
    REQUIRE(v.accepted);
    CHECK(v.beta_prime == 25);
    CHECK(canonical_labels(v.statistic->labels) == std::vector<int>{0, 1, 1, 2});
    CHECK(consistency_score(*v.statistic, p, "X", "Z").consistent);
    CHECK(v.trace.size() == 1);
    CHECK(v.trace[0].calls.front().max_cardinality == 4);
}

TEST_CASE("criteria values on the true and the identity partition") {
    ProbTable p = analysis_table(sum_spec());
    SelectionThresholds th;
    SufficientStatistic truth = make_statistic({"X", "V1"}, {2, 2}, {0, 1, 1, 2});
    CriteriaResult c = evaluate_criteria(truth, p, "X", "Z", th, true);
    CHECK(c.all());
    CHECK(c.i_given < 1e-12);
    CHECK(c.h_x_given < c.h_x);
    CHECK(c.h_z_given <= c.h_z);
    SufficientStatistic id = make_statistic({"X", "V1"}, {2, 2}, {0, 1, 2, 3});
    CriteriaResult d = evaluate_criteria(id, p, "X", "Z", th, false);
    CHECK_FALSE(d.c_x);
    CHECK(d.h_x_given == doctest::Approx(0.0));
    ConsistencyResult r = consistency_score(id, p, "X", "Z");
    CHECK_FALSE(r.consistent);
    CHECK(r.i_given < 1e-12);
}

TEST_CASE("query validation") {
    ProbTable p = analysis_table(sum_spec());
    IbssiQuery q = query(p, {"V1", "V2"});
    CHECK_THROWS_AS(ibssi_sweep(q), IbError);
    q = query(p, {"X", "Z"});
    CHECK_THROWS_AS(ibssi_sweep(q), IbError);
    q = query(p, {"X"});
    CHECK_THROWS_AS(algorithm1(q, 25), IbError);
    q = query(p, {"X", "V1"});
    q.options.beta_primes.clear();
    CHECK_THROWS_AS(ibssi_sweep(q), IbError);
    CHECK_THROWS_AS(input_escalation("X", "Z", {}, q), IbError);
}

TEST_CASE("sweeps are reproducible for a seed") {
    ProbTable p = analysis_table(sum_spec());
    IbssiQuery q = query(p, {"X", "V1", "V2"});
    q.options.stop_at_first = false;
    CHECK(to_json(ibssi_sweep(q)) == to_json(ibssi_sweep(q)));
    q.options.parallel = false;
    auto serial = to_json(ibssi_sweep(q));
    q.options.parallel = true;
    CHECK(serial == to_json(ibssi_sweep(q)));
}

TEST_CASE("strict first call rejects a table without compressible states") {
    // Z is a deterministic copy of (X, V1): nothing can be merged
    std::vector<double> m(16, 0.0);
    const double px[4] = {0.1, 0.2, 0.3, 0.4};
    for (int s = 0; s < 4; ++s) m[s * 4 + s] = px[s];
    ProbTable p({{"X", 2}, {"V1", 2}, {"Z", 4}}, m);
    BetaOutcome o = algorithm1(query(p, {"X", "V1"}), 50);
    CHECK_FALSE(o.accepted);
    CHECK(o.reason == "no compression at full cardinality");
    IbssiQuery q = query(p, {"X", "V1"});
    q.options.strict_first_call = false;
    CHECK_FALSE(algorithm1(q, 50).accepted);
}

TEST_CASE("any acceptance on statistic-free tables is inconsistent") {
    for (const auto& c : generate_suite(Family::NoStat, desk(6, 21))) {
        ProbTable p = analysis_table(c.spec);
        for (const auto& pool : input_pools(c.spec)) {
            IbssiQuery q = query(p, pool);
            q.options.stop_at_first = false;
            for (const auto& [b, t] : ibssi_sweep(q).acceptances()) {
                CAPTURE(c.index);
                CHECK_FALSE(consistency_score(t, p, "X", "Z").consistent);
                CHECK_FALSE(merges_source_states(coarsest_sufficient_partition(p, pool, "Z"), "X"));
            }
        }
    }
}

TEST_CASE("accepted statistics on exact statistic-bearing tables are consistent") {
    for (Family f : {Family::Sum, Family::Products, Family::TwoSums}) {
        for (const auto& c : generate_suite(f, desk(4, 8))) {
            ProbTable p = analysis_table(c.spec);
            for (const auto& pool : input_pools(c.spec)) {
                if (!merges_source_states(coarsest_sufficient_partition(p, pool, "Z"), "X")) continue;
                IbssiQuery q = query(p, pool);
                q.options.stop_at_first = false;
                for (const auto& [b, t] : ibssi_sweep(q).acceptances()) {
                    CAPTURE(family_name(f));
                    CAPTURE(c.index);
                    CHECK(consistency_score(t, p, "X", "Z").consistent);
                }
            }
        }
    }
}

TEST_CASE("a pool without a statistic can pass the thresholds approximately") {
    // two-sum table, pool {X,V1}: merging by X+V1 leaves I(X;Z|theta) just under 2.5% of I(X;Z)
    auto c = generate_suite(Family::TwoSums, desk(4, 8))[1];
    ProbTable p = analysis_table(c.spec);
    StatisticVerdict v = ibssi_sweep(query(p, {"X", "V1"}));
    REQUIRE(v.accepted);
    CHECK(canonical_labels(v.statistic->labels) == std::vector<int>{0, 1, 1, 2});
    ConsistencyResult r = consistency_score(*v.statistic, p, "X", "Z");
    CHECK_FALSE(r.consistent);
    CHECK(r.i_given == doctest::Approx(0.00385094).epsilon(1e-4));
}

TEST_CASE("input escalation stops at the first accepting pool") {
    ProbTable p = analysis_table(sum_spec());
    IbssiQuery tmpl = query(p, {});
    EscalationResult r = input_escalation("X", "Z", {{"X", "V1"}, {"X", "V1", "V2"}}, tmpl);
    CHECK(r.verdict.accepted);
    CHECK(r.chosen == VarList{"X", "V1"});
    CHECK(r.attempts.size() == 1);
}

TEST_CASE("local criteria on Boolean configurations") {
    BooleanConfig bad = builtin_config("one_plus_x_times_v1");
    CHECK(bad.statistic_present);
    CHECK_FALSE(local_criteria(bad.truth, bad.exact, "X", "Z"));
    BooleanConfig good = builtin_config("or");
    CHECK(local_criteria(good.truth, good.exact, "X", "Z"));
    IbssiQuery q = query(good.exact, good.observable);
    q.options.local_criteria = true;
    StatisticVerdict v = ibssi_sweep(q);
    REQUIRE(v.accepted);
    CHECK(statistic_partition_equal(*v.statistic, good.truth));
}

TEST_CASE("verdict json carries the trace") {
    ProbTable p = analysis_table(sum_spec());
    auto j = to_json(ibssi_sweep(query(p, {"X", "V1"})));
    CHECK(j.at("accepted").get<bool>());
    CHECK(j.at("trace").size() == 1);
    CHECK(j.at("trace")[0].contains("reason"));
    CHECK(j.contains("statistic"));
}
