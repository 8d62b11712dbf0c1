#include <doctest.h>

#include "oracles.hpp"
#include "suffstat/ib.hpp"
#include "suffstat/simgen.hpp"

using namespace suffstat;

namespace {

GlmSpec sum_spec() {
    GlmSpec s;
    s.family = Family::Sum;
    s.a = {-0.4, 0.9, 1.3, -0.7, 0.5, 0.8};
    s.n = 4;
    return s;
}

IBOptions opts(const IBProblem& prob, double beta_prime, int card, int restarts = 50) {
    IBOptions o;
    o.beta = scale_beta(prob, beta_prime);
    o.max_cardinality = card;
    o.restarts = restarts;
    o.seed = 3;
    return o;
}

}  // namespace

TEST_CASE("problem setup matches prob-core quantities") {
    ProbTable p = analysis_table(sum_spec());
    IBProblem prob = make_ib_problem(p, {"X", "V1"}, "Z");
    CHECK(prob.nx == 4);
    CHECK(prob.nz == 5);
    CHECK(prob.h_x == doctest::Approx(entropy(p, {"X", "V1"})));
    CHECK(prob.i_xz == doctest::Approx(mutual_info(p, {"X", "V1"}, {"Z"})));
    CHECK(scale_beta(prob, 10) == doctest::Approx(10 * prob.h_x / prob.i_xz));
    CHECK_THROWS_AS(make_ib_problem(p, {}, "Z"), IbError);
    CHECK_THROWS_AS(make_ib_problem(p, {"X", "Z"}, "Z"), IbError);
    CHECK_THROWS_AS(scale_beta(prob, 0), IbError);
    ProbTable indep({{"A", 2}, {"B", 2}}, {0.25, 0.25, 0.25, 0.25});
    CHECK_THROWS_AS(scale_beta(make_ib_problem(indep, {"A"}, "B"), 1.0), IbError);
}

TEST_CASE("single runs never increase the objective") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        ProbTable p = oracle::random_table(rng, {{"A", 2 + static_cast<int>(rng.below(3))}, {"B", 2}, {"Z", 3}});
        IBProblem prob = make_ib_problem(p, {"A", "B"}, "Z");
        std::vector<double> trace;
        double beta = 0.5 + 20 * rng.uniform();
        int nt = 2 + static_cast<int>(rng.below(prob.nx - 1));
        SoftMapping m = ib_single_run(prob, beta, nt, 1e-10, 500, rng.next(), &trace);
        CAPTURE(trial);
        REQUIRE(trace.size() >= 1);
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
        for (int x = 0; x < m.nx; ++x) {
            double row = 0;
            for (int t = 0; t < m.nt; ++t) row += m.rows[x * m.nt + t];
            CHECK(row == doctest::Approx(1.0));
        }
        CHECK(m.i_tx <= prob.h_x + 1e-9);
        CHECK(m.i_tz <= prob.i_xz + 1e-9);
    }
}

TEST_CASE("parallel and serial optimizers pick the same restart") {
    ProbTable p = analysis_table(sum_spec());
    IBProblem prob = make_ib_problem(p, {"X", "V1"}, "Z");
    IBOptions o = opts(prob, 25, 4, 40);
    SoftMapping a = ib_optimize(prob, o);
    SoftMapping b = ib_optimize_serial(prob, o);
    CHECK(a.restart == b.restart);
    CHECK(a.rows == b.rows);
    CHECK(a.objective == b.objective);
    SoftMapping c = ib_optimize(prob, o);
    CHECK(c.rows == a.rows);
    CHECK(restart_seed(3, 0) != restart_seed(3, 1));
}

TEST_CASE("hardened IB recovers the exhaustive-search partition on a sum table") {
    ProbTable p = analysis_table(sum_spec());
    IBProblem prob = make_ib_problem(p, {"X", "V1"}, "Z");
    auto truth = oracle::coarsest_partition(p, {"X", "V1"}, "Z");
    CHECK(truth == std::vector<int>{0, 1, 1, 2});
    SufficientStatistic t = harden(ib_optimize(prob, opts(prob, 100, 4)), prob);
    CHECK(t.cardinality == 3);
    CHECK(canonical_labels(t.labels) == truth);
    CHECK(mutual_info(apply_statistic(t, p), {"X", "V1"}, {"Z"}, {"theta"}) < 1e-9);
}

TEST_CASE("small beta' collapses, large beta' keeps every state") {
    GlmSpec s = sum_spec();
    ProbTable p = analysis_table(s);
    IBProblem prob = make_ib_problem(p, {"X", "V1", "V2"}, "Z");
    SufficientStatistic lo = harden(ib_optimize(prob, opts(prob, 0.01, 8, 20)), prob);
    CHECK(lo.cardinality == 1);
    SufficientStatistic hi = harden(ib_optimize(prob, opts(prob, 100, 8, 20)), prob);
    CHECK(hi.cardinality == static_cast<int>(canonical_labels(
                                oracle::coarsest_partition(p, {"X", "V1", "V2"}, "Z")).back()) + 1);
}

TEST_CASE("hardening drops empty clusters and labels canonically") {
    ProbTable p = analysis_table(sum_spec());
    IBProblem prob = make_ib_problem(p, {"X", "V1"}, "Z");
    SoftMapping m;
    m.nx = 4;
    m.nt = 3;
    // cluster 0 is empty; the 0.4 entries would win argmax if it were kept
    m.rows = {0.0, 0.6, 0.4, 0.0, 0.3, 0.7, 0.0, 0.3, 0.7, 0.0, 0.9, 0.1};
    m.rows[0] = 1e-15, m.rows[1] = 0.6 - 1e-15;
    SufficientStatistic t = harden(m, prob);
    CHECK(t.labels == std::vector<int>{0, 1, 1, 0});
    CHECK(t.cardinality == 2);
    CHECK(canonical_labels({2, 2, 0, 1, 0}) == std::vector<int>{0, 0, 1, 2, 1});
}

TEST_CASE("statistic helpers") {
    SufficientStatistic a = make_statistic({"X", "V1"}, {2, 2}, {1, 0, 0, 2});
    SufficientStatistic b = make_statistic({"X", "V1"}, {2, 2}, {0, 2, 2, 1});
    CHECK(a.cardinality == 3);
    CHECK(statistic_partition_equal(a, b));
    CHECK_THROWS_AS(make_statistic({"X"}, {2}, {0, 1, 0}), IbError);
    CHECK_THROWS_AS(statistic_partition_equal(a, make_statistic({"X"}, {4}, {0, 0, 0, 0})), IbError);
    SufficientStatistic back = statistic_from_json(to_json(a));
    CHECK(back.labels == a.labels);
    CHECK(back.inputs == a.inputs);
    ProbTable p = analysis_table(sum_spec());
    ProbTable with = apply_statistic(a, p);
    CHECK(with.cardinality("theta") == 3);
    CHECK(with.total() == doctest::Approx(1.0));
    CHECK_THROWS_AS(apply_statistic(a, with), IbError);
}

TEST_CASE("option validation and budget guard") {
    ProbTable p = analysis_table(sum_spec());
    IBProblem prob = make_ib_problem(p, {"X", "V1"}, "Z");
    IBOptions o = opts(prob, 25, 4);
    o.max_cardinality = 5;
    CHECK_THROWS_AS(ib_optimize(prob, o), IbError);
    o.max_cardinality = 0;
    CHECK_THROWS_AS(ib_optimize(prob, o), IbError);
    o.max_cardinality = 3;
    o.restarts = 100000;
    o.budget_seconds = 1e-6;
    SoftMapping m = ib_optimize(prob, o);
    CHECK(m.budget_exceeded);
    CHECK(m.restarts_run < 100000);
    CHECK(m.rows.size() == 12);
}
