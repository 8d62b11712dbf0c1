#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "suffstat/boolean_rule.hpp"

using namespace suffstat;

namespace {

const std::vector<std::string> kNames{"X", "V1", "V2", "U1", "U2"};

// Random rule text built by hand from the grammar.
std::string random_rule(Rng& rng, int depth) {
    int pick = depth <= 0 ? static_cast<int>(rng.below(2)) : static_cast<int>(rng.below(6));
    auto var = [&] { return kNames[rng.below(kNames.size())]; };
    switch (pick) {
        case 0: return var();
        case 1: {
            std::string s = var();
            int n = 1 + static_cast<int>(rng.below(2));
            for (int i = 0; i < n; ++i) s += " + " + var();
            const char* ops[] = {" > ", " >= ", " = "};
            return s + ops[rng.below(3)] + std::to_string(rng.below(3));
        }
        case 2: return "NOT " + random_rule(rng, depth - 1);
        case 3: return "(" + random_rule(rng, depth - 1) + " AND " + random_rule(rng, depth - 1) + ")";
        case 4: return "(" + random_rule(rng, depth - 1) + " OR " + random_rule(rng, depth - 1) + ")";
        default: return random_rule(rng, depth - 1) + " AND " + random_rule(rng, depth - 1) + " OR " + var();
    }
}

std::map<std::string, int> assignment(int bits) {
    std::map<std::string, int> a;
    for (std::size_t i = 0; i < kNames.size(); ++i) a[kNames[i]] = (bits >> i) & 1;
    return a;
}

}  // namespace

TEST_CASE("precedence: AND binds tighter than OR, NOT tightest") {
    BooleanRule r = parse_boolean_rule("X OR V1 AND NOT U1");
    CHECK(render(r) == "(X OR (V1 AND (NOT U1)))");
    CHECK(r.variables() == std::vector<std::string>{"X", "V1", "U1"});
    CHECK(r.eval({{"X", 0}, {"V1", 1}, {"U1", 0}}) == 1);
    CHECK(r.eval({{"X", 0}, {"V1", 1}, {"U1", 1}}) == 0);
    CHECK(render(parse_boolean_rule("(X OR V1) AND U1")) == "((X OR V1) AND U1)");
}

TEST_CASE("threshold comparisons") {
    BooleanRule r = parse_boolean_rule("X + V1 + U1 >= 2");
    CHECK(render(r) == "(X + V1 + U1 >= 2)");
    CHECK(r.eval({{"X", 1}, {"V1", 0}, {"U1", 1}}) == 1);
    CHECK(r.eval({{"X", 1}, {"V1", 0}, {"U1", 0}}) == 0);
    CHECK(parse_boolean_rule("X + V1 = 1").eval({{"X", 1}, {"V1", 1}}) == 0);
    CHECK(parse_boolean_rule("X + V1 > 0").eval({{"X", 0}, {"V1", 1}}) == 1);
}

TEST_CASE("syntax errors report the position") {
    auto pos_of = [](const std::string& s) {
        try {
            parse_boolean_rule(s);
        } catch (const RuleSyntaxError& e) {
            return static_cast<long>(e.position);
        }
        return -1L;
    };
    CHECK(pos_of("X AND") == 5);
    CHECK(pos_of("(X OR V1") == 8);
    CHECK(pos_of("X $ V1") == 2);
    CHECK(pos_of("X + V1") >= 0);
    CHECK(pos_of("X + > 1") == 4);
    CHECK(pos_of("X V1") == 2);
    CHECK(pos_of("") == 0);
    CHECK_THROWS_WITH_AS(parse_boolean_rule("X AND"), "unexpected end of rule at position 5", RuleSyntaxError);
}

TEST_CASE("binding and evaluation errors") {
    BooleanRule r = parse_boolean_rule("X AND Q");
    CHECK_THROWS_AS(r.bind({"X", "V1"}), RuleBindError);
    CHECK_NOTHROW(r.bind({"X", "Q"}));
    CHECK_THROWS_AS(r.eval({{"X", 1}}), RuleBindError);
    CHECK_THROWS_AS(BooleanRule().eval({{"X", 1}}), RuleBindError);
}

TEST_CASE("render and parse round trip on random rules") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::string text = random_rule(rng, 4);
        CAPTURE(text);
        BooleanRule r = parse_boolean_rule(text);
        BooleanRule back = parse_boolean_rule(render(r));
        CHECK(back == r);
        CHECK(render(back) == render(r));
        for (int bits = 0; bits < 32; ++bits) CHECK(back.eval(assignment(bits)) == r.eval(assignment(bits)));
    }
}

TEST_CASE("built-in configurations carry the expected ground truth") {
    for (const auto& b : builtin_rules()) {
        CAPTURE(b.name);
        BooleanConfig c = builtin_config(b.name);
        CHECK(c.statistic_present == b.statistic_expected);
        if (b.statistic_expected) CHECK(c.local_ok == b.local_expected);
        CHECK(c.exact.total() == doctest::Approx(1.0));
        CHECK(c.exact.has("Z"));
        for (const auto& h : c.hidden) CHECK_FALSE(c.exact.has(h));
    }
    // X OR V1 merges everything but (0,0)
    CHECK(canonical_labels(builtin_config("or").truth.labels) == std::vector<int>{0, 1, 1, 1});
    CHECK(canonical_labels(builtin_config("and").truth.labels) == std::vector<int>{0, 0, 0, 1});
    CHECK_THROWS_AS(builtin_config("nope"), RuleBindError);
}

TEST_CASE("equal hidden marginals create a statistic, unequal ones do not") {
    CHECK(builtin_config("equal_hidden").statistic_present);
    CHECK_FALSE(builtin_config("unequal_hidden").statistic_present);
}

TEST_CASE("boolean config table follows the declared marginals") {
    BooleanConfig c = boolean_config(parse_boolean_rule("X AND U1 AND V1"), {"X", "V1"}, {{"U1", 0.8}});
    CHECK(marginal(c.exact, {"X"}).at({1}) == doctest::Approx(0.5));
    ProbTable v1 = condition(c.exact, {{"X", {1}}});
    CHECK(marginal(v1, {"V1"}).at({1}) == doctest::Approx(0.6));
    CHECK(marginal(condition(c.exact, {{"X", {1}}, {"V1", {1}}}), {"Z"}).at({1}) == doctest::Approx(0.8));
    CHECK_THROWS_AS(boolean_config(parse_boolean_rule("X AND U1"), {"V1", "U1"}), RuleBindError);
    CHECK_THROWS_AS(boolean_config(parse_boolean_rule("X AND U1 AND V1"), {"X", "V1"}, {{"U1", 1.0}}), RuleBindError);
}

TEST_CASE("rule files") {
    auto rules = parse_rule_file("# comment\nmine: X,V1: (X OR V1) AND U1\n\nother: X,V1,V2: X AND V2 OR V1 AND U1  # tail\n");
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].name == "mine");
    CHECK(rules[1].observable == VarList{"X", "V1", "V2"});
    CHECK(render(parse_boolean_rule(rules[1].text)) == "((X AND V2) OR (V1 AND U1))");
    CHECK_THROWS_AS(parse_rule_file("broken line\n"), RuleBindError);
    CHECK_THROWS_AS(parse_rule_file("bad: X,V1: X AND\n"), RuleSyntaxError);
}
