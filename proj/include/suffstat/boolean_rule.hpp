#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "suffstat/ib.hpp"
#include "suffstat/prob.hpp"

namespace suffstat {

class RuleSyntaxError : public std::runtime_error {
public:
    RuleSyntaxError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

class RuleBindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// expr := term (OR term)*; term := factor (AND factor)*;
// factor := NOT factor | '(' expr ')' | var | var ('+' var)* ('>'|'>='|'=') integer
struct RuleNode {
    enum class Kind { Var, Not, And, Or, Compare };
    enum class Op { Greater, GreaterEqual, Equal };
    Kind kind = Kind::Var;
    std::string name;            // Var
    std::vector<std::string> summands;  // Compare
    Op op = Op::Greater;
    int bound = 0;
    std::vector<std::shared_ptr<const RuleNode>> children;

    bool operator==(const RuleNode& o) const;
};

using RulePtr = std::shared_ptr<const RuleNode>;

class BooleanRule {
public:
    BooleanRule() = default;
    explicit BooleanRule(RulePtr root) : root_(std::move(root)) {}

    const RuleNode& root() const { return *root_; }
    bool empty() const { return !root_; }
    // Variables in first-occurrence order.
    std::vector<std::string> variables() const;
    int eval(const std::map<std::string, int>& assignment) const;
    void bind(const std::vector<std::string>& declared) const;

    bool operator==(const BooleanRule& o) const;

private:
    RulePtr root_;
};

BooleanRule parse_boolean_rule(const std::string& text);
// Fully parenthesized; reparses to an equal tree.
std::string render(const BooleanRule& r);

struct BooleanConfig {
    std::string name;
    BooleanRule rule;
    VarList observable;
    VarList hidden;
    std::map<std::string, double> hidden_p1;  // p(U=1) per hidden variable
    ProbTable exact;                          // observable + Z
    SufficientStatistic truth;                // coarsest partition of the observable states
    bool statistic_present = false;           // truth merges states with different X
    bool local_ok = false;                    // some class leaves both X and Z uncertain
};

// X ~ Bern(0.5), p(V1=1|x) = 0.4+0.2x, other variables Bern(0.5) unless overridden.
BooleanConfig boolean_config(const BooleanRule& rule, const VarList& observable,
                             const std::map<std::string, double>& hidden_p1 = {}, const std::string& name = "");

struct BuiltinRule {
    std::string name;
    std::string text;
    VarList observable;
    std::map<std::string, double> hidden_p1;
    bool statistic_expected;
    bool local_expected;
};

const std::vector<BuiltinRule>& builtin_rules();
BooleanConfig builtin_config(const std::string& name);

// One rule per line: `name: observable,list: expression`; '#' starts a comment.
std::vector<BuiltinRule> parse_rule_file(const std::string& text);

}  // namespace suffstat
