#include "suffstat/boolean_rule.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "suffstat/ibssi.hpp"
#include "suffstat/simgen.hpp"

namespace suffstat {

bool RuleNode::operator==(const RuleNode& o) const {
    if (kind != o.kind || name != o.name || summands != o.summands || children.size() != o.children.size())
        return false;
    if (kind == Kind::Compare && (op != o.op || bound != o.bound)) return false;
    for (std::size_t i = 0; i < children.size(); ++i)
        if (!(*children[i] == *o.children[i])) return false;
    return true;
}

namespace {

struct Token {
    enum class T { Ident, Int, And, Or, Not, LParen, RParen, Plus, Gt, Ge, Eq, End } t;
    std::string text;
    std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            std::string w = s.substr(start, i - start);
            Token::T t = w == "AND" ? Token::T::And : w == "OR" ? Token::T::Or : w == "NOT" ? Token::T::Not : Token::T::Ident;
            out.push_back({t, w, start});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            out.push_back({Token::T::Int, s.substr(start, i - start), start});
        } else if (c == '(') {
            out.push_back({Token::T::LParen, "(", i++});
        } else if (c == ')') {
            out.push_back({Token::T::RParen, ")", i++});
        } else if (c == '+') {
            out.push_back({Token::T::Plus, "+", i++});
        } else if (c == '=') {
            out.push_back({Token::T::Eq, "=", i++});
        } else if (c == '>') {
            if (i + 1 < s.size() && s[i + 1] == '=') {
                out.push_back({Token::T::Ge, ">=", i});
                i += 2;
            } else {
                out.push_back({Token::T::Gt, ">", i++});
            }
        } else {
            throw RuleSyntaxError(std::string("unexpected character '") + c + "'", i);
        }
    }
    out.push_back({Token::T::End, "", s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(const std::string& s) : toks_(lex(s)) {}

    RulePtr parse() {
        RulePtr e = expr();
        if (peek().t != Token::T::End) throw RuleSyntaxError("unexpected '" + peek().text + "'", peek().pos);
        return e;
    }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& take() { return toks_[i_++]; }
    bool accept(Token::T t) {
        if (peek().t != t) return false;
        ++i_;
        return true;
    }

    RulePtr expr() {
        RulePtr left = term();
        while (accept(Token::T::Or)) left = binary(RuleNode::Kind::Or, left, term());
        return left;
    }

    RulePtr term() {
        RulePtr left = factor();
        while (accept(Token::T::And)) left = binary(RuleNode::Kind::And, left, factor());
        return left;
    }

    RulePtr factor() {
        const Token& t = peek();
        if (accept(Token::T::Not)) {
            auto n = std::make_shared<RuleNode>();
            n->kind = RuleNode::Kind::Not;
            n->children.push_back(factor());
            return n;
        }
        if (accept(Token::T::LParen)) {
            RulePtr e = expr();
            if (!accept(Token::T::RParen)) throw RuleSyntaxError("expected ')'", peek().pos);
            return e;
        }
        if (t.t != Token::T::Ident) {
            throw RuleSyntaxError(t.t == Token::T::End ? "unexpected end of rule" : "unexpected '" + t.text + "'",
                                  t.pos);
        }
        std::vector<std::string> names{take().text};
        while (accept(Token::T::Plus)) {
            if (peek().t != Token::T::Ident) throw RuleSyntaxError("expected variable after '+'", peek().pos);
            names.push_back(take().text);
        }
        const Token& op = peek();
        if (op.t != Token::T::Gt && op.t != Token::T::Ge && op.t != Token::T::Eq) {
            if (names.size() > 1) throw RuleSyntaxError("sum needs a comparison", op.pos);
            auto n = std::make_shared<RuleNode>();
            n->kind = RuleNode::Kind::Var;
            n->name = names[0];
            return n;
        }
        ++i_;
        if (peek().t != Token::T::Int) throw RuleSyntaxError("expected integer", peek().pos);
        auto n = std::make_shared<RuleNode>();
        n->kind = RuleNode::Kind::Compare;
        n->summands = std::move(names);
        n->op = op.t == Token::T::Gt ? RuleNode::Op::Greater
                : op.t == Token::T::Ge ? RuleNode::Op::GreaterEqual
                                       : RuleNode::Op::Equal;
        n->bound = std::stoi(take().text);
        return n;
    }

    static RulePtr binary(RuleNode::Kind k, RulePtr a, RulePtr b) {
        auto n = std::make_shared<RuleNode>();
        n->kind = k;
        n->children = {std::move(a), std::move(b)};
        return n;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

void collect(const RuleNode& n, std::vector<std::string>& out) {
    auto add = [&](const std::string& v) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    if (n.kind == RuleNode::Kind::Var) add(n.name);
    for (const auto& s : n.summands) add(s);
    for (const auto& c : n.children) collect(*c, out);
}

int eval_node(const RuleNode& n, const std::map<std::string, int>& a) {
    auto value = [&](const std::string& v) {
        auto it = a.find(v);
        if (it == a.end()) throw RuleBindError("no value for variable " + v);
        return it->second;
    };
    switch (n.kind) {
        case RuleNode::Kind::Var: return value(n.name) != 0;
        case RuleNode::Kind::Not: return !eval_node(*n.children[0], a);
        case RuleNode::Kind::And: return eval_node(*n.children[0], a) && eval_node(*n.children[1], a);
        case RuleNode::Kind::Or: return eval_node(*n.children[0], a) || eval_node(*n.children[1], a);
        case RuleNode::Kind::Compare: {
            int s = 0;
            for (const auto& v : n.summands) s += value(v);
            return n.op == RuleNode::Op::Greater        ? s > n.bound
                   : n.op == RuleNode::Op::GreaterEqual ? s >= n.bound
                                                        : s == n.bound;
        }
    }
    return 0;
}

std::string render_node(const RuleNode& n) {
    switch (n.kind) {
        case RuleNode::Kind::Var: return n.name;
        case RuleNode::Kind::Not: return "(NOT " + render_node(*n.children[0]) + ")";
        case RuleNode::Kind::And: return "(" + render_node(*n.children[0]) + " AND " + render_node(*n.children[1]) + ")";
        case RuleNode::Kind::Or: return "(" + render_node(*n.children[0]) + " OR " + render_node(*n.children[1]) + ")";
        case RuleNode::Kind::Compare: {
            std::string s = "(";
            for (std::size_t i = 0; i < n.summands.size(); ++i) s += (i ? " + " : "") + n.summands[i];
            s += n.op == RuleNode::Op::Greater ? " > " : n.op == RuleNode::Op::GreaterEqual ? " >= " : " = ";
            return s + std::to_string(n.bound) + ")";
        }
    }
    return "";
}

}  // namespace

std::vector<std::string> BooleanRule::variables() const {
    std::vector<std::string> out;
    if (root_) collect(*root_, out);
    return out;
}

int BooleanRule::eval(const std::map<std::string, int>& a) const {
    if (!root_) throw RuleBindError("empty rule");
    return eval_node(*root_, a);
}

void BooleanRule::bind(const std::vector<std::string>& declared) const {
    for (const auto& v : variables())
        if (std::find(declared.begin(), declared.end(), v) == declared.end())
            throw RuleBindError("undeclared variable " + v);
}

bool BooleanRule::operator==(const BooleanRule& o) const {
    if (!root_ || !o.root_) return !root_ && !o.root_;
    return *root_ == *o.root_;
}

BooleanRule parse_boolean_rule(const std::string& text) { return BooleanRule(Parser(text).parse()); }

std::string render(const BooleanRule& r) { return r.empty() ? "" : render_node(r.root()); }

BooleanConfig boolean_config(const BooleanRule& rule, const VarList& observable,
                             const std::map<std::string, double>& hidden_p1, const std::string& name) {
    const auto vars = rule.variables();
    if (observable.size() < 2 || observable.size() > 3) throw RuleBindError("observable set must have 2 or 3 variables");
    rule.bind(vars);
    for (const auto& o : observable)
        if (std::find(vars.begin(), vars.end(), o) == vars.end()) throw RuleBindError("observable " + o + " not in rule");
    if (std::find(observable.begin(), observable.end(), "X") == observable.end())
        throw RuleBindError("observable set must contain X");

    BooleanConfig c;
    c.name = name;
    c.rule = rule;
    c.observable = observable;
    for (const auto& v : vars)
        if (std::find(observable.begin(), observable.end(), v) == observable.end()) c.hidden.push_back(v);
    for (const auto& h : c.hidden) c.hidden_p1[h] = 0.5;
    for (const auto& [k, p] : hidden_p1) {
        if (!c.hidden_p1.count(k)) throw RuleBindError("marginal given for non-hidden variable " + k);
        if (!(p > 0.0 && p < 1.0)) throw RuleBindError("hidden marginal must lie in (0,1)");
        c.hidden_p1[k] = p;
    }

    std::vector<VariableSpec> spec;
    for (const auto& o : observable) spec.push_back({o, 2});
    spec.push_back({"Z", 2});
    std::vector<double> mass(state_space_size(spec), 0.0);
    const std::size_t nv = vars.size();
    for (std::size_t bits = 0; bits < (std::size_t{1} << nv); ++bits) {
        std::map<std::string, int> a;
        for (std::size_t i = 0; i < nv; ++i) a[vars[i]] = static_cast<int>((bits >> i) & 1u);
        double p = 1.0;
        for (const auto& v : vars) {
            double p1 = 0.5;
            if (v == "V1" && a.count("X")) p1 = 0.4 + 0.2 * a["X"];
            else if (auto it = c.hidden_p1.find(v); it != c.hidden_p1.end()) p1 = it->second;
            p *= a[v] ? p1 : 1.0 - p1;
        }
        std::size_t flat = 0;
        for (const auto& o : observable) flat = flat * 2 + static_cast<std::size_t>(a[o]);
        flat = flat * 2 + static_cast<std::size_t>(rule.eval(a));
        mass[flat] += p;
    }
    c.exact = ProbTable(spec, mass);
    c.truth = coarsest_sufficient_partition(c.exact, observable, "Z");
    c.statistic_present = merges_source_states(c.truth, "X");
    c.local_ok = c.statistic_present && local_criteria(c.truth, c.exact, "X", "Z");
    return c;
}

const std::vector<BuiltinRule>& builtin_rules() {
    static const std::vector<BuiltinRule> rules{
        {"or", "(X OR V1) AND U1", {"X", "V1"}, {}, true, true},
        {"and", "(X AND V1) OR U1", {"X", "V1"}, {}, true, true},
        {"threshold_or", "(X + V1 > 0) AND U1", {"X", "V1"}, {}, true, true},
        {"threshold_and", "(X + V1 > 1) OR U1", {"X", "V1"}, {}, true, true},
        {"one_plus_x_times_v1", "V1 AND (X OR U1)", {"X", "V1"}, {}, true, false},
        {"equal_hidden", "(X AND U1) OR (V1 AND U2)", {"X", "V1"}, {{"U1", 0.5}, {"U2", 0.5}}, true, true},
        {"unequal_hidden", "(X AND U1) OR (V1 AND U2)", {"X", "V1"}, {{"U1", 0.5}, {"U2", 0.75}}, false, false},
        {"free_and_or", "X AND (V1 OR U1)", {"X", "V1"}, {}, false, false},
        {"free_two_terms", "(X AND U1) OR (V1 AND U2 AND U3)", {"X", "V1"}, {}, false, false},
        {"free_or_and", "(X OR U1) AND (V1 OR U2 OR U3)", {"X", "V1"}, {}, false, false},
    };
    return rules;
}

BooleanConfig builtin_config(const std::string& name) {
    for (const auto& r : builtin_rules())
        if (r.name == name) return boolean_config(parse_boolean_rule(r.text), r.observable, r.hidden_p1, r.name);
    throw RuleBindError("unknown built-in rule " + name);
}

std::vector<BuiltinRule> parse_rule_file(const std::string& text) {
    std::vector<BuiltinRule> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        auto c1 = line.find(':');
        auto c2 = c1 == std::string::npos ? c1 : line.find(':', c1 + 1);
        if (c2 == std::string::npos) throw RuleBindError("rule file line " + std::to_string(lineno) + ": expected name: vars: rule");
        BuiltinRule r;
        r.name = trim(line.substr(0, c1));
        std::istringstream vs(line.substr(c1 + 1, c2 - c1 - 1));
        std::string v;
        while (std::getline(vs, v, ',')) r.observable.push_back(trim(v));
        r.text = trim(line.substr(c2 + 1));
        parse_boolean_rule(r.text);
        BooleanConfig c = boolean_config(parse_boolean_rule(r.text), r.observable, {}, r.name);
        r.statistic_expected = c.statistic_present;
        r.local_expected = c.local_ok;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace suffstat
