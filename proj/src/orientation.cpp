#include "suffstat/orientation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace suffstat {

namespace {

constexpr double kDeterminedEntropy = 1e-12;

bool contains(const VarList& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

std::string join(const VarList& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s + "}";
}

std::string short_num(double v) {
    std::ostringstream o;
    o << v;
    return o.str();
}

std::string edge_name(const std::string& a, const std::string& b) { return a + "-" + b; }

// Lexicographic k-subsets of `pool`, passed to f until it returns true.
template <class F>
bool for_each_subset(const VarList& pool, int k, F&& f) {
    const int n = static_cast<int>(pool.size());
    if (k > n) return false;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        VarList s;
        for (int i : idx) s.push_back(pool[i]);
        if (f(s)) return true;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::size_t space_of(const ProbTable& p, const VarList& vars) {
    std::size_t s = 1;
    for (const auto& v : vars) s *= static_cast<std::size_t>(p.cardinality(v));
    return s;
}

// Tests on the table extended with the statistic as "__theta".
struct ThetaView {
    ProbTable table;

    ThetaView(const SufficientStatistic& t, const ProbTable& test, VarList extra) {
        VarList keep = t.inputs;
        for (auto& e : extra)
            if (!contains(keep, e)) keep.push_back(e);
        table = apply_statistic(t, marginal(test, keep), "__theta");
    }

    bool independent(const std::string& a, const std::string& b, const DiscoveryConfig& cfg) const {
        return independence_test(table, {a}, {b}, {"__theta"}, cfg.ratio_threshold, cfg.absolute_floor).independent;
    }

    bool determined(const std::string& a) const { return entropy(table, {a}, {"__theta"}) <= kDeterminedEntropy; }
};

StatisticVerdict sweep(const DataContext& data, const std::string& x, const std::string& z, const VarList& inputs,
                       const DiscoveryConfig& cfg) {
    IbssiQuery q;
    q.x = x;
    q.z = z;
    q.inputs = inputs;
    q.train = data.train;
    q.test = data.test;
    q.options = cfg.ibssi;
    return ibssi_sweep(q);
}

bool pairwise_adjacent(const MixedGraph& g, const StatisticQuery& q) {
    return g.has_node(q.x) && g.has_node(q.y) && g.has_node(q.z) && g.adjacent(q.x, q.y) && g.adjacent(q.y, q.z) &&
           g.adjacent(q.x, q.z);
}

std::string triple_name(const StatisticQuery& q) { return "(" + q.x + "," + q.y + "," + q.z + ")"; }

}  // namespace

const SepRecord* OrientationState::sep(const std::string& a, const std::string& b) const {
    for (const auto& s : seps)
        if ((s.a == a && s.b == b) || (s.a == b && s.b == a)) return &s;
    return nullptr;
}

bool OrientationState::set_mark(const std::string& other, const std::string& at, Mark m, const std::string& rule,
                                const std::string& detail) {
    Mark cur = graph.mark(other, at);
    if (cur == m) return false;
    if (cur != Mark::Circle) {
        conflicts.push_back(rule + ": " + to_string(m) + " at " + at + " on " + edge_name(other, at) + " blocked by " +
                            to_string(cur) + " (" + detail + ")");
        return false;
    }
    graph.set_mark(other, at, m);
    provenance.push_back({rule, other, at, to_string(m), detail, std::nullopt});
    return true;
}

DiscoveryConfig exact_table_config() {
    DiscoveryConfig c;
    c.ratio_threshold = 1e-9;
    c.absolute_floor = 1e-12;
    return c;
}

AdjacencyResult find_adjacencies(const ProbTable& p, const DiscoveryConfig& cfg) {
    if (cfg.max_conditioning < 0) throw GraphError("max conditioning size must be nonnegative");
    VarList names = p.names();
    std::sort(names.begin(), names.end());
    if (names.size() < 3) throw GraphError("adjacency search needs at least three variables");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(names.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(names.size()); ++j) pairs.emplace_back(i, j);
    std::vector<std::optional<VarList>> found(pairs.size());

#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
        const auto& a = names[pairs[k].first];
        const auto& b = names[pairs[k].second];
        VarList others;
        for (const auto& n : names)
            if (n != a && n != b) others.push_back(n);
        const int top = std::min<int>(cfg.max_conditioning, static_cast<int>(others.size()));
        for (int size = 0; size <= top && !found[k]; ++size)
            for_each_subset(others, size, [&](const VarList& s) {
                if (!independence_test(p, {a}, {b}, s, cfg.ratio_threshold, cfg.absolute_floor).independent)
                    return false;
                found[k] = s;
                return true;
            });
    }

    AdjacencyResult r;
    for (const auto& n : names) r.graph.add_node(n);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& a = names[pairs[k].first];
        const auto& b = names[pairs[k].second];
        if (found[k]) {
            r.seps.push_back({a, b, *found[k], false, std::nullopt, {}});
        } else {
            r.graph.add_edge(a, b, Mark::Circle, Mark::Circle);
        }
    }
    return r;
}

void apply_standard_rules(OrientationState& st) {
    auto& g = st.graph;
    std::set<std::pair<std::string, std::string>> arrows;  // (other, at)
    std::map<std::pair<std::string, std::string>, std::string> arrow_why;
    std::vector<std::pair<Triple, std::string>> noncolliders;
    for (const auto& y : g.node_names()) {
        auto nb = g.neighbours(y);
        std::sort(nb.begin(), nb.end());
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                const auto &a = nb[i], &b = nb[j];
                if (g.adjacent(a, b)) continue;
                const SepRecord* s = st.sep(a, b);
                if (!s) continue;
                const std::string why = "S_" + a + b + "=" + join(s->sep);
                if (contains(s->sep, y)) {
                    noncolliders.push_back({{a, y, b}, why});
                } else {
                    arrows.insert({a, y});
                    arrows.insert({b, y});
                    arrow_why.emplace(std::pair{a, y}, "(" + a + "," + y + "," + b + ") " + why);
                    arrow_why.emplace(std::pair{b, y}, "(" + a + "," + y + "," + b + ") " + why);
                }
            }
    }
    std::set<std::pair<std::string, std::string>> vetoed;
    std::vector<std::pair<Triple, std::string>> keep;
    for (const auto& [t, why] : noncolliders) {
        if (arrows.count({t[0], t[1]}) && arrows.count({t[2], t[1]})) {
            st.conflicts.push_back("collider and noncollider claims on (" + t[0] + "," + t[1] + "," + t[2] +
                                   ") left unoriented");
            vetoed.insert({t[0], t[1]});
            vetoed.insert({t[2], t[1]});
        } else {
            keep.emplace_back(t, why);
        }
    }
    for (const auto& e : arrows)
        if (!vetoed.count(e)) st.set_mark(e.first, e.second, Mark::Arrow, "collider", arrow_why[e]);
    for (const auto& [t, why] : keep) {
        g.add_noncollider(t[0], t[1], t[2]);
        st.provenance.push_back({"noncollider", "", t[1], "noncollider", why, Triple{t[0], t[1], t[2]}});
    }
}

RuleOutcome rule_c_ss(OrientationState& st, const DataContext& data, const StatisticQuery& q,
                      const DiscoveryConfig& cfg) {
    RuleOutcome out;
    if (!pairwise_adjacent(st.graph, q)) {
        out.diagnostic = "collider-ss " + triple_name(q) + ": triple is not pairwise adjacent";
        return out;
    }
    if (contains(q.inputs, q.y) || contains(q.inputs, q.z) || !contains(q.inputs, q.x)) {
        out.diagnostic = "collider-ss " + triple_name(q) + ": input set must contain x and exclude y, z";
        return out;
    }
    if (space_of(data.train, q.inputs) < 3) {
        out.diagnostic = "collider-ss " + triple_name(q) + ": input too small to compress";
        return out;
    }
    out.verdict = sweep(data, q.x, q.z, q.inputs, cfg);
    if (!out.verdict->accepted) {
        out.diagnostic = "collider-ss " + triple_name(q) + ": no accepted statistic";
        return out;
    }
    ThetaView v(*out.verdict->statistic, data.test, {q.x, q.y, q.z});
    if (v.independent(q.x, q.y, cfg) || v.independent(q.y, q.z, cfg) || !v.independent(q.x, q.z, cfg)) {
        out.diagnostic = "collider-ss " + triple_name(q) + ": dependence pattern given theta does not match";
        return out;
    }
    const std::string why = "theta over " + join(q.inputs) + " at beta'=" + short_num(out.verdict->beta_prime);
    st.set_mark(q.x, q.y, Mark::Arrow, "collider-ss", why);
    st.set_mark(q.z, q.y, Mark::Arrow, "collider-ss", why);
    st.stat_seps.push_back({q.x, q.z, {}, true, out.verdict->statistic, q.inputs});
    st.stat_colliders.push_back({q});
    out.applied = true;
    return out;
}

RuleOutcome rule_nc_ss(OrientationState& st, const DataContext& data, const StatisticQuery& q,
                       const DiscoveryConfig& cfg) {
    RuleOutcome out;
    const std::string tag = "noncollider-ss " + triple_name(q);
    if (!pairwise_adjacent(st.graph, q)) {
        out.diagnostic = tag + ": triple is not pairwise adjacent";
        return out;
    }
    if (!contains(q.inputs, q.y) || contains(q.inputs, q.z) || !contains(q.inputs, q.x)) {
        out.diagnostic = tag + ": input set must contain x and y and exclude z";
        return out;
    }
    if (space_of(data.train, q.inputs) < 3) {
        out.diagnostic = tag + ": input too small to compress";
        return out;
    }
    out.verdict = sweep(data, q.x, q.z, q.inputs, cfg);
    if (!out.verdict->accepted ||
        !ThetaView(*out.verdict->statistic, data.test, {q.x, q.z}).independent(q.x, q.z, cfg)) {
        out.diagnostic = tag + ": no accepted statistic separating x and z with y included";
        return out;
    }
    // a statistic that either keeps the dependence or determines x does not count as separating
    auto separates = [&](const StatisticVerdict& v, const std::string& target) {
        if (!v.accepted) return false;
        ThetaView tv(*v.statistic, data.test, {q.x, target});
        return tv.independent(q.x, target, cfg) && !tv.determined(q.x);
    };
    VarList reduced;
    for (const auto& i : q.inputs)
        if (i != q.y) reduced.push_back(i);
    if (space_of(data.train, reduced) >= 3 && separates(sweep(data, q.x, q.z, reduced, cfg), q.z)) {
        out.diagnostic = tag + ": x and z also separated without y";
        return out;
    }
    VarList rest;
    for (const auto& i : reduced)
        if (i != q.x) rest.push_back(i);
    const int top = std::min<int>(static_cast<int>(rest.size()), std::max(0, cfg.max_subset_size - 1));
    for (int size = 0; size <= top; ++size) {
        bool hit = for_each_subset(rest, size, [&](const VarList& s) {
            VarList in{q.x};
            in.insert(in.end(), s.begin(), s.end());
            if (space_of(data.train, in) < 3) return false;
            return separates(sweep(data, q.x, q.y, in, cfg), q.y);
        });
        if (hit) {
            out.diagnostic = tag + ": x and y separated by a statistic without y";
            return out;
        }
    }
    st.graph.add_noncollider(q.x, q.y, q.z);
    const std::string why = "theta over " + join(q.inputs) + " at beta'=" + short_num(out.verdict->beta_prime);
    st.provenance.push_back({"noncollider-ss", "", q.y, "noncollider", why, Triple{q.x, q.y, q.z}});
    st.stat_seps.push_back({q.x, q.z, {}, true, out.verdict->statistic, q.inputs});
    out.applied = true;
    return out;
}

int apply_propagation(OrientationState& st) {
    auto& g = st.graph;
    std::set<std::string> warned;
    int passes = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        ++passes;
        const auto names = g.node_names();
        // away from a collider, using separating-set membership
        for (const auto& y : names) {
            auto nb = g.neighbours(y);
            std::sort(nb.begin(), nb.end());
            for (std::size_t i = 0; i < nb.size(); ++i)
                for (std::size_t j = i + 1; j < nb.size(); ++j) {
                    const auto &a = nb[i], &b = nb[j];
                    if (g.adjacent(a, b) || g.mark(a, y) != Mark::Arrow || g.mark(b, y) != Mark::Arrow) continue;
                    const SepRecord* s = st.sep(a, b);
                    if (!s) continue;
                    for (const auto& w : nb)
                        if (w != a && w != b && contains(s->sep, w))
                            changed |= st.set_mark(w, y, Mark::Arrow, "away-from-collider",
                                                   "(" + a + "," + y + "," + b + ") with " + w + " in S_" + a + b);
                }
        }
        // statistic counterpart, for colliders found between adjacent endpoints
        for (const auto& c : st.stat_colliders) {
            const auto& q = c.query;
            if (g.mark(q.x, q.y) != Mark::Arrow || g.mark(q.z, q.y) != Mark::Arrow) continue;
            if (!q.arguments && !q.conditioning) {
                std::string w = "away-from-collider-ss skipped for " + triple_name(q) + ": no argument metadata";
                if (warned.insert(w).second &&
                    std::find(st.warnings.begin(), st.warnings.end(), w) == st.warnings.end())
                    st.warnings.push_back(w);
                continue;
            }
            for (const auto& w : g.neighbours(q.y)) {
                if (w == q.x || w == q.z) continue;
                bool in_cond = q.conditioning && contains(*q.conditioning, w);
                bool is_arg = q.arguments && contains(*q.arguments, w);
                if (in_cond || is_arg)
                    changed |= st.set_mark(w, q.y, Mark::Arrow, "away-from-collider-ss",
                                           triple_name(q) + " with " + w + (in_cond ? " conditioned" : " an argument"));
            }
        }
        // directed path a -> ... -> b plus an edge a *-* b
        for (const auto& e : g.edges()) {
            for (int dir = 0; dir < 2; ++dir) {
                const std::string& a = dir ? e.b : e.a;
                const std::string& b = dir ? e.a : e.b;
                if (g.mark(a, b) != Mark::Circle) continue;
                const int ia = g.id(a), ib = g.id(b);
                std::vector<char> seen(g.num_nodes(), 0);
                std::vector<int> stack{ia};
                seen[ia] = 1;
                bool reach = false;
                while (!stack.empty() && !reach) {
                    int u = stack.back();
                    stack.pop_back();
                    for (int v : g.neighbours(u)) {
                        if (seen[v] || !g.directed(u, v)) continue;
                        if (u == ia && v == ib) continue;
                        if (v == ib) {
                            reach = true;
                            break;
                        }
                        seen[v] = 1;
                        stack.push_back(v);
                    }
                }
                if (reach) changed |= st.set_mark(a, b, Mark::Arrow, "directed-path", "path from " + a + " to " + b);
            }
        }
        // x *-> y *-* z with y a noncollider on (x, y, z): y -> z
        for (const auto& t : std::set<Triple>(g.noncolliders())) {
            for (int dir = 0; dir < 2; ++dir) {
                const std::string& x = dir ? t[2] : t[0];
                const std::string& z = dir ? t[0] : t[2];
                const std::string& y = t[1];
                if (!g.adjacent(x, y) || !g.adjacent(y, z) || g.mark(x, y) != Mark::Arrow) continue;
                const std::string why = x + " *-> " + y + " with noncollider (" + t[0] + "," + y + "," + t[2] + ")";
                changed |= st.set_mark(z, y, Mark::Tail, "noncollider-propagation", why);
                changed |= st.set_mark(y, z, Mark::Arrow, "noncollider-propagation", why);
            }
        }
    }
    return passes;
}

DiscoveryResult ci_ss(const DataContext& data, const DiscoveryConfig& cfg, const std::vector<StatisticQuery>& queries) {
    DiscoveryResult r;
    AdjacencyResult adj = find_adjacencies(data.train, cfg);
    r.state.graph = std::move(adj.graph);
    r.state.seps = std::move(adj.seps);
    apply_standard_rules(r.state);
    if (cfg.use_statistics) {
        for (const auto& q : queries) {
            RuleOutcome o = contains(q.inputs, q.y) ? rule_nc_ss(r.state, data, q, cfg) : rule_c_ss(r.state, data, q, cfg);
            if (!o.applied) r.state.diagnostics.push_back(o.diagnostic);
        }
    }
    r.propagation_passes = apply_propagation(r.state);
    return r;
}

nlohmann::json to_json(const SepRecord& s) {
    nlohmann::json j{{"a", s.a}, {"b", s.b}, {"sep", s.sep}, {"statistic_based", s.statistic_based}};
    if (s.statistic) {
        j["statistic"] = to_json(*s.statistic);
        j["s_psi"] = s.s_psi;
    }
    return j;
}

nlohmann::json to_json(const DiscoveryResult& r) {
    const auto& st = r.state;
    nlohmann::json j;
    j["graph"] = to_json(st.graph);
    j["rendered"] = render(st.graph);
    j["separations"] = nlohmann::json::array();
    for (const auto& s : st.seps) j["separations"].push_back(to_json(s));
    j["statistic_separations"] = nlohmann::json::array();
    for (const auto& s : st.stat_seps) j["statistic_separations"].push_back(to_json(s));
    j["provenance"] = nlohmann::json::array();
    for (const auto& e : st.provenance) {
        nlohmann::json p{{"rule", e.rule}, {"mark", e.mark}, {"at", e.at}, {"detail", e.detail}};
        if (!e.other.empty()) p["other"] = e.other;
        if (e.triple) p["triple"] = *e.triple;
        j["provenance"].push_back(p);
    }
    j["conflicts"] = st.conflicts;
    j["warnings"] = st.warnings;
    j["diagnostics"] = st.diagnostics;
    j["propagation_passes"] = r.propagation_passes;
    return j;
}

SoundnessReport check_soundness(const MixedGraph& learned, const MixedGraph& truth, const VarList& selection) {
    SoundnessReport rep;
    std::vector<int> sel;
    for (const auto& s : selection) sel.push_back(truth.id(s));
    auto ancestor_of = [&](const std::string& u, std::vector<std::string> targets) {
        std::vector<int> of = sel;
        for (const auto& t : targets) of.push_back(truth.id(t));
        return truth.ancestors_mask(of)[truth.id(u)] != 0;
    };
    for (const auto& e : learned.edges()) {
        for (int dir = 0; dir < 2; ++dir) {
            const std::string& other = dir ? e.b : e.a;
            const std::string& at = dir ? e.a : e.b;
            Mark m = dir ? e.mark_a : e.mark_b;
            if (m == Mark::Circle) continue;
            ++rep.marks_checked;
            bool anc = ancestor_of(at, {other});
            if (m == Mark::Arrow && anc)
                rep.violations.push_back("arrowhead at " + at + " on " + edge_name(other, at) + " but " + at +
                                         " is an ancestor of " + other + (sel.empty() ? "" : " or the selection"));
            if (m == Mark::Tail && !anc)
                rep.violations.push_back("tail at " + at + " on " + edge_name(other, at) + " but " + at +
                                         " is not an ancestor of " + other);
        }
    }
    for (const auto& t : learned.noncolliders()) {
        ++rep.marks_checked;
        if (!ancestor_of(t[1], {t[0], t[2]}))
            rep.violations.push_back("noncollider mark at " + t[1] + " on (" + t[0] + "," + t[1] + "," + t[2] +
                                     ") but it is a collider in the generating graph");
    }
    return rep;
}

}  // namespace suffstat
