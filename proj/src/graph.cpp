#include "suffstat/graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace suffstat {

std::string to_string(Mark m) {
    switch (m) {
        case Mark::Tail: return "tail";
        case Mark::Arrow: return "arrow";
        case Mark::Circle: return "circle";
    }
    return "?";
}

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Observable: return "observable";
        case NodeKind::Latent: return "latent";
        case NodeKind::Statistic: return "statistic";
    }
    return "?";
}

Mark mark_from_string(const std::string& s) {
    if (s == "tail") return Mark::Tail;
    if (s == "arrow") return Mark::Arrow;
    if (s == "circle") return Mark::Circle;
    throw GraphError("unknown mark " + s);
}

NodeKind kind_from_string(const std::string& s) {
    if (s == "observable") return NodeKind::Observable;
    if (s == "latent") return NodeKind::Latent;
    if (s == "statistic") return NodeKind::Statistic;
    throw GraphError("unknown node kind " + s);
}

int MixedGraph::add_node(const std::string& name, NodeKind kind) {
    if (name.empty()) throw GraphError("empty node name");
    if (has_node(name)) throw GraphError("duplicate node " + name);
    names_.push_back(name);
    kinds_.push_back(kind);
    for (auto& row : adj_) row.push_back(0);
    for (auto& row : marks_) row.push_back(0);
    adj_.emplace_back(names_.size(), 0);
    marks_.emplace_back(names_.size(), 0);
    return static_cast<int>(names_.size()) - 1;
}

bool MixedGraph::has_node(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

int MixedGraph::id(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw GraphError("unknown node " + name);
    return static_cast<int>(it - names_.begin());
}

void MixedGraph::add_edge(const std::string& a, const std::string& b, Mark at_a, Mark at_b) {
    int i = id(a), j = id(b);
    if (i == j) throw GraphError("self edge at " + a);
    if (adj_[i][j]) throw GraphError("duplicate edge " + a + " - " + b);
    adj_[i][j] = adj_[j][i] = 1;
    marks_[j][i] = static_cast<char>(at_a);
    marks_[i][j] = static_cast<char>(at_b);
}

void MixedGraph::remove_edge(const std::string& a, const std::string& b) {
    int i = id(a), j = id(b);
    if (!adj_[i][j]) throw GraphError("no edge " + a + " - " + b);
    adj_[i][j] = adj_[j][i] = 0;
    marks_[i][j] = marks_[j][i] = 0;
}

bool MixedGraph::adjacent(const std::string& a, const std::string& b) const { return adj_[id(a)][id(b)] != 0; }

Mark MixedGraph::mark(const std::string& other, const std::string& at) const {
    int i = id(other), j = id(at);
    if (!adj_[i][j]) throw GraphError("no edge " + other + " - " + at);
    return mark(i, j);
}

void MixedGraph::set_mark(const std::string& other, const std::string& at, Mark m) {
    int i = id(other), j = id(at);
    if (!adj_[i][j]) throw GraphError("no edge " + other + " - " + at);
    set_mark(i, j, m);
}

std::vector<int> MixedGraph::neighbours(int v) const {
    std::vector<int> out;
    for (int u = 0; u < num_nodes(); ++u)
        if (adj_[v][u]) out.push_back(u);
    return out;
}

std::vector<std::string> MixedGraph::neighbours(const std::string& v) const {
    std::vector<std::string> out;
    for (int u : neighbours(id(v))) out.push_back(names_[u]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Edge> MixedGraph::edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < num_nodes(); ++i)
        for (int j = i + 1; j < num_nodes(); ++j)
            if (adj_[i][j]) out.push_back({names_[i], names_[j], mark(j, i), mark(i, j)});
    return out;
}

std::size_t MixedGraph::num_edges() const { return edges().size(); }

void MixedGraph::add_noncollider(const std::string& a, const std::string& y, const std::string& b) {
    id(a), id(y), id(b);
    if (a == b || a == y || b == y) throw GraphError("degenerate noncollider triple");
    noncolliders_.insert(a < b ? Triple{a, y, b} : Triple{b, y, a});
}

bool MixedGraph::has_noncollider(const std::string& a, const std::string& y, const std::string& b) const {
    return noncolliders_.count(a < b ? Triple{a, y, b} : Triple{b, y, a}) > 0;
}

std::vector<char> MixedGraph::descendants_mask(int v) const {
    std::vector<char> seen(num_nodes(), 0);
    std::vector<int> stack{v};
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int w = 0; w < num_nodes(); ++w)
            if (!seen[w] && directed(u, w)) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    return seen;
}

std::vector<char> MixedGraph::ancestors_mask(const std::vector<int>& of) const {
    std::vector<char> seen(num_nodes(), 0);
    std::vector<int> stack;
    for (int v : of)
        if (!seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
        }
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int w = 0; w < num_nodes(); ++w)
            if (!seen[w] && directed(w, u)) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    return seen;
}

bool MixedGraph::has_directed_cycle(bool skip_statistics) const {
    const int n = num_nodes();
    std::vector<int> state(n, 0);
    // iterative DFS with colour marking
    for (int s = 0; s < n; ++s) {
        if (state[s] || (skip_statistics && kinds_[s] == NodeKind::Statistic)) continue;
        std::vector<std::pair<int, int>> stack{{s, 0}};
        state[s] = 1;
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            if (next >= n) {
                state[u] = 2;
                stack.pop_back();
                continue;
            }
            int w = next++;
            if (!directed(u, w)) continue;
            if (skip_statistics && kinds_[w] == NodeKind::Statistic) continue;
            if (state[w] == 1) return true;
            if (state[w] == 0) {
                state[w] = 1;
                stack.push_back({w, 0});
            }
        }
    }
    return false;
}

bool MixedGraph::operator==(const MixedGraph& o) const {
    if (num_nodes() != o.num_nodes()) return false;
    for (int i = 0; i < num_nodes(); ++i) {
        if (!o.has_node(names_[i]) || o.kind(names_[i]) != kinds_[i]) return false;
    }
    for (int i = 0; i < num_nodes(); ++i)
        for (int j = 0; j < num_nodes(); ++j) {
            int oi = o.id(names_[i]), oj = o.id(names_[j]);
            if (adj_[i][j] != o.adj_[oi][oj]) return false;
            if (adj_[i][j] && marks_[i][j] != o.marks_[oi][oj]) return false;
        }
    return noncolliders_ == o.noncolliders_;
}

bool d_separated(const MixedGraph& g, const std::vector<std::string>& a, const std::vector<std::string>& b,
                 const std::vector<std::string>& s) {
    const int n = g.num_nodes();
    std::vector<char> in_a(n, 0), in_b(n, 0), in_s(n, 0);
    for (const auto& x : a) in_a[g.id(x)] = 1;
    for (const auto& x : b) in_b[g.id(x)] = 1;
    std::vector<int> s_ids;
    for (const auto& x : s) {
        in_s[g.id(x)] = 1;
        s_ids.push_back(g.id(x));
    }
    for (int v = 0; v < n; ++v)
        if ((in_a[v] && in_b[v]) || (in_a[v] && in_s[v]) || (in_b[v] && in_s[v]))
            throw GraphError("d_separated: node sets must be disjoint");
    const auto anc_s = g.ancestors_mask(s_ids);

    // state = node * 2 + (arrived through an arrowhead at node)
    std::vector<char> visited(2 * n, 0);
    std::vector<int> stack;
    for (int v = 0; v < n; ++v) {
        if (!in_a[v]) continue;
        for (int w : g.neighbours(v)) {
            int st = 2 * w + (g.mark(v, w) == Mark::Arrow ? 1 : 0);
            if (!visited[st]) {
                visited[st] = 1;
                stack.push_back(st);
            }
        }
    }
    while (!stack.empty()) {
        int st = stack.back();
        stack.pop_back();
        int v = st / 2;
        bool into = st % 2;
        if (in_b[v]) return false;
        for (int w : g.neighbours(v)) {
            bool collider = into && g.mark(w, v) == Mark::Arrow;
            bool pass = collider ? anc_s[v] != 0 : !in_s[v];
            if (!pass) continue;
            int nst = 2 * w + (g.mark(v, w) == Mark::Arrow ? 1 : 0);
            if (!visited[nst]) {
                visited[nst] = 1;
                stack.push_back(nst);
            }
        }
    }
    return true;
}

MixedGraph augment(const MixedGraph& g, const std::vector<StatisticNodeSpec>& stats) {
    MixedGraph out = g;
    for (const auto& st : stats) {
        if (st.arguments.empty()) throw GraphError("statistic " + st.name + " has no arguments");
        if (st.hosts.empty()) throw GraphError("statistic " + st.name + " has no hosts");
        if (!st.map.empty()) {
            std::size_t space = 1;
            if (st.argument_cardinalities.size() != st.arguments.size())
                throw GraphError("statistic " + st.name + ": cardinalities do not match arguments");
            for (int c : st.argument_cardinalities) space *= static_cast<std::size_t>(c);
            if (st.map.size() != space) throw GraphError("statistic " + st.name + ": map is not total");
        }
        for (const auto& h : st.hosts)
            for (const auto& arg : st.arguments)
                if (!g.has_node(arg) || !g.has_node(h) || !g.adjacent(arg, h) || !g.directed(g.id(arg), g.id(h)))
                    throw GraphError("host " + h + " does not list argument " + arg + " as a parent");
        for (const auto& [arg, h] : st.removed_direct) {
            bool known = std::find(st.arguments.begin(), st.arguments.end(), arg) != st.arguments.end() &&
                         std::find(st.hosts.begin(), st.hosts.end(), h) != st.hosts.end();
            if (!known) throw GraphError("removal pair " + arg + "," + h + " is not an (argument, host) pair");
        }
        out.add_node(st.name, NodeKind::Statistic);
        for (const auto& arg : st.arguments) out.add_directed(arg, st.name);
        for (const auto& h : st.hosts) out.add_directed(st.name, h);
        for (const auto& [arg, h] : st.removed_direct)
            if (out.adjacent(arg, h)) out.remove_edge(arg, h);
    }
    return out;
}

MixedGraph strip_statistics(const MixedGraph& g, const std::vector<StatisticNodeSpec>& stats) {
    std::vector<char> drop(g.num_nodes(), 0);
    for (const auto& st : stats) drop[g.id(st.name)] = 1;
    MixedGraph out;
    for (int i = 0; i < g.num_nodes(); ++i)
        if (!drop[i]) out.add_node(g.name(i), g.kind(i));
    for (const auto& e : g.edges())
        if (!drop[g.id(e.a)] && !drop[g.id(e.b)]) out.add_edge(e.a, e.b, e.mark_a, e.mark_b);
    for (const auto& st : stats)
        for (const auto& [arg, h] : st.removed_direct)
            if (!out.adjacent(arg, h)) out.add_directed(arg, h);
    for (const auto& t : g.noncolliders())
        if (!drop[g.id(t[0])] && !drop[g.id(t[1])] && !drop[g.id(t[2])]) out.add_noncollider(t[0], t[1], t[2]);
    return out;
}

MixedGraph intervene(const MixedGraph& g, const std::vector<std::string>& targets) {
    MixedGraph out = g;
    for (const auto& t : targets) {
        int v = out.id(t);
        for (int u : out.neighbours(v))
            if (out.mark(u, v) == Mark::Arrow) out.remove_edge(out.name(u), t);
    }
    return out;
}

namespace {

int mark_rank(Mark m) {
    switch (m) {
        case Mark::Arrow: return 2;
        case Mark::Circle: return 1;
        case Mark::Tail: return 0;
    }
    return 0;
}

}  // namespace

std::string render(const MixedGraph& g) {
    std::vector<std::string> lines;
    for (auto e : g.edges()) {
        bool swap = mark_rank(e.mark_a) > mark_rank(e.mark_b) ||
                    (mark_rank(e.mark_a) == mark_rank(e.mark_b) && e.b < e.a);
        if (swap) {
            std::swap(e.a, e.b);
            std::swap(e.mark_a, e.mark_b);
        }
        char left = e.mark_a == Mark::Arrow ? '<' : e.mark_a == Mark::Circle ? 'o' : '-';
        char right = e.mark_b == Mark::Arrow ? '>' : e.mark_b == Mark::Circle ? 'o' : '-';
        lines.push_back(e.a + " " + left + "-" + right + " " + e.b);
    }
    std::sort(lines.begin(), lines.end());
    std::vector<std::string> nc;
    for (const auto& t : g.noncolliders()) nc.push_back(t[0] + " *-(" + t[1] + ")-* " + t[2] + " underlined");
    std::sort(nc.begin(), nc.end());
    std::ostringstream out;
    for (const auto& l : lines) out << l << "\n";
    for (const auto& l : nc) out << l << "\n";
    return out.str();
}

nlohmann::json to_json(const MixedGraph& g) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (int i = 0; i < g.num_nodes(); ++i) j["nodes"].push_back({{"name", g.name(i)}, {"kind", to_string(g.kind(i))}});
    j["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges())
        j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"mark_a", to_string(e.mark_a)}, {"mark_b", to_string(e.mark_b)}});
    j["noncolliders"] = nlohmann::json::array();
    for (const auto& t : g.noncolliders()) j["noncolliders"].push_back({t[0], t[1], t[2]});
    return j;
}

MixedGraph graph_from_json(const nlohmann::json& j) {
    MixedGraph g;
    for (const auto& n : j.at("nodes"))
        g.add_node(n.at("name").get<std::string>(),
                   n.contains("kind") ? kind_from_string(n.at("kind").get<std::string>()) : NodeKind::Observable);
    for (const auto& e : j.at("edges"))
        g.add_edge(e.at("a").get<std::string>(), e.at("b").get<std::string>(),
                   mark_from_string(e.at("mark_a").get<std::string>()),
                   mark_from_string(e.at("mark_b").get<std::string>()));
    if (j.contains("noncolliders"))
        for (const auto& t : j.at("noncolliders"))
            g.add_noncollider(t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<std::string>());
    return g;
}

}  // namespace suffstat
