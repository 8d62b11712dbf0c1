#pragma once

#include <array>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace suffstat {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mark { Tail, Arrow, Circle };
enum class NodeKind { Observable, Latent, Statistic };

std::string to_string(Mark m);
std::string to_string(NodeKind k);
Mark mark_from_string(const std::string& s);
NodeKind kind_from_string(const std::string& s);

struct Edge {
    std::string a, b;
    Mark mark_a = Mark::Circle;
    Mark mark_b = Mark::Circle;
};

using Triple = std::array<std::string, 3>;  // (a, y, b) with a < b

class MixedGraph {
public:
    MixedGraph() = default;

    int add_node(const std::string& name, NodeKind kind = NodeKind::Observable);
    bool has_node(const std::string& name) const;
    int id(const std::string& name) const;
    const std::string& name(int id) const { return names_[id]; }
    NodeKind kind(int id) const { return kinds_[id]; }
    NodeKind kind(const std::string& n) const { return kinds_[id(n)]; }
    int num_nodes() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& node_names() const { return names_; }

    void add_edge(const std::string& a, const std::string& b, Mark at_a, Mark at_b);
    void add_directed(const std::string& from, const std::string& to) { add_edge(from, to, Mark::Tail, Mark::Arrow); }
    void add_bidirected(const std::string& a, const std::string& b) { add_edge(a, b, Mark::Arrow, Mark::Arrow); }
    void remove_edge(const std::string& a, const std::string& b);
    bool adjacent(const std::string& a, const std::string& b) const;
    bool adjacent(int a, int b) const { return adj_[a][b] != 0; }

    // Mark at the `at` end of edge (other, at).
    Mark mark(const std::string& other, const std::string& at) const;
    Mark mark(int other, int at) const { return static_cast<Mark>(marks_[other][at]); }
    void set_mark(const std::string& other, const std::string& at, Mark m);
    void set_mark(int other, int at, Mark m) { marks_[other][at] = static_cast<char>(m); }

    bool directed(int from, int to) const {
        return adj_[from][to] && mark(to, from) == Mark::Tail && mark(from, to) == Mark::Arrow;
    }

    std::vector<int> neighbours(int v) const;
    std::vector<std::string> neighbours(const std::string& v) const;
    std::vector<Edge> edges() const;
    std::size_t num_edges() const;

    void add_noncollider(const std::string& a, const std::string& y, const std::string& b);
    bool has_noncollider(const std::string& a, const std::string& y, const std::string& b) const;
    const std::set<Triple>& noncolliders() const { return noncolliders_; }
    void clear_noncolliders() { noncolliders_.clear(); }

    // Directed-edge descendants (a node is not its own descendant).
    std::vector<char> descendants_mask(int v) const;
    std::vector<char> ancestors_mask(const std::vector<int>& of) const;  // includes `of` itself
    bool has_directed_cycle(bool skip_statistics = true) const;

    bool operator==(const MixedGraph& o) const;

private:
    std::vector<std::string> names_;
    std::vector<NodeKind> kinds_;
    std::vector<std::vector<char>> adj_;
    std::vector<std::vector<char>> marks_;
    std::set<Triple> noncolliders_;
};

bool d_separated(const MixedGraph& g, const std::vector<std::string>& a, const std::vector<std::string>& b,
                 const std::vector<std::string>& s);

struct StatisticNodeSpec {
    std::string name;
    std::vector<std::string> arguments;
    std::vector<std::string> hosts;
    std::vector<int> argument_cardinalities;
    std::vector<int> map;  // label per joint argument state, row-major
    // (argument, host) pairs whose direct edge is replaced by the statistic
    std::vector<std::pair<std::string, std::string>> removed_direct;
};

MixedGraph augment(const MixedGraph& g, const std::vector<StatisticNodeSpec>& stats);
MixedGraph strip_statistics(const MixedGraph& g, const std::vector<StatisticNodeSpec>& stats);
MixedGraph intervene(const MixedGraph& g, const std::vector<std::string>& targets);

std::string render(const MixedGraph& g);
nlohmann::json to_json(const MixedGraph& g);
MixedGraph graph_from_json(const nlohmann::json& j);

}  // namespace suffstat
