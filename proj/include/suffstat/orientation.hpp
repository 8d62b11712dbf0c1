#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "suffstat/graph.hpp"
#include "suffstat/ibssi.hpp"
#include "suffstat/prob.hpp"

namespace suffstat {

struct SepRecord {
    std::string a, b;
    VarList sep;
    bool statistic_based = false;
    std::optional<SufficientStatistic> statistic;
    VarList s_psi;  // variables the statistic was computed from
};

// Caller-supplied statistic query for an adjacent triple (x, y, z).
struct StatisticQuery {
    std::string x, y, z;
    VarList inputs;
    // Metadata for the away-from-collider statistic rule; absent means that rule is skipped.
    std::optional<VarList> arguments;
    std::optional<VarList> conditioning;
};

struct DiscoveryConfig {
    int max_conditioning = 3;
    double ratio_threshold = 0.025;
    double absolute_floor = kIndependenceFloor;
    IbssiOptions ibssi;
    bool use_statistics = true;
    // subsets of the reduced input set checked by the noncollider rule are capped at this size
    int max_subset_size = 6;
};

// Tests for exact tables: only numerically zero information counts as independence.
DiscoveryConfig exact_table_config();

struct DataContext {
    ProbTable train;
    ProbTable test;
};

struct MarkEvent {
    std::string rule;
    std::string other, at;  // mark sits at `at` on edge (other, at); empty for noncollider marks
    std::string mark;       // tail / arrow / noncollider
    std::string detail;
    std::optional<Triple> triple;
};

struct AdjacencyResult {
    MixedGraph graph;
    std::vector<SepRecord> seps;
};

AdjacencyResult find_adjacencies(const ProbTable& p, const DiscoveryConfig& cfg);

struct OrientationState {
    MixedGraph graph;
    std::vector<SepRecord> seps;       // separated pairs
    std::vector<SepRecord> stat_seps;  // adjacent pairs separated by an accepted statistic
    std::vector<MarkEvent> provenance;
    std::vector<std::string> conflicts;
    std::vector<std::string> warnings;
    std::vector<std::string> diagnostics;
    struct StatCollider {
        StatisticQuery query;
    };
    std::vector<StatCollider> stat_colliders;

    const SepRecord* sep(const std::string& a, const std::string& b) const;
    // Sets a mark only over a circle; anything else different is a conflict.
    bool set_mark(const std::string& other, const std::string& at, Mark m, const std::string& rule,
                  const std::string& detail);
};

// Standard collider/noncollider inference over unshielded triples; claims are collected first.
void apply_standard_rules(OrientationState& st);

struct RuleOutcome {
    bool applied = false;
    std::string diagnostic;
    std::optional<StatisticVerdict> verdict;
};

RuleOutcome rule_c_ss(OrientationState& st, const DataContext& data, const StatisticQuery& q,
                      const DiscoveryConfig& cfg);
RuleOutcome rule_nc_ss(OrientationState& st, const DataContext& data, const StatisticQuery& q,
                       const DiscoveryConfig& cfg);

// Propagation loop to fixpoint; returns the number of passes.
int apply_propagation(OrientationState& st);

struct DiscoveryResult {
    OrientationState state;
    int propagation_passes = 0;
};

DiscoveryResult ci_ss(const DataContext& data, const DiscoveryConfig& cfg, const std::vector<StatisticQuery>& queries);

nlohmann::json to_json(const SepRecord& s);
nlohmann::json to_json(const DiscoveryResult& r);

struct SoundnessReport {
    int marks_checked = 0;
    std::vector<std::string> violations;
    bool sound() const { return violations.empty(); }
};

// Checks every arrowhead, tail and noncollider mark against a generating DAG; `selection` names the
// variables conditioned on by sampling, which count as ancestor targets.
SoundnessReport check_soundness(const MixedGraph& learned, const MixedGraph& truth, const VarList& selection = {});

}  // namespace suffstat
