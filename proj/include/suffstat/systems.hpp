#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "suffstat/graph.hpp"
#include "suffstat/orientation.hpp"
#include "suffstat/prob.hpp"
#include "suffstat/simgen.hpp"

namespace suffstat {

struct DemoSystem {
    std::string id;
    std::string description;
    MixedGraph truth;   // generating DAG, latent and selection nodes included
    VarList selection;  // nodes conditioned on by sampling
    ProbTable exact;    // observed variables only
    std::vector<StatisticQuery> queries;
    std::optional<ProbTable> identified;  // do(V3=1) table for the dormant system
    std::optional<GlmSpec> spec;
};

// Appends a binary child whose p(child=1) is a function of the full state row.
ProbTable append_binary_child(const ProbTable& p, const std::string& name,
                              const std::function<double(const std::vector<int>&)>& p1);

const std::vector<std::string>& demo_system_ids();
DemoSystem demo_system(const std::string& id);

// Family system plus a binary collider child of X and Z named `collider`.
DemoSystem system_from_spec(const GlmSpec& s, const std::string& collider = "W");

}  // namespace suffstat
