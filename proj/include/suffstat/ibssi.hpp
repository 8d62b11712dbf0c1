#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "suffstat/ib.hpp"
#include "suffstat/prob.hpp"

namespace suffstat {

struct SelectionThresholds {
    double a_i = 0.025;
    double a_hx = 0.1;
    double a_hz = 0.1;
};

inline const std::vector<double> kBetaSetWide{25, 50, 75, 100};
inline const std::vector<double> kBetaSetNarrow{50, 75, 100};

struct IbssiOptions {
    std::vector<double> beta_primes = kBetaSetWide;
    SelectionThresholds thresholds;
    bool local_criteria = false;
    // require |theta(0)| < |X| at the first (full-cardinality) call
    bool strict_first_call = true;
    // stop the sweep at the first accepting beta'
    bool stop_at_first = true;
    // accept only when every accepting beta' agrees on the partition and at least two accept
    bool consistent_across_beta = false;
    int restarts = 200;
    double tolerance = 1e-7;
    int max_iterations = 10000;
    std::uint64_t seed = 0;
    double budget_seconds = 0.0;  // per IB call
    bool parallel = true;
};

struct IbssiQuery {
    std::string x;
    std::string z;
    VarList inputs;
    ProbTable train;
    ProbTable test;  // same as train for exact tables
    IbssiOptions options;
};

struct IbCallTrace {
    double beta_prime = 0.0;
    int max_cardinality = 0;
    int cardinality = 0;
    bool budget_exceeded = false;
};

struct CriteriaResult {
    bool c_x = false;
    bool c_z = false;
    bool c_i = false;
    bool local = true;
    double h_x_given = 0.0, h_x = 0.0;
    double h_z_given = 0.0, h_z = 0.0;
    double i_given = 0.0, i_xz = 0.0;

    bool all() const { return c_x && c_z && c_i && local; }
};

struct BetaOutcome {
    double beta_prime = 0.0;
    bool accepted = false;
    std::string reason;
    std::optional<SufficientStatistic> statistic;  // the candidate that reached the criteria
    std::optional<CriteriaResult> criteria;
    std::vector<IbCallTrace> calls;
};

struct StatisticVerdict {
    bool accepted = false;
    std::optional<SufficientStatistic> statistic;
    double beta_prime = 0.0;
    VarList inputs;
    std::vector<BetaOutcome> trace;
    bool budget_exceeded = false;

    // statistics accepted at each beta' (all of them when the sweep does not stop early)
    std::vector<std::pair<double, SufficientStatistic>> acceptances() const;
};

CriteriaResult evaluate_criteria(const SufficientStatistic& t, const ProbTable& test, const std::string& x,
                                 const std::string& z, const SelectionThresholds& th, bool with_local);

// Algorithm for a single beta'.
BetaOutcome algorithm1(const IbssiQuery& q, double beta_prime);
StatisticVerdict ibssi_sweep(const IbssiQuery& q);

struct EscalationResult {
    StatisticVerdict verdict;
    VarList chosen;  // empty when nothing was accepted
    std::vector<StatisticVerdict> attempts;
};

EscalationResult input_escalation(const std::string& x, const std::string& z, const std::vector<VarList>& pools,
                                  const IbssiQuery& tmpl);

bool local_criteria(const SufficientStatistic& t, const ProbTable& p, const std::string& x, const std::string& z);

struct ConsistencyResult {
    bool consistent = false;
    double i_given = 0.0;
    double h_x_given = 0.0;
    double h_z_given = 0.0;
};

ConsistencyResult consistency_score(const SufficientStatistic& t, const ProbTable& truth, const std::string& x,
                                    const std::string& z);

nlohmann::json to_json(const StatisticVerdict& v);

}  // namespace suffstat
