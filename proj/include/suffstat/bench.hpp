#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "suffstat/ibssi.hpp"
#include "suffstat/orientation.hpp"
#include "suffstat/simgen.hpp"
#include "suffstat/systems.hpp"

namespace suffstat {

constexpr int kReportSchemaVersion = 1;

struct BetaSet {
    std::string name;
    std::vector<double> values;
};

std::vector<BetaSet> default_beta_sets();

struct ExperimentPlan {
    std::vector<Family> families{Family::Sum};
    std::vector<long> n_grid{2500, 5000, 10000, 20000};  // 0 stands for the exact table
    std::vector<BetaSet> beta_sets = default_beta_sets();
    SelectionThresholds thresholds;
    int k = 10;
    bool full_grid = false;
    int repetitions = 1;
    std::uint64_t seed = 0;
    int restarts = 200;
    double budget_seconds = 0.0;
    Family base = Family::Sum;

    void validate() const;
};

enum class Outcome { TruePositive, FalsePositive, TrueNegative, Missed };
std::string outcome_name(Outcome o);

struct ConfigOutcome {
    std::string family;
    long n = 0;
    std::string beta_set;
    int config = 0;
    int repetition = 0;
    Stratum stratum = Stratum::Low;
    double info = 0.0;
    bool has_statistic = false;
    Outcome outcome = Outcome::Missed;
    bool selected = false;    // some candidate met the selection criteria
    bool identified = false;  // some accepted statistic equals the coarsest sufficient partition
    int cardinality = 0;      // first accepted statistic
    VarList inputs;           // pool that produced the classification
    bool budget_exceeded = false;
    std::string note;
    double seconds = 0.0;
};

struct RateRow {
    std::string family;
    long n = 0;
    std::string beta_set;
    std::string stratum;  // low / medium / high / all
    int configs = 0;
    double tp_rate = 0, fp_rate = 0, tn_rate = 0, selection_ratio = 0, identification_ratio = 0;
    double mean_cardinality = 0;  // over accepted; 0 when none
    double seconds = 0;
};

struct ExperimentReport {
    ExperimentPlan plan;
    std::vector<ConfigOutcome> outcomes;
    std::vector<RateRow> rows;
    bool budget_exceeded = false;
    double seconds = 0.0;
};

// One configuration of the TP/FP protocol, exposed for tests.
ConfigOutcome evaluate_config(const SystemConfig& c, long n, const BetaSet& betas, const ExperimentPlan& plan,
                              int repetition, bool parallel_ib);

ExperimentReport run_tpfp(const ExperimentPlan& plan);
std::vector<RateRow> aggregate(const std::vector<ConfigOutcome>& outcomes);

struct CurvePoint {
    std::string family;
    VarList inputs;
    double beta_prime = 0;
    int max_cardinality = 0;
    long n = 0;
    int configs = 0;
    double mean_cardinality = 0;
    double selection_ratio = 0;
};

struct CurvePlan {
    Family family = Family::Sum;
    std::vector<VarList> inputs{{"X", "V1"}};
    std::vector<double> beta_primes{15, 100, 500};
    std::vector<int> max_cardinalities;  // empty: 2..|X|
    long n = 20000;
    int k = 10;
    std::uint64_t seed = 0;
    int restarts = 200;
    SelectionThresholds thresholds;
};

std::vector<CurvePoint> run_cardinality_curve(const CurvePlan& plan);

struct DemoReport {
    std::string id;
    DiscoveryResult off;
    DiscoveryResult on;
    SoundnessReport soundness_off;
    SoundnessReport soundness_on;
    // dormant system: IBSSI on the observational and the identified table
    std::optional<StatisticVerdict> observational;
    std::optional<StatisticVerdict> identified;
};

DemoReport run_discovery_demo(const std::string& id, std::uint64_t seed = 0);
std::string format_demo(const DemoReport& r);
nlohmann::json to_json(const DemoReport& r);

// Long format: one line per (family, n, beta set, stratum, metric).
std::string report_csv(const ExperimentReport& r);
nlohmann::json report_json(const ExperimentReport& r);
// x = n, one column per stratum, one block per (family, beta set, metric).
std::string plot_data_csv(const ExperimentReport& r);
nlohmann::json timing_json(const ExperimentReport& r);
std::string curve_csv(const std::vector<CurvePoint>& pts);

struct ReportLine {
    int schema_version = 0;
    std::string family;
    long n = 0;
    std::string beta_set;
    std::string stratum;
    std::string metric;
    double value = 0;
    bool operator==(const ReportLine&) const = default;
};
std::vector<ReportLine> parse_report_csv(const std::string& text);

// Writes <prefix>.csv, <prefix>.json, <prefix>.plot.csv and <prefix>.timing.json.
void report_emit(const ExperimentReport& r, const std::string& prefix);

}  // namespace suffstat
