#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "suffstat/ib.hpp"
#include "suffstat/prob.hpp"

namespace suffstat {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Benchmark families. The first six put a binomial logit GLM on Z:
//   Sum        h = a0 + a1 V2 + a2 s + a3 s^2 + a4 s V2 + a5 s^2 V2,              s = X+V1
//   SumAux     h = a0 + a1 g + a2 g^2 + a3 s + a4 s g + a5 s^2 + a6 s^2 g^2,     g = V1+V2
//   SumViaY    Sum with Y (p(Y=1|x) = 0.3+0.4x) in place of V2
//   NoStat     h = a0 + a1 V1 + a2 V2 + a3 X + a4 X V1 + a5 X V2 + a6 V1 V2
//   TwoSums    SumAux with g = X+V2
//   Products   h = a0 + a1 X V1 + a2 X V2 + a3 V1 V2
// Selection: Z binary with p(Z=1|v2) = 0.4+0.2 v2; S ~ Bin(n, logistic(Sum form with Z for V2));
//   rows are observed only when max/3 < S < 2 max/3.
// Dormant: U ~ Bern(0.5), V2 ~ Bin(16, 0.1+0.3x+0.3u), V3 ~ Bern(1/(1+exp(2-1.5 v2/16-2.5x))),
//   Z ~ Bin(n, logistic(Sum form with U for V2 + a6 (V3-1))).
// RoundedExp: Z = round(exp(h) + sigma xi), h taken from `base`, clamped to [0, z_max].
enum class Family { Sum, SumAux, SumViaY, NoStat, TwoSums, Products, Selection, Dormant, RoundedExp };

std::string family_name(Family f);
Family family_from_name(const std::string& s);
const std::vector<Family>& all_families();
bool is_glm_family(Family f);  // binomial GLM on Z over observed parents only

struct GlmSpec {
    Family family = Family::Sum;
    Family base = Family::Sum;  // RoundedExp only
    std::vector<double> a;
    int n = 4;                  // binomial trials (Z, or S for Selection)
    double sigma = 1.0;         // RoundedExp only
    double p_x = 0.5;
    double p_v1 = 0.5;
    double p_v2 = 0.5;
};

int coefficient_count(Family f, Family base = Family::Sum);
void validate(const GlmSpec& s);

// h for the Sum-shaped families, with w standing for V2 / Y / Z / U.
double h_sum(const std::vector<double>& a, int x, int v1, int w);

// Full generator table, latents included (S for Selection, U for Dormant).
ProbTable glm_exact_table(const GlmSpec& s);
// Table the observations come from: Selection is window-conditioned without S; Dormant drops U.
ProbTable observed_table(const GlmSpec& s);
// Table the statistic lives on: observed table, except Dormant uses the do(V3=1) table.
ProbTable analysis_table(const GlmSpec& s);

ProbTable selection_window(const ProbTable& full, const std::string& var, int max_state);

// p(Z|X,V1,V2,V3=v) p(X,V2) p(V1) computed from an observational table over X,V1,V2,V3,Z.
ProbTable identified_do_table(const ProbTable& observational, int v3);
ProbTable dormant_identified_table(const GlmSpec& s, int v3);
ProbTable dormant_surgical_table(const GlmSpec& s, int v3);

// Z state count for RoundedExp (z_max + 1).
int rounded_exp_states(const GlmSpec& s);
constexpr double kRoundedExpMeanCap = 60.0;
constexpr double kRoundedExpMargin = 0.5;

bool passes_faithfulness(const GlmSpec& s, double margin = 0.05);

std::string target_variable();
std::string source_variable();
// Input sets in escalation order.
std::vector<VarList> input_pools(const GlmSpec& s);
// Variables whose information about Z defines the stratum.
VarList information_inputs(const GlmSpec& s);
double information_measure(const GlmSpec& s);

enum class Stratum { Low, Medium, High };
std::string stratum_name(Stratum s);
std::pair<double, double> stratum_bounds(Family f, Family base = Family::Sum);
Stratum stratify(double value, std::pair<double, double> bounds);

// Label per joint input state implied by the family's equation, when the input set carries one.
std::optional<std::vector<int>> analytic_labels(const GlmSpec& s, const VarList& inputs);
// Groups input states whose p(z|state) rows agree to `tol`.
SufficientStatistic coarsest_sufficient_partition(const ProbTable& p, const VarList& inputs, const std::string& z,
                                                  double tol = 1e-12);
// A partition is a statistic for x when some cell holds states with different x.
bool merges_source_states(const SufficientStatistic& t, const std::string& x);

struct SystemConfig {
    GlmSpec spec;
    int index = 0;
    int draw = 0;
    std::uint64_t seed = 0;
    double info = 0.0;
    Stratum stratum = Stratum::Low;
};

struct SuiteOptions {
    int k = 40;
    std::vector<int> n_set{4, 8, 16, 64};
    std::vector<double> sigma_set{0.5, 1, 2, 3};
    std::vector<double> px_set{0.3, 0.5, 0.7};
    std::vector<double> pv1_set{0.3, 0.5, 0.7};
    // true: every draw is crossed with every grid cell; false: one seeded cell per draw
    bool full_grid = true;
    Family base = Family::Sum;
    double coefficient_bound = 2.0;
    double margin = 0.05;
    long rejection_budget = 100000;
    std::uint64_t seed = 0;
};

std::vector<SystemConfig> generate_suite(Family f, const SuiteOptions& opt);

SampleDataset sample_table(const ProbTable& p, std::size_t n, std::uint64_t seed);
// Draws from the generator; Selection draws then filters on the window until n rows are kept.
SampleDataset sample(const GlmSpec& s, std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const GlmSpec& s);
GlmSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProbTable& p);
ProbTable table_from_json(const nlohmann::json& j);

}  // namespace suffstat
