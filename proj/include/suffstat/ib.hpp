#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "suffstat/prob.hpp"

namespace suffstat {

class IbError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// p(x) and p(z|x) flattened; x runs over the joint input space.
struct IBProblem {
    VarList inputs;
    std::vector<int> input_cards;
    std::string target;
    int nx = 0;
    int nz = 0;
    std::vector<double> px;
    std::vector<double> pz_x;  // nx * nz, rows of unobserved x hold p(z)
    double h_x = 0.0;          // bits
    double i_xz = 0.0;         // bits
};

IBProblem make_ib_problem(const ProbTable& joint, const VarList& inputs, const std::string& target);

// beta = beta' * H(X) / I(X;Z)
double scale_beta(const IBProblem& prob, double beta_prime);
double scale_beta(const ProbTable& joint, const VarList& inputs, const std::string& target, double beta_prime);

struct IBOptions {
    double beta = 1.0;
    int max_cardinality = 2;
    int restarts = 200;
    double tolerance = 1e-7;
    int max_iterations = 10000;
    std::uint64_t seed = 0;
    // wall-clock cap for the whole optimization; zero means none
    double budget_seconds = 0.0;
};

struct SoftMapping {
    int nx = 0;
    int nt = 0;
    std::vector<double> rows;  // nx * nt, p(t|x)
    std::vector<double> pt;
    double objective = 0.0;    // I(T;X) - beta I(T;Z), bits
    double i_tx = 0.0;
    double i_tz = 0.0;
    int iterations = 0;
    bool converged = false;
    int restart = -1;
    int restarts_run = 0;
    bool budget_exceeded = false;
};

// One restart from a Dirichlet(1) start. `trace` receives the objective after every update.
SoftMapping ib_single_run(const IBProblem& prob, double beta, int nt, double tolerance, int max_iterations,
                          std::uint64_t seed, std::vector<double>* trace = nullptr);
// One run from a caller-provided start.
SoftMapping ib_iterate(const IBProblem& prob, double beta, std::vector<double> start, int nt, double tolerance,
                       int max_iterations, std::vector<double>* trace = nullptr);

SoftMapping ib_optimize(const IBProblem& prob, const IBOptions& opt);
SoftMapping ib_optimize_serial(const IBProblem& prob, const IBOptions& opt);

double ib_objective(const IBProblem& prob, const std::vector<double>& rows, int nt, double beta,
                    double* i_tx = nullptr, double* i_tz = nullptr);

std::uint64_t restart_seed(std::uint64_t seed, int restart);

struct SufficientStatistic {
    VarList inputs;
    std::vector<int> input_cards;
    std::vector<int> labels;  // one per joint input state, row-major
    int cardinality = 0;

    std::size_t size() const { return labels.size(); }
};

constexpr double kEmptyClusterMass = 1e-12;

SufficientStatistic harden(const SoftMapping& m, const IBProblem& prob);
SufficientStatistic make_statistic(const VarList& inputs, const std::vector<int>& cards, std::vector<int> labels);
// Canonical relabeling: labels in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels);
bool statistic_partition_equal(const SufficientStatistic& a, const SufficientStatistic& b);
ProbTable apply_statistic(const SufficientStatistic& t, const ProbTable& p, const std::string& name = "theta");

nlohmann::json to_json(const SufficientStatistic& t);
SufficientStatistic statistic_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SoftMapping& m);

}  // namespace suffstat
