#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace suffstat {

class ProbError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct VariableSpec {
    std::string name;
    int cardinality = 1;

    bool operator==(const VariableSpec&) const = default;
};

using VarList = std::vector<std::string>;

// Dense joint pmf, row-major over the declared variable order (last variable fastest).
class ProbTable {
public:
    ProbTable() = default;
    ProbTable(std::vector<VariableSpec> variables, std::vector<double> mass);

    const std::vector<VariableSpec>& variables() const { return vars_; }
    const std::vector<double>& mass() const { return mass_; }
    std::size_t size() const { return mass_.size(); }
    std::size_t num_vars() const { return vars_.size(); }

    bool has(const std::string& name) const;
    int index_of(const std::string& name) const;
    int cardinality(const std::string& name) const;
    VarList names() const;

    std::size_t stride(int var_index) const { return strides_[var_index]; }
    std::size_t encode(const std::vector<int>& states) const;
    std::vector<int> decode(std::size_t flat) const;
    int state_of(std::size_t flat, int var_index) const {
        return static_cast<int>((flat / strides_[var_index]) % vars_[var_index].cardinality);
    }

    double at(const std::vector<int>& states) const { return mass_[encode(states)]; }
    double total() const;

private:
    std::vector<VariableSpec> vars_;
    std::vector<double> mass_;
    std::vector<std::size_t> strides_;
};

std::size_t state_space_size(const std::vector<VariableSpec>& vars);

struct SampleDataset {
    std::vector<VariableSpec> variables;
    std::vector<int> cells;  // row-major, rows() x variables.size()

    std::size_t rows() const { return variables.empty() ? 0 : cells.size() / variables.size(); }
    int at(std::size_t row, std::size_t col) const { return cells[row * variables.size() + col]; }
    int column_of(const std::string& name) const;
    void validate() const;
};

ProbTable estimate_joint(const SampleDataset& data, double smoothing = 0.0);

// Result variables follow the order given in `keep`.
ProbTable marginal(const ProbTable& p, const VarList& keep);

struct Evidence {
    std::string variable;
    std::vector<int> states;  // one state, or the allowed range
};

ProbTable condition(const ProbTable& p, const std::vector<Evidence>& evidence);

double entropy(const ProbTable& p, const VarList& target, const VarList& given = {});
double mutual_info(const ProbTable& p, const VarList& a, const VarList& b, const VarList& given = {});
// Unclamped I(a;b|given); only useful to inspect rounding.
double mutual_info_raw(const ProbTable& p, const VarList& a, const VarList& b, const VarList& given = {});

enum class KlMode { Strict, Clamped };
constexpr double kKlClampFloor = 1e-12;
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q, KlMode mode = KlMode::Strict);

constexpr double kIndependenceFloor = 1e-4;

struct IndependenceResult {
    bool independent = false;
    double info_given = 0.0;
    double info_marginal = 0.0;
    bool used_floor = false;
};

IndependenceResult independence_test(const ProbTable& p, const VarList& a, const VarList& b,
                                     const VarList& given, double ratio_threshold);
// Same with an explicit floor below which the marginal counts as zero and the absolute test applies.
IndependenceResult independence_test(const ProbTable& p, const VarList& a, const VarList& b,
                                     const VarList& given, double ratio_threshold, double floor);

// Entropy of an arbitrary nonnegative vector normalized to 1, in bits.
double entropy_bits(const std::vector<double>& pmf);

// CSV: header of names, integer cells.
SampleDataset read_csv(const std::string& path, const std::string& schema_path = "");
SampleDataset parse_csv(const std::string& text, const std::vector<VariableSpec>* schema = nullptr);
void write_csv(const SampleDataset& data, const std::string& path);
std::string format_csv(const SampleDataset& data);
std::vector<VariableSpec> read_schema(const std::string& path);

}  // namespace suffstat
