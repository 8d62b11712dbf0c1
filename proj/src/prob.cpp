#include "suffstat/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace suffstat {

std::size_t state_space_size(const std::vector<VariableSpec>& vars) {
    std::size_t n = 1;
    for (const auto& v : vars) n *= static_cast<std::size_t>(v.cardinality);
    return n;
}

ProbTable::ProbTable(std::vector<VariableSpec> variables, std::vector<double> mass)
    : vars_(std::move(variables)), mass_(std::move(mass)) {
    std::set<std::string> seen;
    for (const auto& v : vars_) {
        if (v.cardinality < 1) throw ProbError("variable " + v.name + " has cardinality < 1");
        if (!seen.insert(v.name).second) throw ProbError("duplicate variable " + v.name);
    }
    if (mass_.size() != state_space_size(vars_))
        throw ProbError("mass size does not match state space");
    for (double m : mass_)
        if (!(m >= 0.0)) throw ProbError("negative or NaN mass");
    double t = total();
    if (std::abs(t - 1.0) > 1e-9) throw ProbError("mass does not sum to 1");
    strides_.assign(vars_.size(), 1);
    for (int i = static_cast<int>(vars_.size()) - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * static_cast<std::size_t>(vars_[i + 1].cardinality);
}

bool ProbTable::has(const std::string& name) const {
    return std::any_of(vars_.begin(), vars_.end(), [&](const VariableSpec& v) { return v.name == name; });
}

int ProbTable::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return static_cast<int>(i);
    throw ProbError("unknown variable " + name);
}

int ProbTable::cardinality(const std::string& name) const { return vars_[index_of(name)].cardinality; }

VarList ProbTable::names() const {
    VarList out;
    for (const auto& v : vars_) out.push_back(v.name);
    return out;
}

std::size_t ProbTable::encode(const std::vector<int>& states) const {
    if (states.size() != vars_.size()) throw ProbError("state vector length mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] < 0 || states[i] >= vars_[i].cardinality) throw ProbError("state out of range");
        flat += static_cast<std::size_t>(states[i]) * strides_[i];
    }
    return flat;
}

std::vector<int> ProbTable::decode(std::size_t flat) const {
    std::vector<int> s(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) s[i] = state_of(flat, static_cast<int>(i));
    return s;
}

double ProbTable::total() const {
    // Kahan keeps large tables within the 1e-9 invariant
    double sum = 0.0, c = 0.0;
    for (double m : mass_) {
        double y = m - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

int SampleDataset::column_of(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return static_cast<int>(i);
    throw ProbError("unknown variable " + name);
}

void SampleDataset::validate() const {
    const std::size_t k = variables.size();
    if (k == 0) {
        if (!cells.empty()) throw ProbError("cells without variables");
        return;
    }
    if (cells.size() % k != 0) throw ProbError("ragged dataset");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        int c = variables[i % k].cardinality;
        if (cells[i] < 0 || cells[i] >= c) throw ProbError("cell out of range for " + variables[i % k].name);
    }
}

ProbTable estimate_joint(const SampleDataset& data, double smoothing) {
    if (smoothing < 0.0) throw ProbError("negative smoothing");
    const std::size_t n = data.rows();
    if (n == 0) throw ProbError("no observations");
    data.validate();
    const std::size_t space = state_space_size(data.variables);
    std::vector<double> counts(space, 0.0);
    const std::size_t k = data.variables.size();
    std::vector<std::size_t> strides(k, 1);
    for (int i = static_cast<int>(k) - 2; i >= 0; --i)
        strides[i] = strides[i + 1] * static_cast<std::size_t>(data.variables[i + 1].cardinality);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t flat = 0;
        for (std::size_t c = 0; c < k; ++c) flat += static_cast<std::size_t>(data.at(r, c)) * strides[c];
        counts[flat] += 1.0;
    }
    const double denom = static_cast<double>(n) + smoothing * static_cast<double>(space);
    for (auto& c : counts) c = (c + smoothing) / denom;
    return ProbTable(data.variables, std::move(counts));
}

namespace {

std::vector<int> indices_of(const ProbTable& p, const VarList& names) {
    std::vector<int> idx;
    idx.reserve(names.size());
    for (const auto& n : names) idx.push_back(p.index_of(n));
    return idx;
}

void require_disjoint(const std::vector<const VarList*>& sets) {
    std::set<std::string> seen;
    for (const auto* s : sets)
        for (const auto& n : *s)
            if (!seen.insert(n).second) throw ProbError("overlapping variable sets at " + n);
}

// Marginal mass over `idx` (in that order), unnormalized copy of the table's precision.
std::vector<double> marginal_mass(const ProbTable& p, const std::vector<int>& idx) {
    std::vector<std::size_t> out_strides(idx.size(), 1);
    std::size_t out_size = 1;
    for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
        out_strides[i] = out_size;
        out_size *= static_cast<std::size_t>(p.variables()[idx[i]].cardinality);
    }
    std::vector<double> out(out_size, 0.0);
    const auto& m = p.mass();
    for (std::size_t flat = 0; flat < m.size(); ++flat) {
        if (m[flat] == 0.0) continue;
        std::size_t o = 0;
        for (std::size_t j = 0; j < idx.size(); ++j)
            o += static_cast<std::size_t>(p.state_of(flat, idx[j])) * out_strides[j];
        out[o] += m[flat];
    }
    return out;
}

double joint_entropy(const ProbTable& p, const VarList& names) {
    if (names.empty()) return 0.0;
    return entropy_bits(marginal_mass(p, indices_of(p, names)));
}

VarList concat(const VarList& a, const VarList& b) {
    VarList out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace

double entropy_bits(const std::vector<double>& pmf) {
    double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double v : pmf) {
        if (v <= 0.0) continue;
        double q = v / total;
        h -= q * std::log2(q);
    }
    return std::max(0.0, h);
}

ProbTable marginal(const ProbTable& p, const VarList& keep) {
    std::set<std::string> uniq(keep.begin(), keep.end());
    if (uniq.size() != keep.size()) throw ProbError("duplicate variable in keep set");
    auto idx = indices_of(p, keep);
    std::vector<VariableSpec> vars;
    for (int i : idx) vars.push_back(p.variables()[i]);
    auto m = marginal_mass(p, idx);
    double t = std::accumulate(m.begin(), m.end(), 0.0);
    for (auto& v : m) v /= t;
    return ProbTable(std::move(vars), std::move(m));
}

ProbTable condition(const ProbTable& p, const std::vector<Evidence>& evidence) {
    std::vector<std::vector<char>> allowed(p.num_vars());
    std::vector<char> assigned(p.num_vars(), 0);
    for (const auto& e : evidence) {
        int i = p.index_of(e.variable);
        if (assigned[i]) throw ProbError("variable assigned twice: " + e.variable);
        if (e.states.empty()) throw ProbError("empty evidence for " + e.variable);
        assigned[i] = 1;
        allowed[i].assign(p.variables()[i].cardinality, 0);
        for (int s : e.states) {
            if (s < 0 || s >= p.variables()[i].cardinality) throw ProbError("evidence state out of range");
            allowed[i][s] = 1;
        }
    }
    VarList rest;
    std::vector<int> rest_idx;
    std::vector<VariableSpec> rest_vars;
    for (std::size_t i = 0; i < p.num_vars(); ++i)
        if (!assigned[i]) {
            rest_idx.push_back(static_cast<int>(i));
            rest_vars.push_back(p.variables()[i]);
        }
    std::vector<std::size_t> out_strides(rest_idx.size(), 1);
    std::size_t out_size = 1;
    for (int i = static_cast<int>(rest_idx.size()) - 1; i >= 0; --i) {
        out_strides[i] = out_size;
        out_size *= static_cast<std::size_t>(rest_vars[i].cardinality);
    }
    std::vector<double> out(out_size, 0.0);
    double z = 0.0;
    const auto& m = p.mass();
    for (std::size_t flat = 0; flat < m.size(); ++flat) {
        if (m[flat] == 0.0) continue;
        bool ok = true;
        for (std::size_t i = 0; i < p.num_vars() && ok; ++i)
            if (assigned[i] && !allowed[i][p.state_of(flat, static_cast<int>(i))]) ok = false;
        if (!ok) continue;
        std::size_t o = 0;
        for (std::size_t j = 0; j < rest_idx.size(); ++j)
            o += static_cast<std::size_t>(p.state_of(flat, rest_idx[j])) * out_strides[j];
        out[o] += m[flat];
        z += m[flat];
    }
    if (z <= 0.0) throw ProbError("unsupported evidence");
    for (auto& v : out) v /= z;
    return ProbTable(std::move(rest_vars), std::move(out));
}

double entropy(const ProbTable& p, const VarList& target, const VarList& given) {
    require_disjoint({&target, &given});
    double h = joint_entropy(p, concat(target, given)) - joint_entropy(p, given);
    return std::max(0.0, h);
}

double mutual_info_raw(const ProbTable& p, const VarList& a, const VarList& b, const VarList& given) {
    require_disjoint({&a, &b, &given});
    return joint_entropy(p, concat(a, given)) + joint_entropy(p, concat(b, given)) -
           joint_entropy(p, concat(concat(a, b), given)) - joint_entropy(p, given);
}

double mutual_info(const ProbTable& p, const VarList& a, const VarList& b, const VarList& given) {
    return std::max(0.0, mutual_info_raw(p, a, b, given));
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q, KlMode mode) {
    if (p.size() != q.size()) throw ProbError("kl_divergence length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        double qi = q[i];
        if (mode == KlMode::Clamped) {
            qi = std::max(qi, kKlClampFloor);
        } else if (qi <= 0.0) {
            throw ProbError("kl_divergence: absolute continuity violated");
        }
        d += p[i] * std::log2(p[i] / qi);
    }
    return std::max(0.0, d);
}

IndependenceResult independence_test(const ProbTable& p, const VarList& a, const VarList& b,
                                     const VarList& given, double ratio_threshold) {
    return independence_test(p, a, b, given, ratio_threshold, kIndependenceFloor);
}

IndependenceResult independence_test(const ProbTable& p, const VarList& a, const VarList& b,
                                     const VarList& given, double ratio_threshold, double floor) {
    IndependenceResult r;
    r.info_given = mutual_info(p, a, b, given);
    r.info_marginal = mutual_info(p, a, b, {});
    if (r.info_marginal < floor) {
        r.used_floor = true;
        r.independent = r.info_given < floor;
    } else {
        r.independent = r.info_given / r.info_marginal < ratio_threshold;
    }
    return r;
}

}  // namespace suffstat
