#include "suffstat/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "suffstat/rng.hpp"

namespace suffstat {

namespace {

double logistic(double h) { return 1.0 / (1.0 + std::exp(-h)); }

std::vector<double> binomial_pmf(int n, double p) {
    std::vector<double> out(n + 1);
    const double lp = std::log(p), lq = std::log1p(-p);
    for (int k = 0; k <= n; ++k)
        out[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * lp +
                          (n - k) * lq);
    double s = std::accumulate(out.begin(), out.end(), 0.0);
    for (auto& v : out) v /= s;
    return out;
}

double bern(double p1, int v) { return v ? p1 : 1.0 - p1; }

// Parent configurations and their class keys for the families whose mechanism lives in Z.
struct ParentState {
    int x, v1, w;
    std::vector<int> key;
    double h;
};

std::vector<ParentState> parent_states(Family f, const std::vector<double>& a) {
    std::vector<ParentState> out;
    for (int x = 0; x < 2; ++x)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int w = 0; w < 2; ++w) {
                ParentState ps{x, v1, w, {}, 0.0};
                const int s = x + v1;
                switch (f) {
                    case Family::Sum:
                    case Family::SumViaY:
                        ps.key = {s, w};
                        ps.h = h_sum(a, x, v1, w);
                        break;
                    case Family::SumAux: {
                        const int g = v1 + w;
                        ps.key = {s, g};
                        ps.h = a[0] + a[1] * g + a[2] * g * g + a[3] * s + a[4] * s * g + a[5] * s * s +
                               a[6] * s * s * g * g;
                        break;
                    }
                    case Family::TwoSums: {
                        const int g = x + w;
                        ps.key = {s, g};
                        ps.h = a[0] + a[1] * g + a[2] * g * g + a[3] * s + a[4] * s * g + a[5] * s * s +
                               a[6] * s * s * g * g;
                        break;
                    }
                    case Family::NoStat:
                        ps.key = {x, v1, w};
                        ps.h = a[0] + a[1] * v1 + a[2] * w + a[3] * x + a[4] * x * v1 + a[5] * x * w + a[6] * v1 * w;
                        break;
                    case Family::Products:
                        ps.key = {x * v1, x * w, v1 * w};
                        ps.h = a[0] + a[1] * x * v1 + a[2] * x * w + a[3] * v1 * w;
                        break;
                    default:
                        throw SimError("family has no Z-side parent states");
                }
                out.push_back(std::move(ps));
            }
    return out;
}

std::string w_name(Family f) { return f == Family::SumViaY ? "Y" : "V2"; }

double rounded_exp_hmax(const GlmSpec& s) {
    double hmax = -1e300;
    for (const auto& ps : parent_states(s.base, s.a)) hmax = std::max(hmax, ps.h);
    return hmax;
}

double normal_cdf(double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); }

// P(round(mu + sigma xi) = k) with the ends absorbing the tails.
std::vector<double> rounded_normal_pmf(double mu, double sigma, int zmax) {
    std::vector<double> out(zmax + 1);
    for (int k = 0; k <= zmax; ++k) {
        double lo = k == 0 ? 0.0 : normal_cdf((k - 0.5 - mu) / sigma);
        double hi = k == zmax ? 1.0 : normal_cdf((k + 0.5 - mu) / sigma);
        out[k] = std::max(0.0, hi - lo);
    }
    double t = std::accumulate(out.begin(), out.end(), 0.0);
    for (auto& v : out) v /= t;
    return out;
}

ProbTable z_side_table(const GlmSpec& s) {
    const Family f = s.family == Family::RoundedExp ? s.base : s.family;
    const auto states = parent_states(f, s.a);
    int nz = s.n + 1;
    if (s.family == Family::RoundedExp) nz = rounded_exp_states(s);
    std::vector<VariableSpec> vars{{"X", 2}, {"V1", 2}, {w_name(f), 2}, {"Z", nz}};
    std::vector<double> mass(8 * static_cast<std::size_t>(nz));
    for (const auto& ps : states) {
        double p = bern(s.p_x, ps.x) * bern(s.p_v1, ps.v1);
        p *= f == Family::SumViaY ? bern(0.3 + 0.4 * ps.x, ps.w) : bern(s.p_v2, ps.w);
        std::vector<double> pz = s.family == Family::RoundedExp ? rounded_normal_pmf(std::exp(ps.h), s.sigma, nz - 1)
                                                                : binomial_pmf(s.n, logistic(ps.h));
        std::size_t base = (static_cast<std::size_t>(ps.x) * 4 + ps.v1 * 2 + ps.w) * nz;
        for (int z = 0; z < nz; ++z) mass[base + z] = p * pz[z];
    }
    return ProbTable(vars, mass);
}

ProbTable selection_full(const GlmSpec& s) {
    const int ns = s.n + 1;
    std::vector<VariableSpec> vars{{"X", 2}, {"V1", 2}, {"V2", 2}, {"Z", 2}, {"S", ns}};
    std::vector<double> mass(16 * static_cast<std::size_t>(ns));
    for (int x = 0; x < 2; ++x)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int v2 = 0; v2 < 2; ++v2)
                for (int z = 0; z < 2; ++z) {
                    double p = bern(s.p_x, x) * bern(s.p_v1, v1) * bern(s.p_v2, v2) * bern(0.4 + 0.2 * v2, z);
                    auto ps = binomial_pmf(s.n, logistic(h_sum(s.a, x, v1, z)));
                    std::size_t base = (static_cast<std::size_t>(x) * 8 + v1 * 4 + v2 * 2 + z) * ns;
                    for (int k = 0; k < ns; ++k) mass[base + k] = p * ps[k];
                }
    return ProbTable(vars, mass);
}

constexpr int kDormantV2Trials = 16;

double dormant_v3_prob(int x, int v2) {
    return 1.0 / (1.0 + std::exp(2.0 - 1.5 * v2 / kDormantV2Trials - 2.5 * x));
}

double dormant_h(const std::vector<double>& a, int x, int v1, int u, int v3) {
    return h_sum(a, x, v1, u) + a[6] * (v3 - 1);
}

// U, X, V1, V2, V3, Z; `forced_v3` >= 0 replaces the V3 mechanism.
ProbTable dormant_full(const GlmSpec& s, int forced_v3) {
    const int nz = s.n + 1, nv2 = kDormantV2Trials + 1;
    std::vector<VariableSpec> vars{{"U", 2}, {"X", 2}, {"V1", 2}, {"V2", nv2}, {"V3", 2}, {"Z", nz}};
    std::vector<double> mass(state_space_size(vars), 0.0);
    std::vector<std::vector<double>> pz(16);
    for (int x = 0; x < 2; ++x)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int u = 0; u < 2; ++u)
                for (int v3 = 0; v3 < 2; ++v3) pz[x * 8 + v1 * 4 + u * 2 + v3] = binomial_pmf(s.n, logistic(dormant_h(s.a, x, v1, u, v3)));
    std::size_t flat = 0;
    for (int u = 0; u < 2; ++u)
        for (int x = 0; x < 2; ++x) {
            auto pv2 = binomial_pmf(kDormantV2Trials, 0.1 + 0.3 * x + 0.3 * u);
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < nv2; ++v2)
                    for (int v3 = 0; v3 < 2; ++v3) {
                        double p3 = forced_v3 >= 0 ? (v3 == forced_v3 ? 1.0 : 0.0) : bern(dormant_v3_prob(x, v2), v3);
                        double p = 0.5 * bern(s.p_x, x) * bern(s.p_v1, v1) * pv2[v2] * p3;
                        const auto& z = pz[x * 8 + v1 * 4 + u * 2 + v3];
                        for (int k = 0; k < nz; ++k) mass[flat++] = p * z[k];
                    }
        }
    return ProbTable(vars, mass);
}

// Normalized information I(inputs;Z)/H(Z) on a table.
double normalized_info(const ProbTable& p, const VarList& inputs) {
    double hz = entropy(p, {"Z"});
    return hz > 0.0 ? mutual_info(p, inputs, {"Z"}) / hz : 0.0;
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::Sum: return "sum";
        case Family::SumAux: return "sum_aux";
        case Family::SumViaY: return "sum_via_y";
        case Family::NoStat: return "no_stat";
        case Family::TwoSums: return "two_sums";
        case Family::Products: return "products";
        case Family::Selection: return "selection";
        case Family::Dormant: return "dormant";
        case Family::RoundedExp: return "rounded_exp";
    }
    return "?";
}

Family family_from_name(const std::string& s) {
    for (Family f : all_families())
        if (family_name(f) == s) return f;
    throw SimError("unknown family " + s);
}

const std::vector<Family>& all_families() {
    static const std::vector<Family> fs{Family::Sum,      Family::SumAux,    Family::SumViaY,
                                        Family::NoStat,   Family::TwoSums,   Family::Products,
                                        Family::Selection, Family::Dormant, Family::RoundedExp};
    return fs;
}

bool is_glm_family(Family f) {
    return f == Family::Sum || f == Family::SumAux || f == Family::SumViaY || f == Family::NoStat ||
           f == Family::TwoSums || f == Family::Products;
}

int coefficient_count(Family f, Family base) {
    switch (f) {
        case Family::Sum:
        case Family::SumViaY:
        case Family::Selection: return 6;
        case Family::SumAux:
        case Family::NoStat:
        case Family::TwoSums:
        case Family::Dormant: return 7;
        case Family::Products: return 4;
        case Family::RoundedExp:
            if (!is_glm_family(base)) throw SimError("rounded_exp base must be a GLM family");
            return coefficient_count(base);
    }
    return 0;
}

void validate(const GlmSpec& s) {
    if (static_cast<int>(s.a.size()) != coefficient_count(s.family, s.base))
        throw SimError("coefficient vector length does not match family " + family_name(s.family));
    for (double p : {s.p_x, s.p_v1, s.p_v2})
        if (!(p > 0.0 && p < 1.0)) throw SimError("marginal probabilities must lie in (0,1)");
    if (s.family == Family::RoundedExp) {
        if (!(s.sigma > 0.0)) throw SimError("sigma must be positive");
    } else if (s.n < 1) {
        throw SimError("trial count must be positive");
    }
}

double h_sum(const std::vector<double>& a, int x, int v1, int w) {
    const int s = x + v1;
    return a[0] + a[1] * w + a[2] * s + a[3] * s * s + a[4] * s * w + a[5] * s * s * w;
}

int rounded_exp_states(const GlmSpec& s) {
    double m = std::exp(rounded_exp_hmax(s));
    if (m > kRoundedExpMeanCap) throw SimError("exp(h) exceeds the supported range");
    return static_cast<int>(std::ceil(m + 4.0 * s.sigma)) + 1;
}

ProbTable glm_exact_table(const GlmSpec& s) {
    validate(s);
    switch (s.family) {
        case Family::Selection: return selection_full(s);
        case Family::Dormant: return dormant_full(s, -1);
        default: return z_side_table(s);
    }
}

ProbTable selection_window(const ProbTable& full, const std::string& var, int max_state) {
    std::vector<int> keep;
    for (int k = 0; k <= max_state; ++k)
        if (3 * k > max_state && 3 * k < 2 * max_state) keep.push_back(k);
    if (keep.empty()) throw SimError("selection window is empty");
    return condition(full, {{var, keep}});
}

ProbTable observed_table(const GlmSpec& s) {
    ProbTable full = glm_exact_table(s);
    if (s.family == Family::Selection) return selection_window(full, "S", s.n);
    if (s.family == Family::Dormant) return marginal(full, {"X", "V1", "V2", "V3", "Z"});
    return full;
}

ProbTable analysis_table(const GlmSpec& s) {
    if (s.family == Family::Dormant) return dormant_identified_table(s, 1);
    return observed_table(s);
}

ProbTable identified_do_table(const ProbTable& obs, int v3) {
    ProbTable o = marginal(obs, {"X", "V1", "V2", "V3", "Z"});
    const int nv2 = o.cardinality("V2"), nz = o.cardinality("Z");
    ProbTable pxv2 = marginal(o, {"X", "V2"});
    ProbTable pv1 = marginal(o, {"V1"});
    ProbTable pxv1v2v3 = marginal(o, {"X", "V1", "V2", "V3"});
    std::vector<VariableSpec> vars{{"X", 2}, {"V1", 2}, {"V2", nv2}, {"Z", nz}};
    std::vector<double> mass(state_space_size(vars), 0.0);
    std::size_t flat = 0;
    for (int x = 0; x < 2; ++x)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int v2 = 0; v2 < nv2; ++v2) {
                double pa = pxv1v2v3.at({x, v1, v2, v3});
                double w = pxv2.at({x, v2}) * pv1.at({v1});
                if (pa <= 0.0) {
                    if (w > 0.0) throw SimError("positivity violated");
                    flat += nz;
                    continue;
                }
                for (int z = 0; z < nz; ++z) mass[flat++] = o.at({x, v1, v2, v3, z}) / pa * w;
            }
    double t = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (auto& m : mass) m /= t;
    return ProbTable(vars, mass);
}

ProbTable dormant_identified_table(const GlmSpec& s, int v3) {
    if (s.family != Family::Dormant) throw SimError("identified table needs the dormant family");
    return identified_do_table(observed_table(s), v3);
}

ProbTable dormant_surgical_table(const GlmSpec& s, int v3) {
    if (s.family != Family::Dormant) throw SimError("surgical table needs the dormant family");
    validate(s);
    return marginal(dormant_full(s, v3), {"X", "V1", "V2", "Z"});
}

bool passes_faithfulness(const GlmSpec& s, double margin) {
    validate(s);
    if (is_glm_family(s.family) || s.family == Family::RoundedExp) {
        const Family f = s.family == Family::RoundedExp ? s.base : s.family;
        const auto states = parent_states(f, s.a);
        if (s.family == Family::RoundedExp && std::exp(rounded_exp_hmax(s)) > kRoundedExpMeanCap) return false;
        for (std::size_t i = 0; i < states.size(); ++i)
            for (std::size_t j = i + 1; j < states.size(); ++j) {
                if (states[i].key == states[j].key) continue;
                double d = s.family == Family::RoundedExp ? std::abs(std::exp(states[i].h) - std::exp(states[j].h))
                                                          : std::abs(logistic(states[i].h) - logistic(states[j].h));
                if (d < (s.family == Family::RoundedExp ? kRoundedExpMargin : margin)) return false;
            }
        return true;
    }
    if (s.family == Family::Selection) {
        ProbTable w;
        try {
            w = observed_table(s);
        } catch (const std::exception&) {
            return false;
        }
        ProbTable m = marginal(w, {"X", "V1", "Z"});
        double pz[2][2];
        for (int x = 0; x < 2; ++x)
            for (int v1 = 0; v1 < 2; ++v1) {
                double p0 = m.at({x, v1, 0}), p1 = m.at({x, v1, 1});
                pz[x][v1] = p1 / (p0 + p1);
            }
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                int xi = i / 2, vi = i % 2, xj = j / 2, vj = j % 2;
                if (xi + vi == xj + vj) continue;
                if (std::abs(pz[xi][vi] - pz[xj][vj]) < margin) return false;
            }
        return normalized_info(w, {"X", "V1"}) >= 0.05;
    }
    // Dormant
    for (int u = 0; u < 2; ++u) {
        double p[3];
        for (int sum = 0; sum < 3; ++sum) p[sum] = logistic(h_sum(s.a, sum > 0 ? 1 : 0, sum > 1 ? 1 : 0, u));
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (std::abs(p[i] - p[j]) < margin) return false;
    }
    ProbTable d = dormant_identified_table(s, 1);
    return normalized_info(d, {"X", "V1"}) >= 0.05 && normalized_info(d, {"V2"}) >= 0.05;
}

std::string target_variable() { return "Z"; }
std::string source_variable() { return "X"; }

std::vector<VarList> input_pools(const GlmSpec& s) {
    Family f = s.family == Family::RoundedExp ? s.base : s.family;
    if (f == Family::SumViaY) return {{"X", "V1"}, {"X", "V1", "Y"}};
    return {{"X", "V1"}, {"X", "V1", "V2"}};
}

VarList information_inputs(const GlmSpec& s) {
    Family f = s.family == Family::RoundedExp ? s.base : s.family;
    switch (f) {
        case Family::Sum:
        case Family::Selection:
        case Family::Dormant: return {"X", "V1"};
        case Family::SumViaY: return {"X", "V1", "Y"};
        default: return {"X", "V1", "V2"};
    }
}

double information_measure(const GlmSpec& s) { return normalized_info(analysis_table(s), information_inputs(s)); }

std::string stratum_name(Stratum s) {
    switch (s) {
        case Stratum::Low: return "low";
        case Stratum::Medium: return "medium";
        case Stratum::High: return "high";
    }
    return "?";
}

std::pair<double, double> stratum_bounds(Family f, Family base) {
    switch (f) {
        case Family::Sum: return {0.05, 0.1};
        case Family::SumAux:
        case Family::NoStat:
        case Family::TwoSums: return {0.15, 0.25};
        case Family::SumViaY:
        case Family::Products: return {0.1, 0.2};
        case Family::Selection:
        case Family::Dormant: return {0.1, 0.15};
        case Family::RoundedExp: return base == Family::Sum ? std::pair{0.15, 0.3} : std::pair{0.2, 0.4};
    }
    return {0.0, 1.0};
}

Stratum stratify(double value, std::pair<double, double> bounds) {
    if (value < bounds.first) return Stratum::Low;
    if (value < bounds.second) return Stratum::Medium;
    return Stratum::High;
}

std::optional<std::vector<int>> analytic_labels(const GlmSpec& s, const VarList& inputs) {
    Family f = s.family == Family::RoundedExp ? s.base : s.family;
    const VarList xv1{"X", "V1"}, xv1v2{"X", "V1", "V2"}, xv1y{"X", "V1", "Y"};
    std::vector<std::vector<int>> keys;
    if (inputs == xv1 && (f == Family::Sum || f == Family::Selection || f == Family::Dormant)) {
        for (int x = 0; x < 2; ++x)
            for (int v1 = 0; v1 < 2; ++v1) keys.push_back({x + v1});
    } else if ((inputs == xv1v2 && f != Family::SumViaY && f != Family::NoStat && is_glm_family(f)) ||
               (inputs == xv1y && f == Family::SumViaY)) {
        for (const auto& ps : parent_states(f, std::vector<double>(coefficient_count(f), 0.0))) keys.push_back(ps.key);
    } else {
        return std::nullopt;
    }
    std::map<std::vector<int>, int> ids;
    std::vector<int> labels;
    for (const auto& k : keys) {
        auto it = ids.emplace(k, static_cast<int>(ids.size())).first;
        labels.push_back(it->second);
    }
    return canonical_labels(labels);
}

SufficientStatistic coarsest_sufficient_partition(const ProbTable& p, const VarList& inputs, const std::string& z,
                                                  double tol) {
    IBProblem prob = make_ib_problem(p, inputs, z);
    std::vector<int> labels(prob.nx, -1);
    std::vector<int> reps;
    for (int x = 0; x < prob.nx; ++x) {
        for (std::size_t r = 0; r < reps.size() && labels[x] < 0; ++r) {
            double d = 0.0;
            for (int k = 0; k < prob.nz; ++k)
                d = std::max(d, std::abs(prob.pz_x[static_cast<std::size_t>(x) * prob.nz + k] -
                                         prob.pz_x[static_cast<std::size_t>(reps[r]) * prob.nz + k]));
            if (d <= tol) labels[x] = static_cast<int>(r);
        }
        if (labels[x] < 0) {
            labels[x] = static_cast<int>(reps.size());
            reps.push_back(x);
        }
    }
    return make_statistic(prob.inputs, prob.input_cards, labels);
}

bool merges_source_states(const SufficientStatistic& t, const std::string& x) {
    auto it = std::find(t.inputs.begin(), t.inputs.end(), x);
    if (it == t.inputs.end()) return false;
    const std::size_t xi = static_cast<std::size_t>(it - t.inputs.begin());
    std::size_t stride = 1;
    for (std::size_t j = xi + 1; j < t.inputs.size(); ++j) stride *= static_cast<std::size_t>(t.input_cards[j]);
    std::map<int, int> x_of_label;
    for (std::size_t s = 0; s < t.labels.size(); ++s) {
        int xv = static_cast<int>((s / stride) % t.input_cards[xi]);
        auto [pos, fresh] = x_of_label.emplace(t.labels[s], xv);
        if (!fresh && pos->second != xv) return true;
    }
    return false;
}

namespace {

GlmSpec draw_spec(Family f, const SuiteOptions& opt, Rng& rng) {
    GlmSpec s;
    s.family = f;
    s.base = opt.base;
    s.a.resize(coefficient_count(f, opt.base));
    for (auto& c : s.a) c = rng.uniform(-opt.coefficient_bound, opt.coefficient_bound);
    return s;
}

struct Cell {
    int n;
    double sigma;
    double px, pv1;
};

void apply_cell(GlmSpec& s, const Cell& c) {
    s.n = c.n;
    s.sigma = c.sigma;
    s.p_x = c.px;
    s.p_v1 = c.pv1;
}

bool faithful_quiet(const GlmSpec& s, double margin) {
    try {
        return passes_faithfulness(s, margin);
    } catch (const SimError&) {
        return false;
    }
}

}  // namespace

std::vector<SystemConfig> generate_suite(Family f, const SuiteOptions& opt) {
    if (opt.k < 0) throw SimError("negative K");
    std::vector<Cell> cells;
    const bool sigma_grid = f == Family::RoundedExp;
    const std::size_t nsteps = sigma_grid ? opt.sigma_set.size() : opt.n_set.size();
    for (std::size_t i = 0; i < nsteps; ++i)
        for (double px : opt.px_set)
            for (double pv1 : opt.pv1_set)
                cells.push_back({sigma_grid ? 4 : opt.n_set[i], sigma_grid ? opt.sigma_set[i] : 1.0, px, pv1});
    if (cells.empty()) throw SimError("empty grid");
    // selection and dormant acceptance depends on the cell, so those draw per cell
    const bool per_cell = f == Family::Selection || f == Family::Dormant;
    std::vector<SystemConfig> out;
    long used = 0;
    auto finish = [&](GlmSpec s, int draw, std::uint64_t seed) {
        SystemConfig c;
        c.spec = std::move(s);
        c.draw = draw;
        c.seed = seed;
        c.index = static_cast<int>(out.size());
        c.info = information_measure(c.spec);
        c.stratum = stratify(c.info, stratum_bounds(f, opt.base));
        out.push_back(std::move(c));
    };
    for (int k = 0; k < opt.k; ++k) {
        std::vector<const Cell*> mine;
        if (opt.full_grid) {
            for (const auto& c : cells) mine.push_back(&c);
        } else {
            Rng pick(derive_seed({opt.seed, 0x63656c6cULL, static_cast<std::uint64_t>(k)}));
            mine.push_back(&cells[pick.below(cells.size())]);
        }
        if (!per_cell) {
            Rng rng(derive_seed({opt.seed, static_cast<std::uint64_t>(k)}));
            for (;;) {
                if (++used > opt.rejection_budget) throw SimError("rejection budget exceeded");
                GlmSpec s = draw_spec(f, opt, rng);
                bool ok = true;
                for (const Cell* c : mine) {
                    apply_cell(s, *c);
                    if (!(ok = faithful_quiet(s, opt.margin))) break;
                }
                if (!ok) continue;
                for (const Cell* c : mine) {
                    apply_cell(s, *c);
                    finish(s, k, opt.seed);
                }
                break;
            }
        } else {
            for (std::size_t ci = 0; ci < mine.size(); ++ci) {
                Rng rng(derive_seed({opt.seed, static_cast<std::uint64_t>(k), ci + 1}));
                for (;;) {
                    if (++used > opt.rejection_budget) throw SimError("rejection budget exceeded");
                    GlmSpec s = draw_spec(f, opt, rng);
                    apply_cell(s, *mine[ci]);
                    if (!faithful_quiet(s, opt.margin)) continue;
                    finish(s, k, opt.seed);
                    break;
                }
            }
        }
    }
    return out;
}

SampleDataset sample_table(const ProbTable& p, std::size_t n, std::uint64_t seed) {
    SampleDataset d;
    d.variables = p.variables();
    std::vector<double> cdf(p.size());
    std::partial_sum(p.mass().begin(), p.mass().end(), cdf.begin());
    const double total = cdf.empty() ? 0.0 : cdf.back();
    Rng rng(seed);
    d.cells.reserve(n * p.num_vars());
    for (std::size_t r = 0; r < n; ++r) {
        double u = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t flat = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), p.size() - 1);
        while (p.mass()[flat] == 0.0 && flat > 0) --flat;
        for (std::size_t v = 0; v < p.num_vars(); ++v) d.cells.push_back(p.state_of(flat, static_cast<int>(v)));
    }
    return d;
}

SampleDataset sample(const GlmSpec& s, std::size_t n, std::uint64_t seed) {
    if (s.family != Family::Selection) return sample_table(observed_table(s), n, seed);
    ProbTable full = glm_exact_table(s);
    const int si = full.index_of("S");
    SampleDataset out;
    for (const auto& v : full.variables())
        if (v.name != "S") out.variables.push_back(v);
    std::uint64_t round = 0;
    std::size_t kept = 0;
    while (kept < n) {
        SampleDataset batch = sample_table(full, std::max<std::size_t>(n, 1024), derive_seed({seed, round++}));
        const std::size_t k = full.num_vars();
        for (std::size_t r = 0; r < batch.rows() && kept < n; ++r) {
            int sv = batch.at(r, si);
            if (!(3 * sv > s.n && 3 * sv < 2 * s.n)) continue;
            for (std::size_t c = 0; c < k; ++c)
                if (static_cast<int>(c) != si) out.cells.push_back(batch.at(r, c));
            ++kept;
        }
        if (round > 100000) throw SimError("selection window too narrow to sample");
    }
    return out;
}

nlohmann::json to_json(const GlmSpec& s) {
    nlohmann::json j{{"family", family_name(s.family)}, {"a", s.a},       {"n", s.n},      {"sigma", s.sigma},
                     {"p_x", s.p_x},                    {"p_v1", s.p_v1}, {"p_v2", s.p_v2}};
    if (s.family == Family::RoundedExp) j["base"] = family_name(s.base);
    return j;
}

GlmSpec spec_from_json(const nlohmann::json& j) {
    GlmSpec s;
    s.family = family_from_name(j.at("family").get<std::string>());
    if (j.contains("base")) s.base = family_from_name(j.at("base").get<std::string>());
    s.a = j.at("a").get<std::vector<double>>();
    s.n = j.value("n", 4);
    s.sigma = j.value("sigma", 1.0);
    s.p_x = j.value("p_x", 0.5);
    s.p_v1 = j.value("p_v1", 0.5);
    s.p_v2 = j.value("p_v2", 0.5);
    validate(s);
    return s;
}

nlohmann::json to_json(const ProbTable& p) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : p.variables()) vars.push_back({{"name", v.name}, {"cardinality", v.cardinality}});
    return {{"variables", vars}, {"mass", p.mass()}};
}

ProbTable table_from_json(const nlohmann::json& j) {
    std::vector<VariableSpec> vars;
    for (const auto& v : j.at("variables")) vars.push_back({v.at("name").get<std::string>(), v.at("cardinality").get<int>()});
    return ProbTable(vars, j.at("mass").get<std::vector<double>>());
}

}  // namespace suffstat
