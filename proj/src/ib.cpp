#include "suffstat/ib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <omp.h>

#include "suffstat/rng.hpp"

namespace suffstat {

IBProblem make_ib_problem(const ProbTable& joint, const VarList& inputs, const std::string& target) {
    if (inputs.empty()) throw IbError("empty input set");
    for (const auto& v : inputs)
        if (v == target) throw IbError("target " + target + " is among the inputs");
    VarList keep = inputs;
    keep.push_back(target);
    ProbTable m = marginal(joint, keep);
    IBProblem prob;
    prob.inputs = inputs;
    prob.target = target;
    prob.nx = 1;
    for (const auto& v : inputs) {
        prob.input_cards.push_back(joint.cardinality(v));
        prob.nx *= joint.cardinality(v);
    }
    prob.nz = joint.cardinality(target);
    const int nx = prob.nx, nz = prob.nz;
    prob.px.assign(nx, 0.0);
    prob.pz_x.assign(static_cast<std::size_t>(nx) * nz, 0.0);
    std::vector<double> pz(nz, 0.0);
    // target is the last (fastest) variable of the marginal
    for (int x = 0; x < nx; ++x)
        for (int z = 0; z < nz; ++z) {
            double v = m.mass()[static_cast<std::size_t>(x) * nz + z];
            prob.px[x] += v;
            pz[z] += v;
            prob.pz_x[static_cast<std::size_t>(x) * nz + z] = v;
        }
    for (int x = 0; x < nx; ++x) {
        double* row = &prob.pz_x[static_cast<std::size_t>(x) * nz];
        if (prob.px[x] > 0.0) {
            for (int z = 0; z < nz; ++z) row[z] /= prob.px[x];
        } else {
            std::copy(pz.begin(), pz.end(), row);
        }
    }
    prob.h_x = entropy(m, inputs);
    prob.i_xz = mutual_info(m, inputs, {target});
    return prob;
}

double scale_beta(const IBProblem& prob, double beta_prime) {
    if (!(beta_prime > 0.0)) throw IbError("beta' must be positive");
    if (prob.h_x <= 0.0) throw IbError("zero-entropy input");
    if (prob.i_xz < 1e-9) throw IbError("no information to preserve");
    return beta_prime * prob.h_x / prob.i_xz;
}

double scale_beta(const ProbTable& joint, const VarList& inputs, const std::string& target, double beta_prime) {
    return scale_beta(make_ib_problem(joint, inputs, target), beta_prime);
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
    return derive_seed({seed, static_cast<std::uint64_t>(restart)});
}

namespace {

using Clock = std::chrono::steady_clock;

void cluster_marginal(const IBProblem& prob, const std::vector<double>& rows, int nt, std::vector<double>& pt) {
    pt.assign(nt, 0.0);
    for (int x = 0; x < prob.nx; ++x) {
        if (prob.px[x] == 0.0) continue;
        const double* r = &rows[static_cast<std::size_t>(x) * nt];
        for (int t = 0; t < nt; ++t) pt[t] += prob.px[x] * r[t];
    }
}

// p(z|t) into pzt (nt * nz); clusters without mass get p(z).
void cluster_conditional(const IBProblem& prob, const std::vector<double>& rows, int nt, const std::vector<double>& pt,
                         std::vector<double>& pzt) {
    const int nz = prob.nz;
    pzt.assign(static_cast<std::size_t>(nt) * nz, 0.0);
    for (int x = 0; x < prob.nx; ++x) {
        if (prob.px[x] == 0.0) continue;
        const double* r = &rows[static_cast<std::size_t>(x) * nt];
        const double* pz = &prob.pz_x[static_cast<std::size_t>(x) * nz];
        for (int t = 0; t < nt; ++t) {
            double w = prob.px[x] * r[t];
            if (w == 0.0) continue;
            double* out = &pzt[static_cast<std::size_t>(t) * nz];
            for (int z = 0; z < nz; ++z) out[z] += w * pz[z];
        }
    }
    for (int t = 0; t < nt; ++t) {
        double* out = &pzt[static_cast<std::size_t>(t) * nz];
        if (pt[t] > 0.0) {
            for (int z = 0; z < nz; ++z) out[z] /= pt[t];
        } else {
            std::fill(out, out + nz, 1.0 / nz);
        }
    }
}

SoftMapping run_from(const IBProblem& prob, double beta, std::vector<double> rows, int nt, double tolerance,
                     int max_iterations, std::vector<double>* trace, const Clock::time_point* deadline) {
    const int nx = prob.nx, nz = prob.nz;
    std::vector<double> neg_h(nx, 0.0);
    for (int x = 0; x < nx; ++x)
        for (int z = 0; z < nz; ++z) {
            double p = prob.pz_x[static_cast<std::size_t>(x) * nz + z];
            if (p > 0.0) neg_h[x] += p * std::log(p);
        }
    const double log_floor = std::log(kKlClampFloor);
    std::vector<double> pt, pzt, logq(static_cast<std::size_t>(nt) * nz), next(rows.size()), e(nt);
    SoftMapping out;
    out.nx = nx;
    out.nt = nt;
    int it = 0;
    for (; it < max_iterations; ++it) {
        if (deadline && (it & 255) == 255 && Clock::now() > *deadline) {
            out.budget_exceeded = true;
            break;
        }
        cluster_marginal(prob, rows, nt, pt);
        cluster_conditional(prob, rows, nt, pt, pzt);
        for (std::size_t i = 0; i < pzt.size(); ++i) logq[i] = pzt[i] > kKlClampFloor ? std::log(pzt[i]) : log_floor;
        double delta = 0.0;
        for (int x = 0; x < nx; ++x) {
            const double* pz = &prob.pz_x[static_cast<std::size_t>(x) * nz];
            double emin = std::numeric_limits<double>::infinity();
            for (int t = 0; t < nt; ++t) {
                const double* lq = &logq[static_cast<std::size_t>(t) * nz];
                double cross = 0.0;
                for (int z = 0; z < nz; ++z) cross += pz[z] * lq[z];
                e[t] = beta * std::max(0.0, neg_h[x] - cross);
                if (pt[t] > 0.0) emin = std::min(emin, e[t]);
            }
            double* nr = &next[static_cast<std::size_t>(x) * nt];
            double s = 0.0;
            for (int t = 0; t < nt; ++t) {
                nr[t] = pt[t] > 0.0 ? pt[t] * std::exp(-(e[t] - emin)) : 0.0;
                s += nr[t];
            }
            for (int t = 0; t < nt; ++t) {
                nr[t] /= s;
                delta = std::max(delta, std::abs(nr[t] - rows[static_cast<std::size_t>(x) * nt + t]));
            }
        }
        rows.swap(next);
        if (trace) trace->push_back(ib_objective(prob, rows, nt, beta));
        if (delta < tolerance) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.iterations = it;
    out.objective = ib_objective(prob, rows, nt, beta, &out.i_tx, &out.i_tz);
    cluster_marginal(prob, rows, nt, out.pt);
    out.rows = std::move(rows);
    return out;
}

std::vector<double> dirichlet_start(int nx, int nt, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> rows(static_cast<std::size_t>(nx) * nt);
    for (int x = 0; x < nx; ++x) {
        double s = 0.0;
        for (int t = 0; t < nt; ++t) s += rows[static_cast<std::size_t>(x) * nt + t] = rng.exponential() + 1e-300;
        for (int t = 0; t < nt; ++t) rows[static_cast<std::size_t>(x) * nt + t] /= s;
    }
    return rows;
}

void check_options(const IBProblem& prob, const IBOptions& opt) {
    if (opt.max_cardinality < 1) throw IbError("max_cardinality must be positive");
    if (opt.max_cardinality > prob.nx) throw IbError("max_cardinality exceeds the input state space");
    if (opt.restarts < 1) throw IbError("restarts must be positive");
    if (!(opt.beta > 0.0)) throw IbError("beta must be positive");
}

bool better(const SoftMapping& a, const SoftMapping& b) {
    if (b.restart < 0) return true;
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.restart < b.restart;
}

SoftMapping optimize(const IBProblem& prob, const IBOptions& opt, bool parallel) {
    check_options(prob, opt);
    const bool has_deadline = opt.budget_seconds > 0.0;
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(opt.budget_seconds));
    std::vector<SoftMapping> runs(opt.restarts);
    std::vector<char> done(opt.restarts, 0);
    auto one = [&](int r) {
        if (has_deadline && Clock::now() > deadline) return;
        runs[r] = run_from(prob, opt.beta, dirichlet_start(prob.nx, opt.max_cardinality, restart_seed(opt.seed, r)),
                           opt.max_cardinality, opt.tolerance, opt.max_iterations, nullptr,
                           has_deadline ? &deadline : nullptr);
        runs[r].restart = r;
        done[r] = 1;
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < opt.restarts; ++r) one(r);
    } else {
        for (int r = 0; r < opt.restarts; ++r) one(r);
    }
    SoftMapping best;
    int count = 0;
    bool exceeded = false;
    for (int r = 0; r < opt.restarts; ++r) {
        if (!done[r]) {
            exceeded = true;
            continue;
        }
        ++count;
        exceeded = exceeded || runs[r].budget_exceeded;
        if (better(runs[r], best)) best = std::move(runs[r]);
    }
    if (count == 0) {
        // budget gone before the first restart finished: run one anyway so callers get a mapping
        best = run_from(prob, opt.beta, dirichlet_start(prob.nx, opt.max_cardinality, restart_seed(opt.seed, 0)),
                        opt.max_cardinality, opt.tolerance, opt.max_iterations, nullptr, nullptr);
        best.restart = 0;
        count = 1;
        exceeded = true;
    }
    best.restarts_run = count;
    best.budget_exceeded = exceeded;
    return best;
}

}  // namespace

double ib_objective(const IBProblem& prob, const std::vector<double>& rows, int nt, double beta, double* i_tx,
                    double* i_tz) {
    std::vector<double> pt, pzt;
    cluster_marginal(prob, rows, nt, pt);
    cluster_conditional(prob, rows, nt, pt, pzt);
    double itx = 0.0;
    for (int x = 0; x < prob.nx; ++x) {
        if (prob.px[x] == 0.0) continue;
        for (int t = 0; t < nt; ++t) {
            double r = rows[static_cast<std::size_t>(x) * nt + t];
            if (r > 0.0 && pt[t] > 0.0) itx += prob.px[x] * r * std::log2(r / pt[t]);
        }
    }
    std::vector<double> pz(prob.nz, 0.0);
    double hzt = 0.0;
    for (int t = 0; t < nt; ++t) {
        if (pt[t] <= 0.0) continue;
        for (int z = 0; z < prob.nz; ++z) {
            double q = pzt[static_cast<std::size_t>(t) * prob.nz + z];
            pz[z] += pt[t] * q;
            if (q > 0.0) hzt -= pt[t] * q * std::log2(q);
        }
    }
    double itz = entropy_bits(pz) - hzt;
    itx = std::max(0.0, itx);
    itz = std::max(0.0, itz);
    if (i_tx) *i_tx = itx;
    if (i_tz) *i_tz = itz;
    return itx - beta * itz;
}

SoftMapping ib_iterate(const IBProblem& prob, double beta, std::vector<double> start, int nt, double tolerance,
                       int max_iterations, std::vector<double>* trace) {
    if (start.size() != static_cast<std::size_t>(prob.nx) * nt) throw IbError("start mapping has wrong size");
    return run_from(prob, beta, std::move(start), nt, tolerance, max_iterations, trace, nullptr);
}

SoftMapping ib_single_run(const IBProblem& prob, double beta, int nt, double tolerance, int max_iterations,
                          std::uint64_t seed, std::vector<double>* trace) {
    return run_from(prob, beta, dirichlet_start(prob.nx, nt, seed), nt, tolerance, max_iterations, trace, nullptr);
}

SoftMapping ib_optimize(const IBProblem& prob, const IBOptions& opt) { return optimize(prob, opt, true); }
SoftMapping ib_optimize_serial(const IBProblem& prob, const IBOptions& opt) { return optimize(prob, opt, false); }

std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = remap.find(labels[i]);
        if (it == remap.end()) it = remap.emplace(labels[i], static_cast<int>(remap.size())).first;
        out[i] = it->second;
    }
    return out;
}

SufficientStatistic make_statistic(const VarList& inputs, const std::vector<int>& cards, std::vector<int> labels) {
    std::size_t space = 1;
    for (int c : cards) space *= static_cast<std::size_t>(c);
    if (inputs.size() != cards.size()) throw IbError("statistic inputs and cardinalities differ in length");
    if (labels.size() != space) throw IbError("statistic map is not total");
    SufficientStatistic t;
    t.inputs = inputs;
    t.input_cards = cards;
    t.labels = canonical_labels(labels);
    t.cardinality = t.labels.empty() ? 0 : *std::max_element(t.labels.begin(), t.labels.end()) + 1;
    return t;
}

SufficientStatistic harden(const SoftMapping& m, const IBProblem& prob) {
    std::vector<double> pt;
    cluster_marginal(prob, m.rows, m.nt, pt);
    std::vector<char> keep(m.nt, 0);
    bool any = false;
    for (int t = 0; t < m.nt; ++t) {
        keep[t] = pt[t] >= kEmptyClusterMass;
        any = any || keep[t];
    }
    if (!any) std::fill(keep.begin(), keep.end(), 1);
    std::vector<int> labels(m.nx, 0);
    for (int x = 0; x < m.nx; ++x) {
        int best = -1;
        for (int t = 0; t < m.nt; ++t) {
            if (!keep[t]) continue;
            if (best < 0 || m.rows[static_cast<std::size_t>(x) * m.nt + t] > m.rows[static_cast<std::size_t>(x) * m.nt + best])
                best = t;
        }
        labels[x] = best;
    }
    return make_statistic(prob.inputs, prob.input_cards, std::move(labels));
}

bool statistic_partition_equal(const SufficientStatistic& a, const SufficientStatistic& b) {
    if (a.inputs != b.inputs || a.input_cards != b.input_cards) throw IbError("statistics over different inputs");
    return canonical_labels(a.labels) == canonical_labels(b.labels);
}

ProbTable apply_statistic(const SufficientStatistic& t, const ProbTable& p, const std::string& name) {
    if (p.has(name)) throw IbError("variable name collision: " + name);
    std::vector<int> idx;
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        idx.push_back(p.index_of(t.inputs[i]));
        if (p.variables()[idx.back()].cardinality != t.input_cards[i])
            throw IbError("cardinality mismatch for " + t.inputs[i]);
    }
    auto vars = p.variables();
    vars.push_back({name, std::max(1, t.cardinality)});
    const int nt = std::max(1, t.cardinality);
    std::vector<double> mass(p.size() * nt, 0.0);
    for (std::size_t flat = 0; flat < p.size(); ++flat) {
        std::size_t x = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) x = x * t.input_cards[j] + p.state_of(flat, idx[j]);
        mass[flat * nt + t.labels[x]] = p.mass()[flat];
    }
    return ProbTable(std::move(vars), std::move(mass));
}

nlohmann::json to_json(const SufficientStatistic& t) {
    return {{"inputs", t.inputs}, {"input_cardinalities", t.input_cards}, {"labels", t.labels},
            {"cardinality", t.cardinality}};
}

SufficientStatistic statistic_from_json(const nlohmann::json& j) {
    return make_statistic(j.at("inputs").get<VarList>(), j.at("input_cardinalities").get<std::vector<int>>(),
                          j.at("labels").get<std::vector<int>>());
}

nlohmann::json to_json(const SoftMapping& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int x = 0; x < m.nx; ++x)
        rows.push_back(std::vector<double>(m.rows.begin() + static_cast<std::ptrdiff_t>(x) * m.nt,
                                           m.rows.begin() + static_cast<std::ptrdiff_t>(x + 1) * m.nt));
    return {{"rows", rows},
            {"objective", m.objective},
            {"i_tx", m.i_tx},
            {"i_tz", m.i_tz},
            {"iterations", m.iterations},
            {"converged", m.converged},
            {"restart", m.restart},
            {"restarts_run", m.restarts_run},
            {"budget_exceeded", m.budget_exceeded}};
}

}  // namespace suffstat
