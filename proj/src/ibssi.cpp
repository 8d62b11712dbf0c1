#include "suffstat/ibssi.hpp"

#include <algorithm>

#include "suffstat/rng.hpp"

namespace suffstat {

namespace {

constexpr double kPositiveEntropy = 1e-12;

VarList with_target(const VarList& inputs, const std::string& z) {
    VarList keep = inputs;
    keep.push_back(z);
    return keep;
}

void check_query(const IbssiQuery& q) {
    if (std::find(q.inputs.begin(), q.inputs.end(), q.x) == q.inputs.end())
        throw IbError("x must belong to the input set");
    if (std::find(q.inputs.begin(), q.inputs.end(), q.z) != q.inputs.end())
        throw IbError("target must not belong to the input set");
}

}  // namespace

std::vector<std::pair<double, SufficientStatistic>> StatisticVerdict::acceptances() const {
    std::vector<std::pair<double, SufficientStatistic>> out;
    for (const auto& b : trace)
        if (b.accepted) out.emplace_back(b.beta_prime, *b.statistic);
    return out;
}

CriteriaResult evaluate_criteria(const SufficientStatistic& t, const ProbTable& test, const std::string& x,
                                 const std::string& z, const SelectionThresholds& th, bool with_local) {
    ProbTable m = apply_statistic(t, marginal(test, with_target(t.inputs, z)), "__theta");
    CriteriaResult r;
    r.h_x = entropy(m, {x});
    r.h_z = entropy(m, {z});
    r.h_x_given = entropy(m, {x}, {"__theta"});
    r.h_z_given = entropy(m, {z}, {"__theta"});
    r.i_xz = mutual_info(m, {x}, {z});
    r.i_given = mutual_info(m, {x}, {z}, {"__theta"});
    r.c_x = r.h_x_given > th.a_hx * r.h_x;
    r.c_z = r.h_z_given > th.a_hz * r.h_z;
    r.c_i = r.i_given < th.a_i * r.i_xz;
    r.local = with_local ? local_criteria(t, test, x, z) : true;
    return r;
}

BetaOutcome algorithm1(const IbssiQuery& q, double beta_prime) {
    check_query(q);
    const auto& opt = q.options;
    BetaOutcome out;
    out.beta_prime = beta_prime;
    IBProblem prob = make_ib_problem(q.train, q.inputs, q.z);
    const int n_x = prob.nx;
    if (n_x < 3) throw IbError("input too small to compress");
    double beta = 0.0;
    try {
        beta = scale_beta(prob, beta_prime);
    } catch (const IbError& e) {
        out.reason = e.what();
        return out;
    }
    auto call = [&](int max_card) {
        IBOptions o;
        o.beta = beta;
        o.max_cardinality = max_card;
        o.restarts = opt.restarts;
        o.tolerance = opt.tolerance;
        o.max_iterations = opt.max_iterations;
        o.budget_seconds = opt.budget_seconds;
        o.seed = derive_seed({opt.seed, double_bits(beta_prime), static_cast<std::uint64_t>(max_card)});
        SoftMapping m = opt.parallel ? ib_optimize(prob, o) : ib_optimize_serial(prob, o);
        SufficientStatistic t = harden(m, prob);
        out.calls.push_back({beta_prime, max_card, t.cardinality, m.budget_exceeded});
        return t;
    };

    int max_card = n_x;
    std::vector<SufficientStatistic> theta;
    theta.push_back(call(max_card));
    if (theta[0].cardinality >= n_x) {
        if (opt.strict_first_call) {
            out.reason = "no compression at full cardinality";
            return out;
        }
        // relaxed: restart the descent from the first bound that actually compresses
        while (theta[0].cardinality >= max_card && max_card > 2) theta[0] = call(--max_card);
        if (theta[0].cardinality >= max_card) {
            out.reason = "no compression at any cardinality";
            return out;
        }
    }
    const int top = max_card;
    int k = 0;
    do {
        ++k;
        max_card = top - k;
        theta.push_back(call(max_card));
    } while (max_card > 2 && theta[k].cardinality == theta[k - 1].cardinality);

    if (theta[k].cardinality > theta[k - 1].cardinality) {
        out.reason = "cardinality increased";
        return out;
    }
    if (theta[k].cardinality < theta[k - 1].cardinality) --k;
    if (k == 0) {
        out.reason = "no two consecutive calls share a cardinality";
        return out;
    }
    if (!statistic_partition_equal(theta[k], theta[k - 1])) {
        out.reason = "partition changed between equal-cardinality calls";
        return out;
    }
    out.statistic = theta[k];
    out.criteria = evaluate_criteria(theta[k], q.test, q.x, q.z, opt.thresholds, opt.local_criteria);
    out.accepted = out.criteria->all();
    if (!out.accepted) {
        const auto& c = *out.criteria;
        out.reason = !c.c_x ? "H(x|theta) criterion failed"
                     : !c.c_z ? "H(z|theta) criterion failed"
                     : !c.c_i ? "I(x;z|theta) criterion failed"
                              : "local criteria failed";
    }
    return out;
}

StatisticVerdict ibssi_sweep(const IbssiQuery& q) {
    check_query(q);
    StatisticVerdict v;
    v.inputs = q.inputs;
    std::vector<double> betas = q.options.beta_primes;
    if (betas.empty()) throw IbError("empty beta' set");
    std::sort(betas.begin(), betas.end());
    betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
    const bool early = q.options.stop_at_first && !q.options.consistent_across_beta;
    for (double b : betas) {
        v.trace.push_back(algorithm1(q, b));
        for (const auto& c : v.trace.back().calls) v.budget_exceeded = v.budget_exceeded || c.budget_exceeded;
        if (v.trace.back().accepted && early) break;
    }
    auto acc = v.acceptances();
    if (acc.empty()) return v;
    if (q.options.consistent_across_beta) {
        if (acc.size() < 2) return v;
        for (const auto& [b, t] : acc)
            if (!statistic_partition_equal(t, acc.front().second)) return v;
    }
    v.accepted = true;
    v.beta_prime = acc.front().first;
    v.statistic = acc.front().second;
    return v;
}

EscalationResult input_escalation(const std::string& x, const std::string& z, const std::vector<VarList>& pools,
                                  const IbssiQuery& tmpl) {
    if (pools.empty()) throw IbError("empty candidate pool");
    EscalationResult r;
    for (const auto& pool : pools) {
        IbssiQuery q = tmpl;
        q.x = x;
        q.z = z;
        q.inputs = pool;
        r.attempts.push_back(ibssi_sweep(q));
        if (r.attempts.back().accepted) {
            r.verdict = r.attempts.back();
            r.chosen = pool;
            return r;
        }
    }
    r.verdict = r.attempts.back();
    return r;
}

bool local_criteria(const SufficientStatistic& t, const ProbTable& p, const std::string& x, const std::string& z) {
    VarList keep = t.inputs;
    if (std::find(keep.begin(), keep.end(), x) == keep.end()) keep.push_back(x);
    keep.push_back(z);
    ProbTable m = marginal(apply_statistic(t, marginal(p, keep), "__theta"), {"__theta", x, z});
    const int nt = m.cardinality("__theta");
    for (int th = 0; th < nt; ++th) {
        ProbTable c;
        try {
            c = condition(m, {{"__theta", {th}}});
        } catch (const ProbError&) {
            continue;  // theta value without mass
        }
        if (entropy(c, {z}) > kPositiveEntropy && entropy(c, {x}) > kPositiveEntropy) return true;
    }
    return false;
}

ConsistencyResult consistency_score(const SufficientStatistic& t, const ProbTable& truth, const std::string& x,
                                    const std::string& z) {
    VarList keep = t.inputs;
    if (std::find(keep.begin(), keep.end(), x) == keep.end()) keep.push_back(x);
    keep.push_back(z);
    ProbTable m = apply_statistic(t, marginal(truth, keep), "__theta");
    ConsistencyResult r;
    r.i_given = mutual_info(m, {x}, {z}, {"__theta"});
    r.h_x_given = entropy(m, {x}, {"__theta"});
    r.h_z_given = entropy(m, {z}, {"__theta"});
    r.consistent = r.i_given <= 1e-9 && r.h_x_given > kPositiveEntropy && r.h_z_given > kPositiveEntropy;
    return r;
}

nlohmann::json to_json(const StatisticVerdict& v) {
    nlohmann::json j;
    j["accepted"] = v.accepted;
    j["inputs"] = v.inputs;
    j["budget_exceeded"] = v.budget_exceeded;
    if (v.statistic) {
        j["statistic"] = to_json(*v.statistic);
        j["beta_prime"] = v.beta_prime;
    }
    j["trace"] = nlohmann::json::array();
    for (const auto& b : v.trace) {
        nlohmann::json e{{"beta_prime", b.beta_prime}, {"accepted", b.accepted}, {"reason", b.reason}};
        e["calls"] = nlohmann::json::array();
        for (const auto& c : b.calls)
            e["calls"].push_back({{"max_cardinality", c.max_cardinality},
                                  {"cardinality", c.cardinality},
                                  {"budget_exceeded", c.budget_exceeded}});
        if (b.statistic) e["candidate"] = to_json(*b.statistic);
        if (b.criteria) {
            const auto& c = *b.criteria;
            e["criteria"] = {{"c_x", c.c_x},         {"c_z", c.c_z},         {"c_i", c.c_i},
                             {"local", c.local},     {"h_x", c.h_x},         {"h_x_given", c.h_x_given},
                             {"h_z", c.h_z},         {"h_z_given", c.h_z_given}, {"i_xz", c.i_xz},
                             {"i_given", c.i_given}};
        }
        j["trace"].push_back(e);
    }
    return j;
}

}  // namespace suffstat
