#include "suffstat/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "suffstat/rng.hpp"

namespace suffstat {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::uint64_t family_key(Family f) { return static_cast<std::uint64_t>(f) + 1; }

std::size_t space_of(const ProbTable& p, const VarList& vars) {
    std::size_t s = 1;
    for (const auto& v : vars) s *= static_cast<std::size_t>(p.cardinality(v));
    return s;
}

// Training table for one draw; the dormant family estimates the identified do-table from observations.
ProbTable estimated_table(const GlmSpec& s, long n, std::uint64_t seed) {
    ProbTable t = estimate_joint(sample(s, static_cast<std::size_t>(n), seed));
    if (s.family == Family::Dormant) return identified_do_table(t, 1);
    return t;
}

bool family_has_statistic(const GlmSpec& s, const ProbTable& truth) {
    for (const auto& pool : input_pools(s))
        if (merges_source_states(coarsest_sufficient_partition(truth, pool, target_variable()), source_variable()))
            return true;
    return false;
}

}  // namespace

std::vector<BetaSet> default_beta_sets() { return {{"wide", kBetaSetWide}, {"narrow", kBetaSetNarrow}}; }

void ExperimentPlan::validate() const {
    if (families.empty()) throw SimError("plan has no families");
    if (n_grid.empty()) throw SimError("plan N grid is empty");
    if (beta_sets.empty()) throw SimError("plan has no beta' sets");
    for (long n : n_grid)
        if (n < 0) throw SimError("negative sample size");
    for (const auto& b : beta_sets)
        if (b.values.empty()) throw SimError("empty beta' set " + b.name);
    if (k < 1) throw SimError("K must be positive");
    if (repetitions < 1) throw SimError("repetitions must be positive");
    if (restarts < 1) throw SimError("restarts must be positive");
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::TruePositive: return "tp";
        case Outcome::FalsePositive: return "fp";
        case Outcome::TrueNegative: return "tn";
        case Outcome::Missed: return "missed";
    }
    return "?";
}

ConfigOutcome evaluate_config(const SystemConfig& c, long n, const BetaSet& betas, const ExperimentPlan& plan,
                              int repetition, bool parallel_ib) {
    const auto t0 = Clock::now();
    ConfigOutcome o;
    o.family = family_name(c.spec.family);
    o.n = n;
    o.beta_set = betas.name;
    o.config = c.index;
    o.repetition = repetition;
    o.stratum = c.stratum;
    o.info = c.info;
    const ProbTable truth = analysis_table(c.spec);
    o.has_statistic = family_has_statistic(c.spec, truth);
    const std::uint64_t base =
        derive_seed({plan.seed, family_key(c.spec.family), static_cast<std::uint64_t>(c.index),
                     static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(repetition)});
    IbssiQuery q;
    q.x = source_variable();
    q.z = target_variable();
    try {
        if (n == 0) {
            q.train = q.test = truth;
        } else {
            q.train = estimated_table(c.spec, n, derive_seed({base, 0}));
            q.test = estimated_table(c.spec, n, derive_seed({base, 1}));
        }
    } catch (const SimError& e) {
        o.note = e.what();
        o.outcome = o.has_statistic ? Outcome::Missed : Outcome::TrueNegative;
        o.seconds = since(t0);
        return o;
    }
    q.options.beta_primes = betas.values;
    q.options.thresholds = plan.thresholds;
    q.options.stop_at_first = false;
    q.options.restarts = plan.restarts;
    q.options.budget_seconds = plan.budget_seconds;
    q.options.seed = derive_seed({base, 2});
    q.options.parallel = parallel_ib;

    for (const auto& pool : input_pools(c.spec)) {
        if (space_of(q.train, pool) < 3) continue;
        q.inputs = pool;
        StatisticVerdict v = ibssi_sweep(q);
        o.budget_exceeded = o.budget_exceeded || v.budget_exceeded;
        auto acc = v.acceptances();
        if (acc.empty()) continue;
        o.selected = true;
        o.inputs = pool;
        o.cardinality = acc.front().second.cardinality;
        const auto truth_part = coarsest_sufficient_partition(truth, pool, q.z);
        bool all_consistent = o.has_statistic;
        for (const auto& [b, t] : acc) {
            all_consistent = all_consistent && consistency_score(t, truth, q.x, q.z).consistent;
            o.identified = o.identified || statistic_partition_equal(t, truth_part);
        }
        o.outcome = all_consistent ? Outcome::TruePositive : Outcome::FalsePositive;
        o.seconds = since(t0);
        return o;
    }
    o.outcome = o.has_statistic ? Outcome::Missed : Outcome::TrueNegative;
    o.seconds = since(t0);
    return o;
}

std::vector<RateRow> aggregate(const std::vector<ConfigOutcome>& outcomes) {
    struct Acc {
        int configs = 0, tp = 0, fp = 0, tn = 0, sel = 0, ident = 0, accepted = 0;
        double card = 0, seconds = 0;
    };
    using Key = std::tuple<std::string, long, std::string>;
    std::vector<Key> order;
    std::map<Key, std::map<std::string, Acc>> groups;
    for (const auto& o : outcomes) {
        Key k{o.family, o.n, o.beta_set};
        if (!groups.count(k)) order.push_back(k);
        for (const std::string& s : {stratum_name(o.stratum), std::string("all")}) {
            Acc& a = groups[k][s];
            ++a.configs;
            a.tp += o.outcome == Outcome::TruePositive;
            a.fp += o.outcome == Outcome::FalsePositive;
            a.tn += o.outcome == Outcome::TrueNegative;
            a.sel += o.selected;
            a.ident += o.identified;
            if (o.selected) {
                ++a.accepted;
                a.card += o.cardinality;
            }
            a.seconds += o.seconds;
        }
    }
    std::vector<RateRow> rows;
    for (const auto& k : order) {
        for (const std::string s : {"low", "medium", "high", "all"}) {
            auto it = groups[k].find(s);
            if (it == groups[k].end()) continue;
            const Acc& a = it->second;
            RateRow r;
            std::tie(r.family, r.n, r.beta_set) = k;
            r.stratum = s;
            r.configs = a.configs;
            const double d = a.configs;
            r.tp_rate = a.tp / d;
            r.fp_rate = a.fp / d;
            r.tn_rate = a.tn / d;
            r.selection_ratio = a.sel / d;
            r.identification_ratio = a.ident / d;
            r.mean_cardinality = a.accepted ? a.card / a.accepted : 0.0;
            r.seconds = a.seconds;
            rows.push_back(r);
        }
    }
    return rows;
}

ExperimentReport run_tpfp(const ExperimentPlan& plan) {
    plan.validate();
    const auto t0 = Clock::now();
    struct Task {
        const SystemConfig* config;
        long n;
        const BetaSet* betas;
        int rep;
    };
    std::vector<std::vector<SystemConfig>> suites;
    for (Family f : plan.families) {
        SuiteOptions so;
        so.k = plan.k;
        so.full_grid = plan.full_grid;
        so.base = plan.base;
        so.seed = derive_seed({plan.seed, family_key(f)});
        suites.push_back(generate_suite(f, so));
    }
    std::vector<Task> tasks;
    for (const auto& suite : suites)
        for (long n : plan.n_grid)
            for (const auto& b : plan.beta_sets)
                for (const auto& c : suite)
                    for (int rep = 0; rep < plan.repetitions; ++rep) tasks.push_back({&c, n, &b, rep});
    ExperimentReport r;
    r.plan = plan;
    r.outcomes.resize(tasks.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(tasks.size()); ++i)
        r.outcomes[i] = evaluate_config(*tasks[i].config, tasks[i].n, *tasks[i].betas, plan, tasks[i].rep, false);
    for (const auto& o : r.outcomes) r.budget_exceeded = r.budget_exceeded || o.budget_exceeded;
    r.rows = aggregate(r.outcomes);
    r.seconds = since(t0);
    return r;
}

std::vector<CurvePoint> run_cardinality_curve(const CurvePlan& plan) {
    SuiteOptions so;
    so.k = plan.k;
    so.full_grid = false;
    so.seed = derive_seed({plan.seed, family_key(plan.family)});
    const auto suite = generate_suite(plan.family, so);
    struct Cell {
        int configs = 0, selected = 0;
        double card = 0;
    };
    std::vector<CurvePoint> pts;
    std::map<std::tuple<std::size_t, std::size_t, int>, Cell> cells;
    std::vector<std::vector<int>> max_cards(plan.inputs.size());
    for (std::size_t i = 0; i < plan.inputs.size(); ++i) {
        if (!plan.max_cardinalities.empty()) {
            max_cards[i] = plan.max_cardinalities;
        } else {
            std::size_t space = space_of(analysis_table(suite.front().spec), plan.inputs[i]);
            for (int m = 2; m <= static_cast<int>(space); ++m) max_cards[i].push_back(m);
        }
    }
    for (const auto& c : suite) {
        const std::uint64_t base = derive_seed({plan.seed, family_key(plan.family), static_cast<std::uint64_t>(c.index)});
        ProbTable train, test;
        if (plan.n == 0) {
            train = test = analysis_table(c.spec);
        } else {
            try {
                train = estimated_table(c.spec, plan.n, derive_seed({base, 0}));
                test = estimated_table(c.spec, plan.n, derive_seed({base, 1}));
            } catch (const SimError&) {
                continue;
            }
        }
        for (std::size_t i = 0; i < plan.inputs.size(); ++i) {
            IBProblem prob = make_ib_problem(train, plan.inputs[i], target_variable());
            for (std::size_t b = 0; b < plan.beta_primes.size(); ++b) {
                double beta;
                try {
                    beta = scale_beta(prob, plan.beta_primes[b]);
                } catch (const IbError&) {
                    continue;
                }
                for (int m : max_cards[i]) {
                    if (m > prob.nx) continue;
                    IBOptions io;
                    io.beta = beta;
                    io.max_cardinality = m;
                    io.restarts = plan.restarts;
                    io.seed = derive_seed({base, i, double_bits(plan.beta_primes[b]), static_cast<std::uint64_t>(m)});
                    SufficientStatistic t = harden(ib_optimize(prob, io), prob);
                    Cell& cell = cells[{i, b, m}];
                    ++cell.configs;
                    cell.card += t.cardinality;
                    cell.selected +=
                        evaluate_criteria(t, test, source_variable(), target_variable(), plan.thresholds, false).all();
                }
            }
        }
    }
    for (std::size_t i = 0; i < plan.inputs.size(); ++i)
        for (std::size_t b = 0; b < plan.beta_primes.size(); ++b)
            for (int m : max_cards[i]) {
                auto it = cells.find({i, b, m});
                if (it == cells.end()) continue;
                CurvePoint p;
                p.family = family_name(plan.family);
                p.inputs = plan.inputs[i];
                p.beta_prime = plan.beta_primes[b];
                p.max_cardinality = m;
                p.n = plan.n;
                p.configs = it->second.configs;
                p.mean_cardinality = it->second.card / p.configs;
                p.selection_ratio = static_cast<double>(it->second.selected) / p.configs;
                pts.push_back(p);
            }
    return pts;
}

DemoReport run_discovery_demo(const std::string& id, std::uint64_t seed) {
    DemoSystem d = demo_system(id);
    DemoReport r;
    r.id = id;
    DataContext data{d.exact, d.exact};
    DiscoveryConfig cfg = exact_table_config();
    cfg.ibssi.seed = seed;
    cfg.use_statistics = false;
    r.off = ci_ss(data, cfg, d.queries);
    cfg.use_statistics = true;
    r.on = ci_ss(data, cfg, d.queries);
    r.soundness_off = check_soundness(r.off.state.graph, d.truth, d.selection);
    r.soundness_on = check_soundness(r.on.state.graph, d.truth, d.selection);
    if (d.identified) {
        IbssiQuery q;
        q.x = source_variable();
        q.z = target_variable();
        q.inputs = {"X", "V1"};
        q.options.seed = seed;
        q.train = q.test = d.exact;
        r.observational = ibssi_sweep(q);
        q.train = q.test = *d.identified;
        r.identified = ibssi_sweep(q);
    }
    return r;
}

std::string format_demo(const DemoReport& r) {
    std::ostringstream out;
    DemoSystem d = demo_system(r.id);
    out << "system " << r.id << ": " << d.description << "\n\n";
    out << "statistics off:\n" << render(r.off.state.graph) << "\n";
    out << "statistics on:\n" << render(r.on.state.graph) << "\n";
    out << "provenance (statistics on):\n";
    for (const auto& e : r.on.state.provenance) {
        if (e.triple)
            out << "  " << e.rule << ": noncollider " << (*e.triple)[1] << " on (" << (*e.triple)[0] << ","
                << (*e.triple)[1] << "," << (*e.triple)[2] << ") [" << e.detail << "]\n";
        else
            out << "  " << e.rule << ": " << e.mark << " at " << e.at << " on " << e.other << "-" << e.at << " ["
                << e.detail << "]\n";
    }
    for (const auto& c : r.on.state.conflicts) out << "conflict: " << c << "\n";
    for (const auto& w : r.on.state.warnings) out << "warning: " << w << "\n";
    for (const auto& g : r.on.state.diagnostics) out << "note: " << g << "\n";
    auto verdict = [](const StatisticVerdict& v) {
        return v.accepted ? "accepted, |theta| = " + std::to_string(v.statistic->cardinality) : std::string("rejected");
    };
    if (r.observational) out << "IBSSI {X,V1} -> Z on the observational table: " << verdict(*r.observational) << "\n";
    if (r.identified) out << "IBSSI {X,V1} -> Z on the identified do(V3=1) table: " << verdict(*r.identified) << "\n";
    out << "soundness against the generating graph: " << r.soundness_off.violations.size() + r.soundness_on.violations.size()
        << " violations over " << r.soundness_off.marks_checked + r.soundness_on.marks_checked << " marks\n";
    for (const auto& v : r.soundness_on.violations) out << "  " << v << "\n";
    return out.str();
}

nlohmann::json to_json(const DemoReport& r) {
    nlohmann::json j{{"schema_version", kReportSchemaVersion}, {"system", r.id}, {"off", to_json(r.off)}, {"on", to_json(r.on)}};
    j["soundness"] = {{"marks_checked", r.soundness_off.marks_checked + r.soundness_on.marks_checked},
                      {"violations", r.soundness_on.violations}};
    for (const auto& v : r.soundness_off.violations) j["soundness"]["violations"].push_back(v);
    if (r.observational) j["observational"] = to_json(*r.observational);
    if (r.identified) j["identified"] = to_json(*r.identified);
    return j;
}

namespace {

const std::vector<std::pair<std::string, double RateRow::*>>& metrics() {
    static const std::vector<std::pair<std::string, double RateRow::*>> m{
        {"tp_rate", &RateRow::tp_rate},
        {"fp_rate", &RateRow::fp_rate},
        {"tn_rate", &RateRow::tn_rate},
        {"selection_ratio", &RateRow::selection_ratio},
        {"identification_ratio", &RateRow::identification_ratio},
        {"mean_cardinality", &RateRow::mean_cardinality}};
    return m;
}

constexpr const char* kCsvHeader = "schema_version,family,n,beta_set,stratum,metric,value";

nlohmann::json plan_json(const ExperimentPlan& p) {
    nlohmann::json fams = nlohmann::json::array();
    for (Family f : p.families) fams.push_back(family_name(f));
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& b : p.beta_sets) sets.push_back({{"name", b.name}, {"values", b.values}});
    return {{"families", fams},
            {"n_grid", p.n_grid},
            {"beta_sets", sets},
            {"thresholds", {{"a_i", p.thresholds.a_i}, {"a_hx", p.thresholds.a_hx}, {"a_hz", p.thresholds.a_hz}}},
            {"k", p.k},
            {"full_grid", p.full_grid},
            {"repetitions", p.repetitions},
            {"seed", p.seed},
            {"restarts", p.restarts},
            {"budget_seconds", p.budget_seconds},
            {"coefficient_distribution", "uniform[-2,2]"}};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + path);
}

}  // namespace

std::string report_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    for (const auto& row : r.rows) {
        out << kReportSchemaVersion << "," << row.family << "," << row.n << "," << row.beta_set << "," << row.stratum
            << ",configs," << row.configs << "\n";
        for (const auto& [name, field] : metrics())
            out << kReportSchemaVersion << "," << row.family << "," << row.n << "," << row.beta_set << ","
                << row.stratum << "," << name << "," << num(row.*field) << "\n";
    }
    return out.str();
}

nlohmann::json report_json(const ExperimentReport& r) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["plan"] = plan_json(r.plan);
    j["budget_exceeded"] = r.budget_exceeded;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json e{{"family", row.family},   {"n", row.n},          {"beta_set", row.beta_set},
                         {"stratum", row.stratum}, {"configs", row.configs}};
        for (const auto& [name, field] : metrics()) e[name] = row.*field;
        j["rows"].push_back(e);
    }
    j["outcomes"] = nlohmann::json::array();
    for (const auto& o : r.outcomes) {
        nlohmann::json e{{"family", o.family},
                         {"n", o.n},
                         {"beta_set", o.beta_set},
                         {"config", o.config},
                         {"repetition", o.repetition},
                         {"stratum", stratum_name(o.stratum)},
                         {"info", o.info},
                         {"has_statistic", o.has_statistic},
                         {"outcome", outcome_name(o.outcome)},
                         {"selected", o.selected},
                         {"identified", o.identified},
                         {"cardinality", o.cardinality},
                         {"inputs", o.inputs},
                         {"budget_exceeded", o.budget_exceeded}};
        if (!o.note.empty()) e["note"] = o.note;
        j["outcomes"].push_back(e);
    }
    return j;
}

std::string plot_data_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "family,beta_set,metric,n,low,medium,high,all\n";
    std::vector<std::tuple<std::string, std::string>> blocks;
    std::map<std::tuple<std::string, std::string, long, std::string>, const RateRow*> idx;
    std::map<std::tuple<std::string, std::string>, std::vector<long>> ns;
    for (const auto& row : r.rows) {
        std::tuple<std::string, std::string> b{row.family, row.beta_set};
        if (std::find(blocks.begin(), blocks.end(), b) == blocks.end()) blocks.push_back(b);
        auto& v = ns[b];
        if (std::find(v.begin(), v.end(), row.n) == v.end()) v.push_back(row.n);
        idx[{row.family, row.beta_set, row.n, row.stratum}] = &row;
    }
    for (const auto& b : blocks)
        for (const std::string metric : {"tp_rate", "fp_rate", "tn_rate"}) {
            double RateRow::*field = nullptr;
            for (const auto& [name, f] : metrics())
                if (name == metric) field = f;
            for (long n : ns[b]) {
                out << std::get<0>(b) << "," << std::get<1>(b) << "," << metric << "," << n;
                for (const std::string s : {"low", "medium", "high", "all"}) {
                    auto it = idx.find({std::get<0>(b), std::get<1>(b), n, s});
                    out << "," << (it == idx.end() ? "" : num(it->second->*field));
                }
                out << "\n";
            }
        }
    return out.str();
}

nlohmann::json timing_json(const ExperimentReport& r) {
    nlohmann::json j{{"schema_version", kReportSchemaVersion}, {"total_seconds", r.seconds}};
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"family", row.family},
                             {"n", row.n},
                             {"beta_set", row.beta_set},
                             {"stratum", row.stratum},
                             {"seconds", row.seconds}});
    return j;
}

std::string curve_csv(const std::vector<CurvePoint>& pts) {
    std::ostringstream out;
    out << "family,inputs,beta_prime,max_cardinality,n,configs,mean_cardinality,selection_ratio\n";
    for (const auto& p : pts) {
        std::string in;
        for (std::size_t i = 0; i < p.inputs.size(); ++i) in += (i ? "+" : "") + p.inputs[i];
        out << p.family << "," << in << "," << num(p.beta_prime) << "," << p.max_cardinality << "," << p.n << ","
            << p.configs << "," << num(p.mean_cardinality) << "," << num(p.selection_ratio) << "\n";
    }
    return out.str();
}

std::vector<ReportLine> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("report csv: bad header");
    std::vector<ReportLine> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 7) throw std::runtime_error("report csv: line " + std::to_string(lineno) + " has wrong arity");
        ReportLine r;
        try {
            r.schema_version = std::stoi(f[0]);
            r.n = std::stol(f[2]);
            r.value = std::stod(f[6]);
        } catch (const std::exception&) {
            throw std::runtime_error("report csv: line " + std::to_string(lineno) + " is not numeric");
        }
        r.family = f[1];
        r.beta_set = f[3];
        r.stratum = f[4];
        r.metric = f[5];
        out.push_back(r);
    }
    return out;
}

void report_emit(const ExperimentReport& r, const std::string& prefix) {
    write_file(prefix + ".csv", report_csv(r));
    write_file(prefix + ".json", report_json(r).dump(2) + "\n");
    write_file(prefix + ".plot.csv", plot_data_csv(r));
    write_file(prefix + ".timing.json", timing_json(r).dump(2) + "\n");
}

}  // namespace suffstat
