#include <CLI11.hpp>
#include <omp.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "suffstat/bench.hpp"
#include "suffstat/boolean_rule.hpp"
#include "suffstat/rng.hpp"

using namespace suffstat;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
    bool full_grid = false;
};

std::vector<std::string> split(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split(s)) {
        try {
            out.push_back(std::stod(t));
        } catch (const std::exception&) {
            throw ValidationError("not a number: " + t);
        }
    }
    return out;
}

std::vector<long> split_longs(const std::string& s) {
    std::vector<long> out;
    for (const auto& t : split(s)) {
        if (t == "exact") {
            out.push_back(0);
            continue;
        }
        try {
            out.push_back(std::stol(t));
        } catch (const std::exception&) {
            throw ValidationError("not an integer: " + t);
        }
    }
    return out;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path);
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// A table source: --table (JSON table), --data (CSV samples) or neither.
struct Source {
    std::string table, data, schema;
    double smoothing = 0.0;

    void add(CLI::App* app, const std::string& prefix = "") {
        app->add_option("--" + prefix + "table", table, "joint table JSON");
        app->add_option("--" + prefix + "data", data, "sample CSV");
        if (prefix.empty()) {
            app->add_option("--schema", schema, "cardinality schema for the CSV");
            app->add_option("--smoothing", smoothing, "additive smoothing for estimated tables");
        }
    }
    bool given() const { return !table.empty() || !data.empty(); }
    ProbTable load(const std::string& sch, double sm) const {
        if (!table.empty() && !data.empty()) throw ValidationError("give either a table or a data file, not both");
        if (!table.empty()) return table_from_json(nlohmann::json::parse(read_file(table)));
        if (!data.empty()) return estimate_joint(read_csv(data, sch), sm);
        throw ValidationError("no input table or data given");
    }
};

GlmSpec pick_spec(const std::string& family, int k, int config, bool full_grid, std::uint64_t seed) {
    SuiteOptions so;
    so.k = k;
    so.full_grid = full_grid;
    so.seed = seed;
    auto suite = generate_suite(family_from_name(family), so);
    if (config < 0 || config >= static_cast<int>(suite.size()))
        throw ValidationError("config index out of range (suite has " + std::to_string(suite.size()) + ")");
    return suite[config].spec;
}

ProbTable spec_table(const GlmSpec& s, const std::string& view) {
    if (view == "analysis") return analysis_table(s);
    if (view == "observed") return observed_table(s);
    if (view == "full") return glm_exact_table(s);
    throw ValidationError("unknown table view " + view);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"suffstat: sufficient-statistic discovery and benchmarks"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the runtime default)");
    app.add_option("--out", g.out, "output path or prefix (stdout when omitted)");
    app.add_flag("--full-grid", g.full_grid, "cross every draw with every grid cell");

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw samples from a generated configuration");
    std::string sim_family = "sum", sim_spec, sim_spec_out, sim_schema_out;
    int sim_k = 10, sim_config = 0;
    long sim_n = 20000;
    sim->add_option("--family", sim_family, "generator family")->capture_default_str();
    sim->add_option("--k", sim_k, "draws per family")->capture_default_str();
    sim->add_option("--config", sim_config, "index into the generated suite")->capture_default_str();
    sim->add_option("--spec", sim_spec, "spec JSON instead of a generated config");
    sim->add_option("--spec-out", sim_spec_out, "write the spec used");
    sim->add_option("--schema-out", sim_schema_out, "write the cardinality schema of the sampled variables");
    sim->add_option("-n,--samples", sim_n, "number of rows")->capture_default_str();

    // exact
    auto* ex = app.add_subcommand("exact", "exact joint table of a configuration or demo system");
    std::string ex_family = "sum", ex_spec, ex_system, ex_view = "analysis";
    int ex_k = 10, ex_config = 0;
    ex->add_option("--family", ex_family, "generator family")->capture_default_str();
    ex->add_option("--k", ex_k, "draws per family")->capture_default_str();
    ex->add_option("--config", ex_config, "index into the generated suite")->capture_default_str();
    ex->add_option("--spec", ex_spec, "spec JSON instead of a generated config");
    ex->add_option("--system", ex_system, "demo system id");
    ex->add_option("--view", ex_view, "analysis | observed | full")->capture_default_str();

    // ib
    auto* ibc = app.add_subcommand("ib", "single IB optimization followed by hardening");
    Source ib_src;
    ib_src.add(ibc);
    std::string ib_inputs, ib_target = "Z";
    double ib_bp = 100;
    int ib_card = 0, ib_restarts = 200;
    bool ib_soft = false;
    ibc->add_option("--inputs", ib_inputs, "comma-separated input variables")->required();
    ibc->add_option("--target", ib_target, "target variable")->capture_default_str();
    ibc->add_option("--beta-prime", ib_bp, "normalized trade-off")->capture_default_str();
    ibc->add_option("--max-card", ib_card, "maximal cardinality (0: |X|)");
    ibc->add_option("--restarts", ib_restarts, "random restarts")->capture_default_str();
    ibc->add_flag("--soft", ib_soft, "also print the soft mapping");

    // ibssi
    auto* ss = app.add_subcommand("ibssi", "IB-based sufficient statistic identification");
    Source ss_src, ss_test;
    ss_src.add(ss);
    ss_test.add(ss, "test-");
    std::string ss_x = "X", ss_z = "Z", ss_inputs, ss_betas = "25,50,75,100";
    SelectionThresholds ss_th;
    int ss_restarts = 200;
    double ss_budget = 0;
    bool ss_local = false, ss_all = false, ss_relaxed = false;
    ss->add_option("--x", ss_x, "source variable")->capture_default_str();
    ss->add_option("--z", ss_z, "target variable")->capture_default_str();
    ss->add_option("--inputs", ss_inputs, "comma-separated input pool; ';' separates escalation pools")->required();
    ss->add_option("--beta-primes", ss_betas, "beta' values, or 'wide' / 'narrow'")->capture_default_str();
    ss->add_option("--a-i", ss_th.a_i)->capture_default_str();
    ss->add_option("--a-hx", ss_th.a_hx)->capture_default_str();
    ss->add_option("--a-hz", ss_th.a_hz)->capture_default_str();
    ss->add_option("--restarts", ss_restarts)->capture_default_str();
    ss->add_option("--budget", ss_budget, "per IB call wall-clock cap in seconds");
    ss->add_flag("--local", ss_local, "apply the local criteria");
    ss->add_flag("--all-betas", ss_all, "do not stop at the first accepting beta'");
    ss->add_flag("--relaxed-first-call", ss_relaxed, "allow |theta| = |X| at the first call");

    // discover
    auto* disc = app.add_subcommand("discover", "CI-ss discovery on a table or data set");
    Source d_src;
    d_src.add(disc);
    std::vector<std::string> d_queries;
    std::string d_system;
    bool d_exact = false, d_off = false, d_json = false;
    double d_ratio = 0.025;
    int d_maxcond = 3;
    disc->add_option("--system", d_system, "use a demo system's exact table and queries");
    disc->add_option("--query", d_queries, "statistic query x,y,z:inputs (inputs separated by '+')");
    disc->add_flag("--exact", d_exact, "treat the table as exact (zero-information independence)");
    disc->add_flag("--no-statistics", d_off, "skip the statistic rules");
    disc->add_option("--ratio", d_ratio, "independence ratio threshold")->capture_default_str();
    disc->add_option("--max-conditioning", d_maxcond)->capture_default_str();
    disc->add_flag("--json", d_json, "print JSON instead of text");

    // bench
    auto* bench = app.add_subcommand("bench", "experiment runner");
    bench->require_subcommand(1);
    auto* tpfp = bench->add_subcommand("tpfp", "TP/FP rates per family, N, beta' set and stratum");
    std::string b_families = "sum", b_n = "2500,5000,10000,20000", b_sets = "wide,narrow";
    int b_k = 10, b_reps = 1, b_restarts = 200;
    double b_budget = 0;
    tpfp->add_option("--families", b_families)->capture_default_str();
    tpfp->add_option("--n", b_n, "sample sizes; 'exact' or 0 for the exact table")->capture_default_str();
    tpfp->add_option("--beta-sets", b_sets, "wide, narrow, or name=v1:v2:...")->capture_default_str();
    tpfp->add_option("--k", b_k)->capture_default_str();
    tpfp->add_option("--repetitions", b_reps)->capture_default_str();
    tpfp->add_option("--restarts", b_restarts)->capture_default_str();
    tpfp->add_option("--budget", b_budget, "per IB call wall-clock cap in seconds");
    tpfp->add_option("--a-i", ss_th.a_i)->capture_default_str();
    tpfp->add_option("--a-hx", ss_th.a_hx)->capture_default_str();
    tpfp->add_option("--a-hz", ss_th.a_hz)->capture_default_str();

    auto* curve = bench->add_subcommand("curve", "mean |theta| and selection ratio against max cardinality");
    std::string c_family = "sum", c_inputs = "X,V1", c_bps = "15,100,500", c_cards;
    long c_n = 20000;
    int c_k = 10, c_restarts = 200;
    curve->add_option("--family", c_family)->capture_default_str();
    curve->add_option("--inputs", c_inputs, "input pools separated by ';'")->capture_default_str();
    curve->add_option("--beta-primes", c_bps)->capture_default_str();
    curve->add_option("--max-cards", c_cards, "maximal cardinalities (default 2..|X|)");
    curve->add_option("--n", c_n, "sample size, 0 for exact")->capture_default_str();
    curve->add_option("--k", c_k)->capture_default_str();
    curve->add_option("--restarts", c_restarts)->capture_default_str();

    // demo
    auto* demo = app.add_subcommand("demo", "discovery demo with statistics off and on");
    std::string demo_id;
    bool demo_json = false;
    demo->add_option("system", demo_id, "common_child, sum, sum_aux, sum_via_y, no_stat, selection, dormant")->required();
    demo->add_flag("--json", demo_json);

    auto* rules = app.add_subcommand("rules", "list the built-in Boolean configurations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (g.threads > 0) omp_set_num_threads(g.threads);

        if (*sim) {
            GlmSpec s = sim_spec.empty() ? pick_spec(sim_family, sim_k, sim_config, g.full_grid, g.seed)
                                         : spec_from_json(nlohmann::json::parse(read_file(sim_spec)));
            validate(s);
            if (sim_n <= 0) throw ValidationError("sample size must be positive");
            if (!sim_spec_out.empty()) emit(sim_spec_out, to_json(s).dump(2) + "\n");
            SampleDataset data = sample(s, static_cast<std::size_t>(sim_n), derive_seed({g.seed, 0x73696d}));
            if (!sim_schema_out.empty()) {
                nlohmann::json vars = nlohmann::json::array();
                for (const auto& v : data.variables) vars.push_back({{"name", v.name}, {"cardinality", v.cardinality}});
                emit(sim_schema_out, nlohmann::json{{"variables", vars}}.dump(2) + "\n");
            }
            emit(g.out, format_csv(data));
        } else if (*ex) {
            ProbTable t;
            if (!ex_system.empty()) {
                DemoSystem d = demo_system(ex_system);
                t = ex_view == "identified" && d.identified ? *d.identified : d.exact;
            } else {
                GlmSpec s = ex_spec.empty() ? pick_spec(ex_family, ex_k, ex_config, g.full_grid, g.seed)
                                            : spec_from_json(nlohmann::json::parse(read_file(ex_spec)));
                validate(s);
                t = spec_table(s, ex_view);
            }
            emit(g.out, to_json(t).dump(2) + "\n");
        } else if (*ibc) {
            ProbTable t = ib_src.load(ib_src.schema, ib_src.smoothing);
            IBProblem prob = make_ib_problem(t, split(ib_inputs), ib_target);
            IBOptions o;
            o.beta = scale_beta(prob, ib_bp);
            o.max_cardinality = ib_card > 0 ? ib_card : prob.nx;
            o.restarts = ib_restarts;
            o.seed = g.seed;
            SoftMapping m = ib_optimize(prob, o);
            nlohmann::json j{{"beta_prime", ib_bp}, {"beta", o.beta}, {"statistic", to_json(harden(m, prob))}};
            if (ib_soft) j["soft"] = to_json(m);
            emit(g.out, j.dump(2) + "\n");
        } else if (*ss) {
            IbssiQuery q;
            q.x = ss_x;
            q.z = ss_z;
            q.train = ss_src.load(ss_src.schema, ss_src.smoothing);
            q.test = ss_test.given() ? ss_test.load(ss_src.schema, ss_src.smoothing) : q.train;
            if (ss_betas == "wide")
                q.options.beta_primes = kBetaSetWide;
            else if (ss_betas == "narrow")
                q.options.beta_primes = kBetaSetNarrow;
            else
                q.options.beta_primes = split_doubles(ss_betas);
            q.options.thresholds = ss_th;
            q.options.restarts = ss_restarts;
            q.options.budget_seconds = ss_budget;
            q.options.local_criteria = ss_local;
            q.options.stop_at_first = !ss_all;
            q.options.strict_first_call = !ss_relaxed;
            q.options.seed = g.seed;
            std::vector<VarList> pools;
            for (const auto& p : split(ss_inputs, ';')) pools.push_back(split(p));
            if (pools.empty()) throw ValidationError("empty input pool");
            StatisticVerdict v;
            if (pools.size() == 1) {
                q.inputs = pools.front();
                v = ibssi_sweep(q);
            } else {
                v = input_escalation(q.x, q.z, pools, q).verdict;
            }
            emit(g.out, to_json(v).dump(2) + "\n");
            if (v.budget_exceeded) return kExitBudget;
        } else if (*disc) {
            DataContext data;
            std::vector<StatisticQuery> queries;
            if (!d_system.empty()) {
                DemoSystem d = demo_system(d_system);
                data = {d.exact, d.exact};
                queries = d.queries;
                d_exact = true;
            } else {
                ProbTable t = d_src.load(d_src.schema, d_src.smoothing);
                data = {t, t};
            }
            for (const auto& qs : d_queries) {
                auto parts = split(qs, ':');
                auto xyz = split(parts.empty() ? "" : parts[0]);
                if (parts.size() != 2 || xyz.size() != 3) throw ValidationError("bad query " + qs);
                StatisticQuery sq;
                sq.x = xyz[0];
                sq.y = xyz[1];
                sq.z = xyz[2];
                sq.inputs = split(parts[1], '+');
                queries.push_back(sq);
            }
            DiscoveryConfig cfg = d_exact ? exact_table_config() : DiscoveryConfig{};
            if (!d_exact) cfg.ratio_threshold = d_ratio;
            cfg.max_conditioning = d_maxcond;
            cfg.use_statistics = !d_off;
            cfg.ibssi.seed = g.seed;
            DiscoveryResult r = ci_ss(data, cfg, queries);
            emit(g.out, d_json ? to_json(r).dump(2) + "\n" : render(r.state.graph));
        } else if (*tpfp) {
            ExperimentPlan plan;
            plan.families.clear();
            for (const auto& f : split(b_families)) plan.families.push_back(family_from_name(f));
            plan.n_grid = split_longs(b_n);
            plan.beta_sets.clear();
            for (const auto& b : split(b_sets)) {
                if (b == "wide")
                    plan.beta_sets.push_back({"wide", kBetaSetWide});
                else if (b == "narrow")
                    plan.beta_sets.push_back({"narrow", kBetaSetNarrow});
                else {
                    auto eq = b.find('=');
                    if (eq == std::string::npos) throw ValidationError("bad beta' set " + b);
                    std::vector<double> vals;
                    for (const auto& v : split(b.substr(eq + 1), ':')) vals.push_back(split_doubles(v).at(0));
                    plan.beta_sets.push_back({b.substr(0, eq), vals});
                }
            }
            plan.thresholds = ss_th;
            plan.k = b_k;
            plan.full_grid = g.full_grid;
            plan.repetitions = b_reps;
            plan.seed = g.seed;
            plan.restarts = b_restarts;
            plan.budget_seconds = b_budget;
            try {
                plan.validate();
            } catch (const SimError& e) {
                throw ValidationError(e.what());
            }
            ExperimentReport r = run_tpfp(plan);
            if (g.out.empty())
                std::cout << report_csv(r);
            else
                report_emit(r, g.out);
            if (r.budget_exceeded) return kExitBudget;
        } else if (*curve) {
            CurvePlan cp;
            cp.family = family_from_name(c_family);
            cp.inputs.clear();
            for (const auto& p : split(c_inputs, ';')) cp.inputs.push_back(split(p));
            cp.beta_primes = split_doubles(c_bps);
            for (long m : split_longs(c_cards)) cp.max_cardinalities.push_back(static_cast<int>(m));
            cp.n = c_n;
            cp.k = c_k;
            cp.seed = g.seed;
            cp.restarts = c_restarts;
            emit(g.out, curve_csv(run_cardinality_curve(cp)));
        } else if (*demo) {
            DemoReport r = run_discovery_demo(demo_id, g.seed);
            emit(g.out, demo_json ? to_json(r).dump(2) + "\n" : format_demo(r));
        } else if (*rules) {
            std::ostringstream out;
            for (const auto& b : builtin_rules())
                out << b.name << ": " << b.text << (b.statistic_expected ? "  [statistic]" : "")
                    << (b.statistic_expected && !b.local_expected ? "  [fails local criteria]" : "") << "\n";
            emit(g.out, out.str());
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ProbError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IbError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const GraphError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
