#include "suffstat/systems.hpp"

#include <cmath>

namespace suffstat {

namespace {

double logistic(double h) { return 1.0 / (1.0 + std::exp(-h)); }

std::function<double(const std::vector<int>&)> collider_link(const ProbTable& p, const std::string& x,
                                                             const std::string& z) {
    const int xi = p.index_of(x), zi = p.index_of(z);
    const double zmax = p.variables()[zi].cardinality - 1;
    return [=](const std::vector<int>& s) { return logistic(-2.0 + 2.5 * s[xi] + 3.0 * s[zi] / zmax); };
}

GlmSpec reference_spec(Family f) {
    SuiteOptions o;
    o.k = 1;
    o.n_set = {4};
    o.sigma_set = {1.0};
    o.px_set = {0.5};
    o.pv1_set = {0.5};
    o.seed = 11;
    return generate_suite(f, o).front().spec;
}

DemoSystem common_child() {
    DemoSystem d;
    d.id = "common_child";
    d.description = "V confounds X and Z; Z depends on X+V; Y is a common child of X and Z";
    for (auto n : {"V", "X", "Z", "Y"}) d.truth.add_node(n);
    d.truth.add_directed("V", "X");
    d.truth.add_directed("V", "Z");
    d.truth.add_directed("X", "Z");
    d.truth.add_directed("X", "Y");
    d.truth.add_directed("Z", "Y");
    const int n = 4;
    std::vector<VariableSpec> vars{{"V", 2}, {"X", 2}, {"Z", n + 1}};
    std::vector<double> mass;
    for (int v = 0; v < 2; ++v)
        for (int x = 0; x < 2; ++x) {
            const double px1 = 0.3 + 0.4 * v;
            const int s = x + v;
            const double pz = logistic(-1.5 + 3.0 * s - 1.2 * s * s);
            for (int z = 0; z <= n; ++z) {
                double c = std::tgamma(n + 1.0) / (std::tgamma(z + 1.0) * std::tgamma(n - z + 1.0));
                mass.push_back(0.5 * (x ? px1 : 1.0 - px1) * c * std::pow(pz, z) * std::pow(1.0 - pz, n - z));
            }
        }
    ProbTable base(vars, mass);
    d.exact = marginal(append_binary_child(base, "Y", collider_link(base, "X", "Z")), {"V", "X", "Y", "Z"});
    d.queries.push_back({"X", "Y", "Z", {"X", "V"}, VarList{"X", "V"}, VarList{}});
    return d;
}

}  // namespace

ProbTable append_binary_child(const ProbTable& p, const std::string& name,
                              const std::function<double(const std::vector<int>&)>& p1) {
    if (p.has(name)) throw ProbError("variable already present: " + name);
    auto vars = p.variables();
    vars.push_back({name, 2});
    std::vector<double> mass(p.size() * 2);
    for (std::size_t f = 0; f < p.size(); ++f) {
        double q = p1(p.decode(f));
        mass[2 * f] = p.mass()[f] * (1.0 - q);
        mass[2 * f + 1] = p.mass()[f] * q;
    }
    return ProbTable(vars, mass);
}

DemoSystem system_from_spec(const GlmSpec& s, const std::string& collider) {
    DemoSystem d;
    d.spec = s;
    d.id = family_name(s.family);
    const Family f = s.family == Family::RoundedExp ? s.base : s.family;
    const std::string w = f == Family::SumViaY ? "Y" : "V2";
    if (collider == w || collider == "X" || collider == "Z" || collider == "V1")
        throw SimError("collider name clashes with a system variable");
    auto& g = d.truth;

    ProbTable full = glm_exact_table(s);
    ProbTable with_c = append_binary_child(full, collider, collider_link(full, "X", "Z"));
    const VarList inputs_xv1{"X", "V1"};

    if (s.family == Family::Selection) {
        for (auto n : {"X", "V1", "V2", "Z"}) g.add_node(n);
        g.add_node("S", NodeKind::Latent);
        g.add_node(collider);
        g.add_directed("V2", "Z");
        for (auto p : {"X", "V1", "Z"}) g.add_directed(p, "S");
        d.selection = {"S"};
        d.exact = marginal(selection_window(with_c, "S", s.n), {"X", "V1", "V2", "Z", collider});
        d.queries.push_back({"X", "V1", "Z", inputs_xv1, VarList{"X", "V1"}, VarList{}});
        d.description = "window selection on a common child of X, V1 and Z";
    } else if (s.family == Family::Dormant) {
        g.add_node("U", NodeKind::Latent);
        for (auto n : {"X", "V1", "V2", "V3", "Z"}) g.add_node(n);
        g.add_node(collider);
        for (auto e : std::vector<std::pair<const char*, const char*>>{
                 {"U", "V2"}, {"U", "Z"}, {"X", "V2"}, {"X", "V3"}, {"V2", "V3"}, {"V3", "Z"}, {"X", "Z"}, {"V1", "Z"}})
            g.add_directed(e.first, e.second);
        d.exact = marginal(with_c, {"X", "V1", "V2", "V3", "Z", collider});
        d.identified = dormant_identified_table(s, 1);
        d.description = "independence of X and Z given X+V1 appears only under do(V3=1)";
    } else {
        for (auto n : {"X", "V1"}) g.add_node(n);
        g.add_node(w);
        g.add_node("Z");
        g.add_node(collider);
        g.add_directed("X", "Z");
        g.add_directed("V1", "Z");
        g.add_directed(w, "Z");
        if (f == Family::SumViaY) g.add_directed("X", "Y");
        d.exact = with_c;
        d.description = "family " + family_name(s.family) + " with a common child of X and Z";
    }
    g.add_directed("X", collider);
    g.add_directed("Z", collider);

    if (f == Family::SumViaY) {
        d.queries.push_back({"X", "Y", "Z", {"X", "V1", "Y"}, VarList{"X", "V1"}, VarList{"Y"}});
    } else if (s.family != Family::Selection) {
        VarList in = s.family == Family::Dormant ? inputs_xv1 : information_inputs(s);
        d.queries.push_back({"X", collider, "Z", in, in, VarList{}});
    } else {
        d.queries.push_back({"X", collider, "Z", inputs_xv1, inputs_xv1, VarList{}});
    }
    return d;
}

const std::vector<std::string>& demo_system_ids() {
    static const std::vector<std::string> ids{"common_child", "sum", "sum_aux", "sum_via_y", "no_stat", "selection", "dormant"};
    return ids;
}

DemoSystem demo_system(const std::string& id) {
    DemoSystem d;
    if (id == "common_child") return common_child();
    if (id == "sum") d = system_from_spec(reference_spec(Family::Sum), "Y");
    else if (id == "sum_aux") d = system_from_spec(reference_spec(Family::SumAux), "Y");
    else if (id == "sum_via_y") d = system_from_spec(reference_spec(Family::SumViaY), "W");
    else if (id == "no_stat") d = system_from_spec(reference_spec(Family::NoStat), "Y");
    else if (id == "selection") d = system_from_spec(reference_spec(Family::Selection), "W");
    else if (id == "dormant") d = system_from_spec(reference_spec(Family::Dormant), "W");
    else throw GraphError("unknown demo system " + id);
    d.id = id;
    return d;
}

}  // namespace suffstat
