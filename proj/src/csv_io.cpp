#include "suffstat/prob.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace suffstat {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = cell.find_first_not_of(' ');
        out.push_back(start == std::string::npos ? "" : cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProbError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<VariableSpec> read_schema(const std::string& path) {
    auto j = nlohmann::json::parse(slurp(path));
    std::vector<VariableSpec> vars;
    for (const auto& v : j.at("variables")) vars.push_back({v.at("name").get<std::string>(), v.at("cardinality").get<int>()});
    return vars;
}

SampleDataset parse_csv(const std::string& text, const std::vector<VariableSpec>* schema) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ProbError("empty csv");
    auto header = split_line(line);
    SampleDataset d;
    for (const auto& h : header) {
        if (h.empty()) throw ProbError("empty column name");
        d.variables.push_back({h, 1});
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw ProbError("row " + std::to_string(lineno) + " has wrong number of cells");
        for (const auto& c : cells) {
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(c, &used);
            } catch (const std::exception&) {
                throw ProbError("non-integer cell at row " + std::to_string(lineno));
            }
            if (used != c.size() || v < 0) throw ProbError("invalid cell at row " + std::to_string(lineno));
            d.cells.push_back(v);
        }
    }
    const std::size_t k = d.variables.size();
    for (std::size_t i = 0; i < d.cells.size(); ++i)
        d.variables[i % k].cardinality = std::max(d.variables[i % k].cardinality, d.cells[i] + 1);
    if (schema) {
        for (auto& v : d.variables) {
            bool found = false;
            for (const auto& s : *schema)
                if (s.name == v.name) {
                    if (s.cardinality < v.cardinality)
                        throw ProbError("schema cardinality too small for " + v.name);
                    v.cardinality = s.cardinality;
                    found = true;
                }
            if (!found) throw ProbError("schema lacks variable " + v.name);
        }
    }
    d.validate();
    return d;
}

SampleDataset read_csv(const std::string& path, const std::string& schema_path) {
    if (schema_path.empty()) return parse_csv(slurp(path));
    auto schema = read_schema(schema_path);
    return parse_csv(slurp(path), &schema);
}

std::string format_csv(const SampleDataset& data) {
    std::ostringstream out;
    for (std::size_t i = 0; i < data.variables.size(); ++i) out << (i ? "," : "") << data.variables[i].name;
    out << "\n";
    const std::size_t k = data.variables.size();
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) out << (c ? "," : "") << data.at(r, c);
        out << "\n";
    }
    return out.str();
}

void write_csv(const SampleDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ProbError("cannot write " + path);
    out << format_csv(data);
}

}  // namespace suffstat
