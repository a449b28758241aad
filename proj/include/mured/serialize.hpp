#pragma once

// JSON and CSV forms of every result type. JSON doubles use the shortest
// round-trip representation; CSV numbers carry 10 significant digits and
// undefined values are left empty (null in JSON).

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mured/core_entropy.hpp"
#include "mured/csv.hpp"
#include "mured/error.hpp"
#include "mured/ingest_windows.hpp"
#include "mured/multivariate.hpp"
#include "mured/reference_oracle.hpp"
#include "mured/vector_space.hpp"

namespace mured {

using json = nlohmann::json;

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string join(const std::vector<std::string>& names, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += sep;
        out += names[i];
    }
    return out;
}

}  // namespace detail

inline std::string csv_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---- JointTable -----------------------------------------------------------

inline json to_json(const joint_table& t) {
    json vars = json::array();
    for (const auto& v : t.variables()) vars.push_back({{"name", v.name()}, {"alphabet", v.alphabet()}});
    return {{"variables", std::move(vars)},
            {"cells", std::vector<double>(t.cells().begin(), t.cells().end())},
            {"total", t.total()}};
}

/// Reads `{"variables":[{"name","alphabet"}],"cells":[...],"total":...}`. Extra keys
/// are ignored; `total` is optional but must match the cell sum when present.
inline joint_table table_from_json(const json& j) {
    try {
        std::vector<variable_spec> vars;
        for (const auto& v : j.at("variables")) {
            vars.emplace_back(v.at("name").get<std::string>(), v.at("alphabet").get<std::vector<std::string>>());
        }
        joint_table t(std::move(vars), j.at("cells").get<std::vector<double>>());
        if (j.contains("total")) {
            const double stated = j.at("total").get<double>();
            if (std::fabs(stated - t.total()) > 1e-9 * std::max(1.0, std::fabs(t.total()))) {
                throw invalid_table("stated total does not match the sum of cells");
            }
        }
        return t;
    } catch (const json::exception& e) {
        throw parse_error(std::string("malformed table JSON: ") + e.what());
    }
}

// ---- multivariate ---------------------------------------------------------

inline json to_json(const decomposition& d) {
    json transmissions = json::object();
    for (const auto& t : d.subset_transmissions) transmissions[detail::join(t.subset)] = t.value;
    json j = {{"n", d.n},
              {"base", to_string(d.base)},
              {"variables", d.subset},
              {"transmissions", std::move(transmissions)},
              {"negative_term", d.negative_term},
              {"config_term", d.config_term},
              {"redundancy", d.redundancy},
              {"regime", to_string(d.regime)}};
    j["flags"] = d.config_term_negative ? json::array({"config_term_negative"}) : json::array();
    return j;
}

// ---- vector space ---------------------------------------------------------

inline json to_json(const similarity_matrix& s) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < s.size(); ++j) {
            const auto& e = s.at(i, j);
            row.push_back(e ? json(*e) : json(nullptr));
        }
        rows.push_back(std::move(row));
    }
    return {{"kind", to_string(s.kind)}, {"labels", s.labels}, {"entries", std::move(rows)}};
}

inline json to_json(const eigen_result& e) {
    return {{"eigenvalue", e.eigenvalue},
            {"eigenvector", e.eigenvector},
            {"iterations", e.iterations},
            {"residual", e.residual},
            {"degenerate", e.degenerate}};
}

// ---- series ---------------------------------------------------------------

inline json to_json(const series_point& p) {
    json pairs = json::object();
    for (const auto& t : p.pair_transmissions) pairs[detail::join(t.subset)] = t.value;
    json j = {{"window", p.window_index},
              {"start", p.start},
              {"end", p.end},
              {"count", p.event_count},
              {"base", to_string(p.base)},
              {"h_obs", detail::number_or_null(p.h_obs)},
              {"h_max", detail::number_or_null(p.h_max)},
              {"redundancy", detail::number_or_null(p.redundancy)},
              {"transmissions", std::move(pairs)},
              {"r_n", detail::number_or_null(p.r_n)},
              {"regime", p.regime},
              {"flags", p.flags}};
    if (p.decomposition) j["decomposition"] = to_json(*p.decomposition);
    return j;
}

inline json to_json(const capacity_point& p) {
    return {{"window", p.window_index},
            {"end", p.end},
            {"count", p.event_count},
            {"base", to_string(p.base)},
            {"h_obs", detail::number_or_null(p.h_obs)},
            {"h_max", detail::number_or_null(p.h_max)},
            {"redundancy", detail::number_or_null(p.redundancy)}};
}

/// JSON lines, one object per window.
inline void write_series_jsonl(std::ostream& out, const std::vector<series_point>& series) {
    for (const auto& p : series) out << to_json(p).dump() << '\n';
}

/// Columns: window,start,end,count,h_obs,h_max,redundancy,T_<a>_<b>...,r_n,regime
inline void write_series_csv(std::ostream& out, const std::vector<series_point>& series,
                             const std::vector<std::string>& variables) {
    std::vector<std::string> pair_names;
    for (std::size_t i = 0; i < variables.size(); ++i) {
        for (std::size_t j = i + 1; j < variables.size(); ++j) pair_names.push_back("T_" + variables[i] + "_" + variables[j]);
    }
    const bool pairs = !series.empty() && std::any_of(series.begin(), series.end(), [](const series_point& p) {
        return !p.pair_transmissions.empty();
    });
    out << "window,start,end,count,h_obs,h_max,redundancy";
    if (pairs) {
        for (const auto& name : pair_names) out << ',' << csv::quote(name);
    }
    out << ",r_n,regime\n";
    for (const auto& p : series) {
        out << p.window_index << ',' << csv::quote(p.start) << ',' << csv::quote(p.end) << ',' << p.event_count << ','
            << csv_number(p.h_obs) << ',' << csv_number(p.h_max) << ',' << csv_number(p.redundancy);
        if (pairs) {
            for (std::size_t k = 0; k < pair_names.size(); ++k) {
                out << ',' << (k < p.pair_transmissions.size() ? csv_number(p.pair_transmissions[k].value) : "");
            }
        }
        out << ',' << csv_number(p.r_n) << ',' << p.regime << '\n';
    }
}

inline void write_capacity_csv(std::ostream& out, const std::vector<capacity_point>& series) {
    out << "window,end,count,h_obs,h_max,redundancy\n";
    for (const auto& p : series) {
        out << p.window_index << ',' << csv::quote(p.end) << ',' << p.event_count << ',' << csv_number(p.h_obs) << ','
            << csv_number(p.h_max) << ',' << csv_number(p.redundancy) << '\n';
    }
}

// ---- fixtures -------------------------------------------------------------

/// Table JSON (when the fixture has a table) plus an `expected` block.
inline json to_json(const oracle::fixture& f) {
    json j = f.table ? to_json(*f.table) : json::object();
    j["name"] = f.name;
    json expected = json::array();
    for (const auto& e : f.expected) {
        expected.push_back({{"measure", e.measure},
                            {"value", e.value},
                            {"tolerance", e.tolerance},
                            {"provenance", to_string(e.provenance)},
                            {"note", e.note}});
    }
    j["expected"] = std::move(expected);
    return j;
}

inline std::vector<oracle::expectation> expectations_from_json(const json& j) {
    std::vector<oracle::expectation> out;
    try {
        for (const auto& e : j.at("expected")) {
            out.push_back({e.at("measure").get<std::string>(), e.at("value").get<double>(),
                           e.at("tolerance").get<double>(),
                           oracle::parse_provenance(e.at("provenance").get<std::string>()),
                           e.value("note", std::string{})});
        }
    } catch (const json::exception& e) {
        throw parse_error(std::string("malformed fixture JSON: ") + e.what());
    }
    return out;
}

}  // namespace mured
