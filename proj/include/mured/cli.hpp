#pragma once

// Command-line front end: `mured <subcommand> <input> [flags]`.
// Exit codes: 0 success, 1 computation or IO error, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mured/core_entropy.hpp"
#include "mured/error.hpp"
#include "mured/ingest_windows.hpp"
#include "mured/multivariate.hpp"
#include "mured/reference_oracle.hpp"
#include "mured/serialize.hpp"
#include "mured/vector_space.hpp"

namespace mured::cli {

enum exit_code : int { ok = 0, computation_error = 1, usage_error = 2 };

/// Flags rejected after parsing but before any file is opened.
class usage : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct run_config {
    std::string subcommand;
    std::string vspace_op;
    std::string input;
    std::vector<std::string> variables;
    std::string base = "bits";
    std::string support = "alphabet";
    double alpha = 0.0;
    std::string format = "json";
    std::string out;
    std::string missing = "keep";
    std::string input_format = "auto";
    std::optional<std::string> time_col;
    // windows
    std::optional<std::size_t> window;
    std::optional<std::string> span;
    std::optional<std::string> step;
    std::string scope = "global";
    bool allow_gaps = false;
    bool decompose = false;
    // vspace
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::string kind = "cosine";
    std::string axis = "rows";
    std::size_t k = 1;
    double tol = 1e-10;
    std::size_t max_iter = 10'000;
    bool as_matrix = false;
    // check
    std::size_t tables = 200;
    std::uint64_t seed = oracle::suite_config{}.seed;
};

namespace detail {

inline std::string extension_of(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

inline std::string input_kind(const run_config& cfg) {
    if (cfg.input_format != "auto") return cfg.input_format;
    const std::string ext = extension_of(cfg.input);
    if (ext == ".json") return "table";
    if (ext == ".tsv" || ext == ".tab") return "tsv";
    return "csv";
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open input '" + path + "'");
    return in;
}

inline event_log read_log(const run_config& cfg) {
    auto in = open_input(cfg.input);
    const auto format = input_kind(cfg) == "tsv" ? delimited_format::tsv : delimited_format::csv;
    return load_events(in, format, parse_missing_policy(cfg.missing), cfg.time_col);
}

inline std::vector<std::string> event_variables(const run_config& cfg, const event_log& log) {
    if (!cfg.variables.empty()) return cfg.variables;
    std::vector<std::string> vars;
    for (const auto& c : log.columns) {
        if (!cfg.time_col || c != *cfg.time_col) vars.push_back(c);
    }
    return vars;
}

/// Table from a JSON table file or tabulated from an event file.
inline std::pair<joint_table, std::vector<std::string>> read_table(const run_config& cfg) {
    if (input_kind(cfg) == "table") {
        auto in = open_input(cfg.input);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw parse_error(std::string("invalid JSON: ") + e.what());
        }
        joint_table t = table_from_json(j);
        auto vars = cfg.variables.empty() ? t.names() : cfg.variables;
        for (const auto& v : vars) t.index_of(v);
        return {std::move(t), std::move(vars)};
    }
    const event_log log = read_log(cfg);
    auto vars = event_variables(cfg, log);
    return {tabulate(log, vars, {alphabet_scope::global, cfg.alpha}), vars};
}

inline incidence_matrix read_incidence(const run_config& cfg) {
    auto in = open_input(cfg.input);
    return read_incidence_csv(in, input_kind(cfg) == "tsv" ? '\t' : ',');
}

inline window_spec make_window(const run_config& cfg, bool cumulative) {
    window_spec spec = [&] {
        if (cfg.span) {
            const double span = parse_duration(*cfg.span);
            const double step = cfg.step ? parse_duration(*cfg.step) : span;
            return window_spec::by_time(span, step, cfg.allow_gaps);
        }
        std::size_t step = 0;
        if (cfg.step) {
            const auto v = mured::detail::parse_number(*cfg.step);
            if (!v || *v < 1 || *v != std::floor(*v)) throw invalid_argument("count-mode --step must be a positive integer");
            step = static_cast<std::size_t>(*v);
        }
        const std::size_t size = cfg.window.value_or(step);
        return window_spec::by_count(size, step == 0 ? size : step, cfg.allow_gaps || cumulative);
    }();
    return spec.with_scope(parse_alphabet_scope(cfg.scope));
}

inline series_options make_series_options(const run_config& cfg) {
    series_options o;
    o.base = parse_log_base(cfg.base);
    o.support = parse_support_mode(cfg.support);
    o.alpha = cfg.alpha;
    o.decompose = cfg.decompose;
    return o;
}

inline void validate(const run_config& cfg) {
    const bool windowed = cfg.subcommand == "series" || cfg.subcommand == "capacity";
    if (windowed) {
        if (cfg.window && cfg.span) throw usage("--window and --span are mutually exclusive");
        if (cfg.span && !cfg.time_col) throw usage("--span requires --time-col");
        if (cfg.subcommand == "series" && !cfg.window && !cfg.span) throw usage("series needs --window N or --span DUR");
        if (cfg.subcommand == "capacity" && !cfg.window && !cfg.step && !cfg.span) {
            throw usage("capacity needs --step (or --window / --span)");
        }
        if (cfg.input_format == "table") throw usage("windowed commands need an event file");
        try {
            make_window(cfg, cfg.subcommand == "capacity");
            parse_alphabet_scope(cfg.scope);
        } catch (const mured::error& e) {
            throw usage(e.what());
        }
    }
    if (cfg.subcommand == "vspace") {
        if (!cfg.rows.empty() && !cfg.cols.empty()) throw usage("--rows and --cols are mutually exclusive");
        if ((cfg.vspace_op == "pearson" || cfg.vspace_op == "cosine")) {
            const auto& pick = cfg.rows.empty() ? cfg.cols : cfg.rows;
            if (pick.size() != 2) throw usage(cfg.vspace_op + " needs exactly two labels via --rows or --cols");
        }
        if (cfg.as_matrix && cfg.vspace_op != "eigen") throw usage("--matrix applies to eigen only");
    }
    if (!(cfg.alpha >= 0.0)) throw usage("--alpha must be >= 0");
    if (cfg.tol <= 0.0) throw usage("--tol must be positive");
}

inline json scalar_result(const run_config& cfg, const std::vector<std::string>& vars, const char* key, double v) {
    return {{"base", cfg.base}, {"variables", vars}, {key, mured::detail::number_or_null(v)}};
}

/// Flat CSV rendering of a one-level JSON object.
inline std::string flat_csv(const json& j) {
    std::string header, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!header.empty()) {
            header += ',';
            row += ',';
        }
        header += csv::quote(it.key());
        const auto& v = it.value();
        if (v.is_number_float()) {
            row += csv_number(v.get<double>());
        } else if (v.is_string()) {
            row += csv::quote(v.get<std::string>());
        } else if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); })) {
            row += csv::quote(mured::detail::join(v.get<std::vector<std::string>>(), ";"));
        } else if (v.is_null()) {
        } else {
            row += csv::quote(v.dump());
        }
    }
    return header + "\n" + row + "\n";
}

inline std::string render(const run_config& cfg, const json& j) {
    return cfg.format == "csv" ? flat_csv(j) : j.dump(2) + "\n";
}

inline std::string run_entropy(const run_config& cfg) {
    const auto [table, vars] = read_table(cfg);
    const joint_table t = vars == table.names() ? table : marginalize(table, vars);
    const auto base = parse_log_base(cfg.base);
    const auto mode = parse_support_mode(cfg.support);
    const auto h = entropy(t, base);
    const auto h_max = max_entropy(t, mode, base);
    const double r = h_max.value > 0.0 ? shannon_redundancy(t, mode) : std::numeric_limits<double>::quiet_NaN();
    json j = {{"base", cfg.base},
              {"variables", vars},
              {"support", cfg.support},
              {"h", h.value},
              {"h_max", h_max.value},
              {"redundancy", mured::detail::number_or_null(r)},
              {"thermodynamic_j_per_k", to_thermodynamic(h)}};
    return render(cfg, j);
}

inline std::string run_decompose(const run_config& cfg) {
    const auto [table, vars] = read_table(cfg);
    const auto d = decompose(table, vars, parse_log_base(cfg.base));
    if (cfg.format != "csv") return to_json(d).dump(2) + "\n";
    std::ostringstream out;
    out << "subset,value\n";
    for (const auto& t : d.subset_transmissions) out << csv::quote("T:" + mured::detail::join(t.subset)) << ',' << csv_number(t.value) << '\n';
    out << "negative_term," << csv_number(d.negative_term) << '\n'
        << "config_term," << csv_number(d.config_term) << '\n'
        << "redundancy," << csv_number(d.redundancy) << '\n'
        << "regime," << to_string(d.regime) << '\n';
    return out.str();
}

inline std::string run_series(const run_config& cfg) {
    const auto spec = make_window(cfg, false);
    const event_log log = read_log(cfg);
    const auto vars = event_variables(cfg, log);
    const auto series = window_series(log, vars, spec, make_series_options(cfg));
    std::ostringstream out;
    if (cfg.format == "csv") {
        write_series_csv(out, series, vars);
    } else {
        write_series_jsonl(out, series);
    }
    return out.str();
}

inline std::string run_capacity(const run_config& cfg) {
    const auto spec = make_window(cfg, true);
    const event_log log = read_log(cfg);
    const auto vars = event_variables(cfg, log);
    const auto series = capacity_series(log, vars, spec, make_series_options(cfg));
    std::ostringstream out;
    if (cfg.format == "csv") {
        write_capacity_csv(out, series);
    } else {
        for (const auto& p : series) out << to_json(p).dump() << '\n';
    }
    return out.str();
}

inline std::string run_vspace(const run_config& cfg) {
    const incidence_matrix m = read_incidence(cfg);
    const matrix_axis axis = cfg.axis == "columns" ? matrix_axis::columns : matrix_axis::rows;
    if (cfg.vspace_op == "pearson" || cfg.vspace_op == "cosine") {
        const bool by_rows = !cfg.rows.empty();
        const auto& labels = by_rows ? cfg.rows : cfg.cols;
        std::vector<double> u, v;
        if (by_rows) {
            auto a = m.row(m.row_index(labels[0]));
            auto b = m.row(m.row_index(labels[1]));
            u.assign(a.begin(), a.end());
            v.assign(b.begin(), b.end());
        } else {
            u = m.column(m.column_index(labels[0]));
            v = m.column(m.column_index(labels[1]));
        }
        const double value = cfg.vspace_op == "pearson" ? pearson(u, v) : cosine(u, v);
        return render(cfg, {{"kind", cfg.vspace_op}, {"labels", labels}, {"axis", by_rows ? "rows" : "columns"}, {"value", value}});
    }

    const auto kind = parse_similarity_kind(cfg.kind);
    if (cfg.vspace_op == "simmatrix") {
        const auto s = similarity(m, kind, axis);
        if (cfg.format != "csv") return to_json(s).dump(2) + "\n";
        std::ostringstream out;
        out << "label";
        for (const auto& l : s.labels) out << ',' << csv::quote(l);
        out << '\n';
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << csv::quote(s.labels[i]);
            for (std::size_t j = 0; j < s.size(); ++j) out << ',' << (s.at(i, j) ? csv_number(*s.at(i, j)) : "");
            out << '\n';
        }
        return out.str();
    }

    // eigen
    square_matrix w;
    std::vector<std::string> labels;
    if (cfg.as_matrix) {
        if (m.rows() != m.columns()) throw invalid_argument("--matrix input must be square");
        w = square_matrix(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.columns(); ++j) w(i, j) = m.at(i, j);
        }
        labels = m.row_labels();
    } else {
        const auto s = similarity(m, kind, axis);
        w = s.to_dense();
        labels = s.labels;
    }
    const eigen_options opts{cfg.tol, cfg.max_iter};
    const auto pairs = cfg.k == 1 ? std::vector<eigen_result>{principal_eigen(w, opts)} : top_eigenvectors(w, cfg.k, opts);
    if (cfg.format == "csv") {
        std::ostringstream out;
        out << "rank,eigenvalue,residual,iterations,degenerate";
        for (const auto& l : labels) out << ',' << csv::quote(l);
        out << '\n';
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            out << r << ',' << csv_number(pairs[r].eigenvalue) << ',' << csv_number(pairs[r].residual) << ','
                << pairs[r].iterations << ',' << (pairs[r].degenerate ? "true" : "false");
            for (double x : pairs[r].eigenvector) out << ',' << csv_number(x);
            out << '\n';
        }
        return out.str();
    }
    json list = json::array();
    for (const auto& p : pairs) list.push_back(to_json(p));
    json j = {{"source", cfg.as_matrix ? "matrix" : cfg.kind}, {"labels", labels}, {"eigenpairs", std::move(list)}};
    return j.dump(2) + "\n";
}

inline std::pair<std::string, bool> run_check(const run_config& cfg) {
    oracle::suite_config sc;
    sc.tables_per_n = cfg.tables;
    sc.seed = cfg.seed;
    const auto outcomes = oracle::run_identity_suite(sc);
    bool all = true;
    json checks = json::array();
    for (const auto& c : outcomes) {
        all = all && c.passed;
        checks.push_back({{"name", c.name}, {"cases", c.cases}, {"worst", c.worst}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    }
    if (cfg.format == "csv") {
        std::ostringstream out;
        out << "name,cases,worst,tolerance,passed\n";
        for (const auto& c : outcomes) {
            out << csv::quote(c.name) << ',' << c.cases << ',' << csv_number(c.worst) << ',' << csv_number(c.tolerance) << ','
                << (c.passed ? "true" : "false") << '\n';
        }
        return {out.str(), all};
    }
    return {json{{"passed", all}, {"base", "bits"}, {"checks", std::move(checks)}}.dump(2) + "\n", all};
}

inline void emit(const std::string& text, const std::string& destination, std::ostream& out) {
    if (destination.empty() || destination == "-") {
        out << text;
        out.flush();
        return;
    }
    std::ofstream file(destination, std::ios::binary | std::ios::trunc);
    if (!file) throw error("cannot write output '" + destination + "'");
    file << text;
    file.close();
    if (!file) throw error("failed writing output '" + destination + "'");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    run_config cfg;
    CLI::App app{"Entropy, transmission and mutual-redundancy analytics over categorical data", "mured"};
    app.require_subcommand(1, 1);

    const std::vector<std::string> bases{"bits", "nats", "hartleys"};
    const std::vector<std::string> formats{"json", "csv"};

    auto add_io = [&](CLI::App* sub, const std::string& input_help) {
        sub->add_option("input", cfg.input, input_help)->required();
        sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember(formats));
        sub->add_option("--out", cfg.out, "Output path (default stdout)");
    };
    auto add_table = [&](CLI::App* sub, bool events_only) {
        add_io(sub, events_only ? "Event CSV/TSV with a header row" : "JointTable JSON or event CSV/TSV");
        sub->add_option("--base", cfg.base, "Logarithm base")->check(CLI::IsMember(bases));
        sub->add_option("--vars", cfg.variables, "Comma-separated variable subset")->delimiter(',');
        sub->add_option("--alpha", cfg.alpha, "Additive smoothing for event counts");
        sub->add_option("--missing", cfg.missing, "Empty fields: keep, drop or strict")
            ->check(CLI::IsMember({"keep", "drop", "strict"}));
        sub->add_option("--time-col", cfg.time_col, "Time column (sorts events; required for --span)");
        sub->add_option("--input-format", cfg.input_format, "auto, table, csv or tsv")
            ->check(CLI::IsMember({"auto", "table", "csv", "tsv"}));
    };

    auto* entropy_cmd = app.add_subcommand("entropy", "H, H_max and Shannon redundancy");
    add_table(entropy_cmd, false);
    entropy_cmd->add_option("--support", cfg.support, "H_max support")->check(CLI::IsMember({"alphabet", "observed"}));
    auto* mi_cmd = app.add_subcommand("mi", "Transmission among a variable subset");
    add_table(mi_cmd, false);
    auto* red_cmd = app.add_subcommand("redundancy", "Mutual redundancy R_n");
    add_table(red_cmd, false);
    auto* dec_cmd = app.add_subcommand("decompose", "R_n split into subadditivity and configurational terms");
    add_table(dec_cmd, false);
    auto* q_cmd = app.add_subcommand("q", "Krippendorff's Q");
    add_table(q_cmd, false);

    auto* series_cmd = app.add_subcommand("series", "Windowed series of all measures");
    auto* capacity_cmd = app.add_subcommand("capacity", "Cumulative H_obs / H_max / redundancy curves");
    for (auto* sub : {series_cmd, capacity_cmd}) {
        add_table(sub, true);
        sub->add_option("--window", cfg.window, "Window size in events")->check(CLI::PositiveNumber);
        sub->add_option("--span", cfg.span, "Window span (e.g. 3600, 90s, 15m, 2h, 7d, 1w)");
        sub->add_option("--step", cfg.step, "Window step (events, or a duration with --span)");
    }
    // capacity always measures H_max over the support seen so far
    series_cmd->add_option("--support", cfg.support, "H_max support")->check(CLI::IsMember({"alphabet", "observed"}));
    series_cmd->add_option("--scope", cfg.scope, "Alphabet scope")->check(CLI::IsMember({"global", "per-window"}));
    series_cmd->add_flag("--allow-gaps", cfg.allow_gaps, "Permit a step larger than the window");
    series_cmd->add_flag("--decompose", cfg.decompose, "Attach the full decomposition to every window");

    auto* vspace_cmd = app.add_subcommand("vspace", "Similarity and eigenvectors of an incidence matrix");
    vspace_cmd->require_subcommand(1, 1);
    for (const char* op : {"pearson", "cosine", "simmatrix", "eigen"}) {
        auto* sub = vspace_cmd->add_subcommand(op, std::string(op) + " on an incidence CSV");
        add_io(sub, "Incidence CSV/TSV (row label column, header of column labels)");
        sub->add_option("--input-format", cfg.input_format, "auto, csv or tsv")->check(CLI::IsMember({"auto", "csv", "tsv"}));
        if (std::string(op) == "pearson" || std::string(op) == "cosine") {
            sub->add_option("--rows", cfg.rows, "Two row labels")->delimiter(',');
            sub->add_option("--cols", cfg.cols, "Two column labels")->delimiter(',');
        } else {
            sub->add_option("--kind", cfg.kind, "pearson or cosine")->check(CLI::IsMember({"pearson", "cosine"}));
            sub->add_option("--axis", cfg.axis, "rows or columns")->check(CLI::IsMember({"rows", "columns"}));
        }
        if (std::string(op) == "eigen") {
            sub->add_option("--k", cfg.k, "Number of eigenpairs")->check(CLI::PositiveNumber);
            sub->add_option("--tol", cfg.tol, "Residual tolerance");
            sub->add_option("--max-iter", cfg.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
            sub->add_flag("--matrix", cfg.as_matrix, "Treat the CSV as the square matrix itself");
        }
    }

    auto* check_cmd = app.add_subcommand("check", "Run the identity and fixture suite");
    check_cmd->add_option("--tables", cfg.tables, "Random tables per dimension")->check(CLI::PositiveNumber);
    check_cmd->add_option("--seed", cfg.seed, "Suite seed");
    check_cmd->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember(formats));
    check_cmd->add_option("--out", cfg.out, "Output path (default stdout)");

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(args);
        cfg.subcommand = app.get_subcommands().front()->get_name();
        if (cfg.subcommand == "vspace") cfg.vspace_op = vspace_cmd->get_subcommands().front()->get_name();
        detail::validate(cfg);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::Success&) {
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "mured: " << e.what() << "\n";
        return usage_error;
    } catch (const usage& e) {
        err << "mured: " << e.what() << "\n";
        return usage_error;
    }

    try {
        std::string text;
        int code = ok;
        const auto base = parse_log_base(cfg.base);
        if (cfg.subcommand == "entropy") {
            text = detail::run_entropy(cfg);
        } else if (cfg.subcommand == "mi") {
            const auto [t, vars] = detail::read_table(cfg);
            text = detail::render(cfg, detail::scalar_result(cfg, vars, "transmission", transmission(t, vars, base).value));
        } else if (cfg.subcommand == "redundancy") {
            const auto [t, vars] = detail::read_table(cfg);
            const double r = mutual_redundancy(t, vars, base);
            json j = detail::scalar_result(cfg, vars, "redundancy", r);
            j["regime"] = to_string(classify_regime(r));
            text = detail::render(cfg, j);
        } else if (cfg.subcommand == "decompose") {
            text = detail::run_decompose(cfg);
        } else if (cfg.subcommand == "q") {
            const auto [t, vars] = detail::read_table(cfg);
            text = detail::render(cfg, detail::scalar_result(cfg, vars, "q", krippendorff_q(t, vars, base)));
        } else if (cfg.subcommand == "series") {
            text = detail::run_series(cfg);
        } else if (cfg.subcommand == "capacity") {
            text = detail::run_capacity(cfg);
        } else if (cfg.subcommand == "vspace") {
            text = detail::run_vspace(cfg);
        } else if (cfg.subcommand == "check") {
            auto [report, passed] = detail::run_check(cfg);
            text = std::move(report);
            if (!passed) code = computation_error;
        }
        detail::emit(text, cfg.out, out);
        return code;
    } catch (const std::exception& e) {
        err << "mured: " << e.what() << "\n";
        return computation_error;
    }
}

}  // namespace mured::cli
