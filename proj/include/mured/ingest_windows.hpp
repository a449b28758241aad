#pragma once

// Event logs -> contingency tables -> windowed series of the information measures.
//
// Distributions are plug-in (maximum likelihood) estimates from counts, with an
// optional additive smoothing term. Windows may be counted in events or in time.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mured/core_entropy.hpp"
#include "mured/csv.hpp"
#include "mured/error.hpp"
#include "mured/multivariate.hpp"

namespace mured {

enum class missing_policy {
    keep,    ///< empty string is an ordinary category
    drop,    ///< rows with any empty field are skipped and counted
    strict,  ///< an empty field is a parse error
};

enum class delimited_format { csv, tsv };

enum class alphabet_scope { global, per_window };

enum class time_key_kind { numeric, iso8601, lexicographic };

inline missing_policy parse_missing_policy(std::string_view text) {
    if (text == "keep") return missing_policy::keep;
    if (text == "drop") return missing_policy::drop;
    if (text == "strict") return missing_policy::strict;
    throw invalid_argument("unknown missing-value policy '" + std::string(text) + "'");
}

inline alphabet_scope parse_alphabet_scope(std::string_view text) {
    if (text == "global") return alphabet_scope::global;
    if (text == "per-window") return alphabet_scope::per_window;
    throw invalid_argument("unknown alphabet scope '" + std::string(text) + "'");
}

namespace detail {

inline std::optional<double> parse_number(std::string_view text) noexcept {
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

inline bool read_digits(std::string_view& s, std::size_t count, int& out) noexcept {
    if (s.size() < count) return false;
    int v = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    s.remove_prefix(count);
    return true;
}

inline bool eat(std::string_view& s, char c) noexcept {
    if (s.empty() || s.front() != c) return false;
    s.remove_prefix(1);
    return true;
}

/// Seconds since the Unix epoch for `YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM]`.
inline std::optional<double> parse_iso8601(std::string_view s) noexcept {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0;
    if (!read_digits(s, 4, y) || !eat(s, '-') || !read_digits(s, 2, mo) || !eat(s, '-') || !read_digits(s, 2, d)) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    double seconds = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86400.0;
    if (s.empty()) return seconds;

    if (!eat(s, 'T') && !eat(s, ' ')) return std::nullopt;
    int hh = 0, mm = 0, ss = 0;
    if (!read_digits(s, 2, hh) || !eat(s, ':') || !read_digits(s, 2, mm)) return std::nullopt;
    double fraction = 0.0;
    if (eat(s, ':')) {
        if (!read_digits(s, 2, ss)) return std::nullopt;
        if (eat(s, '.')) {
            double scale = 0.1;
            bool any = false;
            while (!s.empty() && s.front() >= '0' && s.front() <= '9') {
                fraction += scale * (s.front() - '0');
                scale /= 10.0;
                s.remove_prefix(1);
                any = true;
            }
            if (!any) return std::nullopt;
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    seconds += hh * 3600.0 + mm * 60.0 + ss + fraction;
    if (s.empty() || eat(s, 'Z')) return s.empty() ? std::optional<double>(seconds) : std::nullopt;

    const bool minus = s.front() == '-';
    if (!eat(s, '+') && !eat(s, '-')) return std::nullopt;
    int oh = 0, om = 0;
    if (!read_digits(s, 2, oh)) return std::nullopt;
    eat(s, ':');
    if (!s.empty() && !read_digits(s, 2, om)) return std::nullopt;
    if (!s.empty() || oh > 23 || om > 59) return std::nullopt;
    const double offset = oh * 3600.0 + om * 60.0;
    return minus ? seconds + offset : seconds - offset;
}

inline std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

inline std::string format_iso8601(double epoch_seconds) {
    using namespace std::chrono;
    const double day_count = std::floor(epoch_seconds / 86400.0);
    double rest = epoch_seconds - day_count * 86400.0;
    const year_month_day ymd{sys_days{days{static_cast<long long>(day_count)}}};
    const int hh = static_cast<int>(rest / 3600.0);
    rest -= hh * 3600.0;
    const int mm = static_cast<int>(rest / 60.0);
    rest -= mm * 60.0;
    const double whole = std::floor(rest);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hh, mm,
                  static_cast<int>(whole));
    std::string out = buf;
    if (rest - whole > 0.0) {
        const std::string frac = format_number(rest - whole);  // "0.xyz"
        out += frac.substr(1);
    }
    return out + "Z";
}

}  // namespace detail

/// Time keys resolved to an ordering (and, when arithmetic, to numeric values).
struct time_axis {
    time_key_kind kind = time_key_kind::lexicographic;
    std::vector<double> values;  ///< empty for lexicographic keys

    std::string format(double v) const {
        return kind == time_key_kind::iso8601 ? detail::format_iso8601(v) : detail::format_number(v);
    }
};

/// All-numeric keys are numeric; all-ISO keys are timestamps; a mix of ISO and
/// other keys is rejected; anything else compares lexicographically.
inline time_axis classify_time_keys(const std::vector<std::string_view>& keys) {
    time_axis axis;
    std::vector<double> numeric;
    numeric.reserve(keys.size());
    for (auto k : keys) {
        auto v = detail::parse_number(k);
        if (!v) break;
        numeric.push_back(*v);
    }
    if (numeric.size() == keys.size()) {
        axis.kind = time_key_kind::numeric;
        axis.values = std::move(numeric);
        return axis;
    }
    std::vector<double> iso;
    std::size_t iso_count = 0;
    for (auto k : keys) {
        auto v = detail::parse_iso8601(k);
        iso.push_back(v.value_or(0.0));
        iso_count += v ? 1 : 0;
    }
    if (iso_count == keys.size()) {
        axis.kind = time_key_kind::iso8601;
        axis.values = std::move(iso);
        return axis;
    }
    if (iso_count > 0) throw parse_error("time column mixes ISO-8601 and non-ISO-8601 keys");
    axis.kind = time_key_kind::lexicographic;
    return axis;
}

/// Ordered categorical records. Immutable after load; rows are sorted by the time
/// column when one is set.
struct event_log {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::optional<std::string> time_column;
    std::size_t dropped_rows = 0;

    std::size_t size() const noexcept { return rows.size(); }

    std::size_t column_index(const std::string& name) const {
        auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw unknown_variable(name);
        return static_cast<std::size_t>(it - columns.begin());
    }

    time_axis time_keys() const {
        if (!time_column) throw invalid_argument("event log has no time column");
        const std::size_t c = column_index(*time_column);
        std::vector<std::string_view> keys;
        keys.reserve(rows.size());
        for (const auto& r : rows) keys.push_back(r[c]);
        return classify_time_keys(keys);
    }
};

inline void sort_by_time(event_log& log) {
    const time_axis axis = log.time_keys();
    std::vector<std::size_t> order(log.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t c = log.column_index(*log.time_column);
    if (axis.kind == time_key_kind::lexicographic) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return log.rows[a][c] < log.rows[b][c]; });
    } else {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return axis.values[a] < axis.values[b]; });
    }
    std::vector<std::vector<std::string>> sorted;
    sorted.reserve(order.size());
    for (std::size_t i : order) sorted.push_back(std::move(log.rows[i]));
    log.rows = std::move(sorted);
}

inline event_log load_events(std::istream& in, delimited_format format = delimited_format::csv,
                             missing_policy policy = missing_policy::keep,
                             std::optional<std::string> time_column = std::nullopt) {
    csv::reader reader(in, format == delimited_format::csv ? ',' : '\t');
    auto header = reader.next();
    if (!header) throw parse_error("event file has no header row", 1);

    event_log log;
    log.columns = std::move(header->fields);
    std::unordered_set<std::string_view> names;
    for (const auto& c : log.columns) {
        if (!names.insert(c).second) throw parse_error("duplicate column '" + c + "'", header->line);
    }
    if (time_column) {
        log.column_index(*time_column);  // throws for an unknown column
        log.time_column = std::move(time_column);
    }

    while (auto rec = reader.next()) {
        if (rec->fields.size() != log.columns.size()) {
            throw parse_error("expected " + std::to_string(log.columns.size()) + " fields, found " +
                                  std::to_string(rec->fields.size()),
                              rec->line);
        }
        const bool has_empty =
            std::any_of(rec->fields.begin(), rec->fields.end(), [](const std::string& f) { return f.empty(); });
        if (has_empty && policy == missing_policy::strict) throw parse_error("empty field", rec->line);
        if (has_empty && policy == missing_policy::drop) {
            ++log.dropped_rows;
            continue;
        }
        log.rows.push_back(std::move(rec->fields));
    }
    if (log.time_column) sort_by_time(log);
    return log;
}

struct tabulate_options {
    alphabet_scope scope = alphabet_scope::global;
    double alpha = 0.0;  ///< additive smoothing added to every cell
};

namespace detail {

/// Columns re-coded against their sorted global alphabets.
struct encoded_log {
    std::vector<variable_spec> variables;
    std::vector<std::vector<std::uint32_t>> codes;  ///< codes[var][row]
    std::size_t rows = 0;
};

inline encoded_log encode(const event_log& log, const std::vector<std::string>& variables) {
    if (variables.empty()) throw invalid_argument("no variables selected");
    encoded_log out;
    out.rows = log.size();
    for (std::size_t v = 0; v < variables.size(); ++v) {
        for (std::size_t w = 0; w < v; ++w) {
            if (variables[w] == variables[v]) throw invalid_argument("variable '" + variables[v] + "' listed twice");
        }
        const std::size_t c = log.column_index(variables[v]);
        std::vector<std::string> alphabet;
        {
            std::unordered_set<std::string_view> seen;
            for (const auto& r : log.rows) {
                if (seen.insert(r[c]).second) alphabet.push_back(r[c]);
            }
        }
        std::sort(alphabet.begin(), alphabet.end());
        std::unordered_map<std::string_view, std::uint32_t> code_of;
        for (std::size_t i = 0; i < alphabet.size(); ++i) code_of.emplace(alphabet[i], static_cast<std::uint32_t>(i));
        std::vector<std::uint32_t> codes;
        codes.reserve(log.size());
        for (const auto& r : log.rows) codes.push_back(code_of.at(r[c]));
        out.codes.push_back(std::move(codes));
        if (alphabet.empty()) alphabet.emplace_back();  // placeholder; empty logs are rejected at tabulation
        out.variables.emplace_back(variables[v], std::move(alphabet));
    }
    return out;
}

/// Counts rows [lo, hi) into a table.
inline joint_table tabulate_rows(const encoded_log& enc, std::size_t lo, std::size_t hi, const tabulate_options& opts) {
    if (hi <= lo) throw invalid_table("cannot tabulate an empty set of events");
    if (!(opts.alpha >= 0.0) || !std::isfinite(opts.alpha)) throw invalid_argument("smoothing alpha must be >= 0");
    const std::size_t rank = enc.variables.size();

    std::vector<variable_spec> vars;
    std::vector<std::vector<std::uint32_t>> remap(rank);
    for (std::size_t v = 0; v < rank; ++v) {
        const auto& global = enc.variables[v];
        if (opts.scope == alphabet_scope::global) {
            vars.push_back(global);
            continue;
        }
        std::vector<bool> present(global.size(), false);
        for (std::size_t r = lo; r < hi; ++r) present[enc.codes[v][r]] = true;
        std::vector<std::string> alphabet;
        remap[v].assign(global.size(), 0);
        for (std::size_t k = 0; k < global.size(); ++k) {
            if (present[k]) {
                remap[v][k] = static_cast<std::uint32_t>(alphabet.size());
                alphabet.push_back(global.alphabet()[k]);
            }
        }
        vars.emplace_back(global.name(), std::move(alphabet));
    }

    std::vector<std::size_t> strides(rank, 1);
    std::size_t cells = 1;
    for (std::size_t v = rank; v-- > 0;) {
        strides[v] = cells;
        cells *= vars[v].size();
    }
    std::vector<double> counts(cells, opts.alpha);
    for (std::size_t r = lo; r < hi; ++r) {
        std::size_t offset = 0;
        for (std::size_t v = 0; v < rank; ++v) {
            const std::uint32_t code = enc.codes[v][r];
            offset += (opts.scope == alphabet_scope::global ? code : remap[v][code]) * strides[v];
        }
        counts[offset] += 1.0;
    }
    return joint_table(std::move(vars), std::move(counts));
}

}  // namespace detail

/// Co-occurrence counts of `variables` over the whole log. Alphabets are the sorted
/// distinct observed values.
inline joint_table tabulate(const event_log& log, const std::vector<std::string>& variables,
                            const tabulate_options& opts = {}) {
    if (log.size() == 0) throw invalid_table("cannot tabulate an empty event log");
    return detail::tabulate_rows(detail::encode(log, variables), 0, log.size(), opts);
}

class window_spec {
public:
    enum class mode { count, time };

    static window_spec by_count(std::size_t size, std::size_t step, bool allow_gaps = false) {
        if (size == 0 || step == 0) throw invalid_argument("window size and step must be positive");
        if (step > size && !allow_gaps) throw invalid_argument("step larger than window skips events; allow gaps explicitly");
        window_spec w;
        w.mode_ = mode::count;
        w.size_ = static_cast<double>(size);
        w.step_ = static_cast<double>(step);
        w.allow_gaps_ = allow_gaps;
        return w;
    }

    static window_spec by_time(double span, double step, bool allow_gaps = false) {
        if (!(span > 0.0) || !(step > 0.0) || !std::isfinite(span) || !std::isfinite(step)) {
            throw invalid_argument("window span and step must be positive");
        }
        if (step > span && !allow_gaps) throw invalid_argument("step larger than span skips events; allow gaps explicitly");
        window_spec w;
        w.mode_ = mode::time;
        w.size_ = span;
        w.step_ = step;
        w.allow_gaps_ = allow_gaps;
        return w;
    }

    window_spec& with_scope(alphabet_scope s) noexcept {
        scope_ = s;
        return *this;
    }

    mode kind() const noexcept { return mode_; }
    double size() const noexcept { return size_; }  ///< events (count mode) or span (time mode)
    double step() const noexcept { return step_; }
    alphabet_scope scope() const noexcept { return scope_; }
    bool allow_gaps() const noexcept { return allow_gaps_; }
    bool has_gaps() const noexcept { return step_ > size_; }

private:
    window_spec() = default;
    mode mode_ = mode::count;
    double size_ = 1.0;
    double step_ = 1.0;
    alphabet_scope scope_ = alphabet_scope::global;
    bool allow_gaps_ = false;
};

/// Parses "3600", "90s", "15m", "2h", "7d", "1w" into seconds (or plain units).
inline double parse_duration(std::string_view text) {
    if (text.empty()) throw invalid_argument("empty duration");
    double scale = 1.0;
    switch (text.back()) {
        case 's': scale = 1.0; break;
        case 'm': scale = 60.0; break;
        case 'h': scale = 3600.0; break;
        case 'd': scale = 86400.0; break;
        case 'w': scale = 604800.0; break;
        default: scale = 0.0; break;
    }
    if (scale != 0.0) text.remove_suffix(1);
    else scale = 1.0;
    const auto v = detail::parse_number(text);
    if (!v || !(*v > 0.0)) throw invalid_argument("invalid duration '" + std::string(text) + "'");
    return *v * scale;
}

/// Which measures each window computes.
struct series_options {
    log_base base = log_base::bits;
    support_mode support = support_mode::alphabet;
    double alpha = 0.0;
    bool pairwise = true;    ///< T for every pair of selected variables
    bool decompose = false;  ///< full decomposition (r_n is taken from it)
};

/// One window's measures. Undefined values are NaN.
struct series_point {
    std::size_t window_index = 0;
    std::string start;
    std::string end;
    std::size_t event_count = 0;
    log_base base = log_base::bits;
    double h_obs = std::numeric_limits<double>::quiet_NaN();
    double h_max = std::numeric_limits<double>::quiet_NaN();
    double redundancy = std::numeric_limits<double>::quiet_NaN();
    std::vector<transmission_value> pair_transmissions;
    double r_n = std::numeric_limits<double>::quiet_NaN();
    std::string regime = "undefined";
    std::optional<mured::decomposition> decomposition;
    std::vector<std::string> flags;  ///< empty, partial, gap, window_exceeds_log, single_outcome
};

/// All per-window measures of one table; the window fields are left default.
inline series_point measure_table(const joint_table& table, const std::vector<std::string>& variables,
                                  const series_options& opts) {
    series_point p;
    p.base = opts.base;
    p.h_obs = entropy(table, opts.base).value;
    p.h_max = max_entropy(table, opts.support, opts.base).value;
    if (p.h_max > 0.0) {
        p.redundancy = shannon_redundancy(table, opts.support);
    } else {
        p.flags.emplace_back("single_outcome");
    }
    if (opts.pairwise) {
        for (std::size_t i = 0; i < variables.size(); ++i) {
            for (std::size_t j = i + 1; j < variables.size(); ++j) {
                p.pair_transmissions.push_back(transmission(table, {variables[i], variables[j]}, opts.base));
            }
        }
    }
    if (variables.size() >= 2) {
        if (opts.decompose) {
            p.decomposition = decompose(table, variables, opts.base);
            p.r_n = p.decomposition->redundancy;
        } else {
            p.r_n = mutual_redundancy(table, variables, opts.base);
        }
        p.regime = std::string(to_string(classify_regime(p.r_n)));
    }
    return p;
}

namespace detail {

struct window_bounds {
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::string start;
    std::string end;
    std::vector<std::string> flags;
};

inline std::vector<window_bounds> plan_windows(const event_log& log, const window_spec& spec, bool cumulative) {
    std::vector<window_bounds> out;
    const std::size_t n = log.size();
    if (n == 0) throw invalid_table("event log is empty");

    if (spec.kind() == window_spec::mode::count) {
        const auto size = static_cast<std::size_t>(spec.size());
        const auto step = static_cast<std::size_t>(spec.step());
        if (cumulative) {
            for (std::size_t end = step;; end += step) {
                const std::size_t hi = std::min(end, n);
                out.push_back({0, hi, "0", std::to_string(hi), {}});
                if (hi == n) break;
            }
            return out;
        }
        if (size > n) {
            out.push_back({0, n, "0", std::to_string(n), {"window_exceeds_log"}});
            return out;
        }
        for (std::size_t i = 0;; ++i) {
            const std::size_t lo = i * step;
            const std::size_t hi = std::min(lo + size, n);
            window_bounds w{lo, hi, std::to_string(lo), std::to_string(hi), {}};
            if (hi - lo < size) w.flags.emplace_back("partial");
            if (i > 0 && spec.has_gaps()) w.flags.emplace_back("gap");
            out.push_back(std::move(w));
            if (lo + size >= n || lo + step >= n) break;
        }
        return out;
    }

    const time_axis axis = log.time_keys();
    if (axis.kind == time_key_kind::lexicographic) {
        throw invalid_argument("time windows need numeric or ISO-8601 time keys");
    }
    const auto& t = axis.values;  // sorted at load
    const double first = t.front();
    const double last = t.back();
    for (std::size_t i = 0;; ++i) {
        const double start = cumulative ? first : first + static_cast<double>(i) * spec.step();
        const double end = cumulative ? first + static_cast<double>(i + 1) * spec.step() : start + spec.size();
        if (i > 0 && start > last) break;
        const auto lo = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), start) - t.begin());
        const auto hi = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), end) - t.begin());
        window_bounds w{lo, hi, axis.format(start), axis.format(end), {}};
        if (!cumulative) {
            if (i == 0 && end > last && spec.size() > last - first) w.flags.emplace_back("window_exceeds_log");
            if (i > 0 && spec.has_gaps()) w.flags.emplace_back("gap");
        }
        out.push_back(std::move(w));
        if (end > last) break;
    }
    return out;
}

}  // namespace detail

/// Measures per window position, in window order. Empty windows yield flagged points.
inline std::vector<series_point> window_series(const event_log& log, const std::vector<std::string>& variables,
                                               const window_spec& spec, const series_options& opts = {}) {
    const auto enc = detail::encode(log, variables);
    const tabulate_options tab{spec.scope(), opts.alpha};
    std::vector<series_point> series;
    std::size_t index = 0;
    for (auto& w : detail::plan_windows(log, spec, false)) {
        series_point p;
        if (w.hi > w.lo) {
            p = measure_table(detail::tabulate_rows(enc, w.lo, w.hi, tab), variables, opts);
        } else {
            p.base = opts.base;
            p.regime = "empty";
            p.flags.emplace_back("empty");
        }
        p.window_index = index++;
        p.start = std::move(w.start);
        p.end = std::move(w.end);
        p.event_count = w.hi - w.lo;
        p.flags.insert(p.flags.begin(), w.flags.begin(), w.flags.end());
        series.push_back(std::move(p));
    }
    return series;
}

struct capacity_point {
    std::size_t window_index = 0;
    std::string end;
    std::size_t event_count = 0;
    log_base base = log_base::bits;
    double h_obs = 0.0;
    double h_max = 0.0;
    double redundancy = std::numeric_limits<double>::quiet_NaN();  ///< NaN while H_max = 0
};

/// Cumulative-prefix curves: point i covers everything before the i-th step boundary.
/// H_max counts only the cells observed so far, so capacity grows with new categories.
inline std::vector<capacity_point> capacity_series(const event_log& log, const std::vector<std::string>& variables,
                                                   const window_spec& spec, const series_options& opts = {}) {
    const auto enc = detail::encode(log, variables);
    const tabulate_options tab{alphabet_scope::per_window, opts.alpha};
    std::vector<capacity_point> series;
    std::size_t index = 0;
    for (const auto& w : detail::plan_windows(log, spec, true)) {
        capacity_point p;
        p.window_index = index++;
        p.end = w.end;
        p.event_count = w.hi;
        p.base = opts.base;
        const joint_table table = detail::tabulate_rows(enc, 0, w.hi, tab);
        p.h_obs = entropy(table, opts.base).value;
        p.h_max = max_entropy(table, support_mode::observed, opts.base).value;
        if (p.h_max > 0.0) p.redundancy = shannon_redundancy(table, support_mode::observed);
        series.push_back(std::move(p));
    }
    return series;
}

}  // namespace mured
