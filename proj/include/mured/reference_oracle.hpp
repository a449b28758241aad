#pragma once

// Second-path computations and canonical fixtures.
//
// oracle_transmission never uses inclusion-exclusion. It peels one variable at a
// time, T(S + k | C) = T(S | C) - T(S | C + k), down to conditional entropies that
// are evaluated slice by slice as sum_c p(c) H(A | C = c). Agreement with
// `transmission` is therefore evidence rather than a restatement.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mured/core_entropy.hpp"
#include "mured/error.hpp"
#include "mured/multivariate.hpp"
#include "mured/vector_space.hpp"

namespace mured::oracle {

/// SplitMix64 (Steele, Lea, Flood 2014), the published constants.
class splitmix64 {
public:
    explicit constexpr splitmix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    constexpr double unit() noexcept { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform in [0, bound).
    constexpr std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

private:
    std::uint64_t state_;
};

/// Reproducible random table over variables x1..xn with 2..max_categories
/// categories each; floor(zero_fraction * cells) cells are exactly zero.
inline joint_table random_table(std::size_t n_vars, std::size_t max_categories, std::uint64_t seed,
                                double zero_fraction = 0.0) {
    if (n_vars < 2 || n_vars > 6) throw invalid_argument("random_table: n_vars must be in [2, 6]");
    if (max_categories < 2 || max_categories > 6) throw invalid_argument("random_table: max_categories must be in [2, 6]");
    if (!(zero_fraction >= 0.0) || zero_fraction >= 1.0) throw invalid_argument("random_table: zero_fraction must be in [0, 1)");

    splitmix64 rng(seed);
    std::vector<variable_spec> vars;
    std::size_t cells = 1;
    for (std::size_t v = 0; v < n_vars; ++v) {
        const std::size_t k = 2 + rng.below(max_categories - 1);
        std::vector<std::string> alphabet;
        for (std::size_t c = 0; c < k; ++c) alphabet.push_back(std::to_string(c));
        vars.emplace_back("x" + std::to_string(v + 1), std::move(alphabet));
        cells *= k;
    }
    std::vector<double> weights(cells);
    for (double& w : weights) w = rng.unit();

    const auto zeros = static_cast<std::size_t>(std::floor(zero_fraction * static_cast<double>(cells)));
    if (zeros >= cells) throw invalid_argument("random_table: zero_fraction leaves no mass");
    std::vector<std::size_t> order(cells);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = cells - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t i = 0; i < zeros; ++i) weights[order[i]] = 0.0;
    return joint_table(std::move(vars), std::move(weights));
}

namespace detail {

/// H(targets | given) in nats as sum over given-configurations c of
/// sum_t p(t, c) ln(p(c) / p(t, c)). Cell coordinates come from division,
/// independent of the main module's marginalization.
inline double conditional_entropy_direct(const joint_table& table, const std::vector<std::size_t>& targets,
                                         const std::vector<std::size_t>& given) {
    const auto& vars = table.variables();
    auto radix_of = [&](const std::vector<std::size_t>& axes) {
        std::size_t r = 1;
        for (std::size_t a : axes) r *= vars[a].size();
        return r;
    };
    const std::size_t target_cells = radix_of(targets);
    const std::size_t given_cells = radix_of(given);
    std::vector<long double> joint(target_cells * given_cells, 0.0L);
    std::vector<long double> condition(given_cells, 0.0L);

    const auto cells = table.cells();
    std::vector<std::size_t> coordinate(vars.size());
    for (std::size_t offset = 0; offset < cells.size(); ++offset) {
        if (cells[offset] == 0.0) continue;
        std::size_t rest = offset;
        for (std::size_t d = vars.size(); d-- > 0;) {
            coordinate[d] = rest % vars[d].size();
            rest /= vars[d].size();
        }
        std::size_t t = 0;
        for (std::size_t a : targets) t = t * vars[a].size() + coordinate[a];
        std::size_t g = 0;
        for (std::size_t a : given) g = g * vars[a].size() + coordinate[a];
        joint[g * target_cells + t] += cells[offset];
        condition[g] += cells[offset];
    }

    const long double total = table.total();
    long double h = 0.0L;
    for (std::size_t g = 0; g < given_cells; ++g) {
        if (condition[g] == 0.0L) continue;
        for (std::size_t t = 0; t < target_cells; ++t) {
            const long double w = joint[g * target_cells + t];
            if (w > 0.0L) h += (w / total) * std::log(condition[g] / w);
        }
    }
    return static_cast<double>(h);
}

/// T(subset | given) by peeling the last variable of `subset`.
inline double conditional_transmission(const joint_table& table, std::vector<std::size_t> subset,
                                       std::vector<std::size_t> given) {
    if (subset.size() == 1) return conditional_entropy_direct(table, subset, given);
    const std::size_t peeled = subset.back();
    subset.pop_back();
    const double outer = conditional_transmission(table, subset, given);
    given.push_back(peeled);
    return outer - conditional_transmission(table, std::move(subset), std::move(given));
}

}  // namespace detail

/// Transmission among `subset`, peeling variables from the back of `subset`.
/// Reordering `subset` changes the recursion path but not the value.
inline double oracle_transmission(const joint_table& table, const std::vector<std::string>& subset,
                                  log_base base = log_base::bits) {
    if (subset.size() < 2) throw invalid_argument("oracle_transmission needs at least two variables");
    if (subset.size() > 8) throw subset_too_large(subset.size(), 8);
    std::vector<std::size_t> axes;
    for (const auto& name : subset) {
        const std::size_t a = table.index_of(name);
        for (std::size_t seen : axes) {
            if (seen == a) throw invalid_argument("variable '" + name + "' listed twice");
        }
        axes.push_back(a);
    }
    return detail::conditional_transmission(table, axes, {}) / nats_per_unit(base);
}

enum class provenance { paper, trivial, derived };

constexpr std::string_view to_string(provenance p) noexcept {
    switch (p) {
        case provenance::paper: return "paper";
        case provenance::trivial: return "trivial";
        case provenance::derived: break;
    }
    return "derived";
}

inline provenance parse_provenance(std::string_view text) {
    if (text == "paper") return provenance::paper;
    if (text == "trivial") return provenance::trivial;
    if (text == "derived") return provenance::derived;
    throw invalid_argument("unknown provenance '" + std::string(text) + "'");
}

/// One expected value. Measure names:
///   H, H_max, shannon_redundancy           over the whole table (bits)
///   T, R, Q, gap, negative_term, config_term over all table variables
///   T:a,b                                  transmission of a named subset
///   pearson, cosine                        first two incidence rows
struct expectation {
    std::string measure;
    double value = 0.0;
    double tolerance = 1e-12;
    oracle::provenance provenance = provenance::trivial;
    std::string note;
};

struct fixture {
    std::string name;
    std::optional<joint_table> table;
    std::optional<incidence_matrix> incidence;
    std::vector<expectation> expected;
};

namespace detail {

inline std::vector<variable_spec> binary_vars(std::initializer_list<const char*> names) {
    std::vector<variable_spec> out;
    for (const char* n : names) out.emplace_back(n, std::vector<std::string>{"0", "1"});
    return out;
}

inline joint_table single_variable(std::vector<double> cells) {
    std::vector<std::string> alphabet;
    for (std::size_t i = 0; i < cells.size(); ++i) alphabet.push_back(std::string(1, static_cast<char>('a' + i)));
    return joint_table({variable_spec("x", std::move(alphabet))}, std::move(cells));
}

inline std::vector<std::string> split_names(std::string_view list) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::size_t stop = comma == std::string_view::npos ? list.size() : comma;
        out.emplace_back(list.substr(start, stop - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Small tables and one incidence matrix with known expected values.
/// `fixtures/` ships the same data as files.
inline std::vector<fixture> canonical_fixtures() {
    using P = provenance;
    std::vector<fixture> out;

    out.push_back({"appendix-firms",
                   std::nullopt,
                   incidence_matrix({"Firm A", "Firm B"}, {"A", "B", "C1", "C2", "C3"},
                                    {1, 0, 1, 0, 1, 0, 1, 1, 0, 1}),
                   {{"pearson", 0.167, 1e-3, P::paper, "r to three decimals"},
                    {"cosine", 0.667, 1e-3, P::paper, "cos(A,B) to three decimals"},
                    {"pearson", 1.0 / 6.0, 1e-12, P::derived, "exact: covariance 1/25 over variance 6/25"},
                    {"cosine", 2.0 / 3.0, 1e-12, P::derived, "exact: 2 / (sqrt 3 sqrt 3)"}}});

    // x3 = x1 xor x2 with x1, x2 independent fair bits
    out.push_back({"xor",
                   joint_table(detail::binary_vars({"x1", "x2", "x3"}), {1, 0, 0, 1, 0, 1, 1, 0}),
                   std::nullopt,
                   {{"H", 2.0, 1e-12, P::derived, "four equiprobable outcomes"},
                    {"T", -1.0, 1e-12, P::derived, "1+1+1-2-2-2+2 over the 8-cell table"},
                    {"R", -1.0, 1e-12, P::derived, "R123 = T123"},
                    {"Q", 1.0, 1e-12, P::derived, "-sum H_i + sum H_ij - H_123"},
                    {"gap", 1.0, 1e-12, P::derived, "3 - 2"},
                    {"negative_term", -1.0, 1e-12, P::derived, "2 - 3"},
                    {"config_term", 0.0, 1e-12, P::derived, "all pairwise T vanish"},
                    {"T:x1,x2", 0.0, 1e-12, P::derived, "x1, x2 independent"},
                    {"T:x1,x3", 0.0, 1e-12, P::derived, "x1, x3 independent"},
                    {"T:x2,x3", 0.0, 1e-12, P::derived, "x2, x3 independent"}}});

    out.push_back({"copy3",
                   joint_table(detail::binary_vars({"x1", "x2", "x3"}), {1, 0, 0, 0, 0, 0, 0, 1}),
                   std::nullopt,
                   {{"H", 1.0, 1e-12, P::trivial, "one fair bit"},
                    {"T", 1.0, 1e-12, P::derived, "3 - 3 + 1"},
                    {"R", 1.0, 1e-12, P::derived, "R123 = T123"},
                    {"negative_term", -2.0, 1e-12, P::derived, "1 - 3"},
                    {"config_term", 3.0, 1e-12, P::derived, "three pairwise T of 1 bit"},
                    {"T:x1,x2", 1.0, 1e-12, P::trivial, "copied bit"}}});

    out.push_back({"copy2",
                   joint_table(detail::binary_vars({"x1", "x2"}), {1, 0, 0, 1}),
                   std::nullopt,
                   {{"T", 1.0, 1e-12, P::trivial, "1 + 1 - 1"},
                    {"R", -1.0, 1e-12, P::paper, "R12 = -T12"},
                    {"Q", 1.0, 1e-12, P::derived, "H1 + H2 - H12"},
                    {"gap", 1.0, 1e-12, P::trivial, "2 - 1"}}});

    out.push_back({"independent-pair",
                   joint_table(detail::binary_vars({"a", "b"}), {1, 1, 1, 1}),
                   std::nullopt,
                   {{"T", 0.0, 1e-12, P::trivial, "independence"},
                    {"R", 0.0, 1e-12, P::trivial, "independence"},
                    {"Q", 0.0, 1e-12, P::trivial, "independence"},
                    {"gap", 0.0, 1e-12, P::trivial, "independence"}}});

    out.push_back({"independent3",
                   joint_table(detail::binary_vars({"a", "b", "c"}), {1, 1, 1, 1, 1, 1, 1, 1}),
                   std::nullopt,
                   {{"T", 0.0, 1e-12, P::trivial, "independence"},
                    {"R", 0.0, 1e-12, P::trivial, "independence"},
                    {"Q", 0.0, 1e-12, P::trivial, "independence"},
                    {"negative_term", 0.0, 1e-12, P::trivial, "independence"},
                    {"config_term", 0.0, 1e-12, P::trivial, "independence"},
                    {"T:a,b", 0.0, 1e-12, P::trivial, "independence"}}});

    out.push_back({"uniform4",
                   detail::single_variable({1, 1, 1, 1}),
                   std::nullopt,
                   {{"H", 2.0, 1e-12, P::trivial, "log2 4"},
                    {"H_max", 2.0, 1e-12, P::trivial, "log2 4"},
                    {"shannon_redundancy", 0.0, 1e-12, P::trivial, "H = H_max"}}});

    out.push_back({"uniform8",
                   detail::single_variable({1, 1, 1, 1, 1, 1, 1, 1}),
                   std::nullopt,
                   {{"H", 3.0, 1e-12, P::trivial, "log2 8"},
                    {"shannon_redundancy", 0.0, 1e-12, P::trivial, "H = H_max"}}});

    out.push_back({"deterministic8",
                   detail::single_variable({0, 0, 5, 0, 0, 0, 0, 0}),
                   std::nullopt,
                   {{"H", 0.0, 1e-12, P::trivial, "all mass in one cell"},
                    {"shannon_redundancy", 1.0, 1e-12, P::trivial, "H = 0"}}});

    out.push_back({"skewed3",
                   detail::single_variable({0.5, 0.25, 0.25}),
                   std::nullopt,
                   {{"H", 1.5, 1e-12, P::derived, "0.5 + 0.5 + 0.5"},
                    {"shannon_redundancy", 0.0536, 1e-4, P::derived, "1 - 1.5 / log2 3"}}});
    return out;
}

/// Evaluates `measure` on a fixture through the main modules (bits).
inline double evaluate(const fixture& f, const std::string& measure) {
    if (measure == "pearson" || measure == "cosine") {
        if (!f.incidence) throw invalid_argument("fixture '" + f.name + "' has no incidence matrix");
        const auto& m = *f.incidence;
        return measure == "pearson" ? pearson(m.row(0), m.row(1)) : cosine(m.row(0), m.row(1));
    }
    if (!f.table) throw invalid_argument("fixture '" + f.name + "' has no table");
    const auto& t = *f.table;
    const auto all = t.names();
    if (measure == "H") return entropy(t).value;
    if (measure == "H_max") return max_entropy(t).value;
    if (measure == "shannon_redundancy") return shannon_redundancy(t);
    if (measure == "T") return transmission(t, all).value;
    if (measure == "R") return mutual_redundancy(t, all);
    if (measure == "Q") return krippendorff_q(t, all);
    if (measure == "gap") return subadditivity_gap(t, all);
    if (measure == "negative_term") return decompose(t, all).negative_term;
    if (measure == "config_term") return decompose(t, all).config_term;
    if (measure.rfind("T:", 0) == 0) return transmission(t, detail::split_names(measure.substr(2))).value;
    throw invalid_argument("unknown fixture measure '" + measure + "'");
}

/// Outcome of one identity family over a generated suite.
struct check_outcome {
    std::string name;
    std::size_t cases = 0;
    double worst = 0.0;      ///< largest violation magnitude observed
    double tolerance = 0.0;
    bool passed = true;
};

struct suite_config {
    std::size_t tables_per_n = 200;
    std::size_t dual_path_tables = 500;
    std::size_t max_categories = 4;
    std::uint64_t seed = 20150901;
};

/// Every nonempty subset (as names) of the table's variables with size >= min_size.
inline std::vector<std::vector<std::string>> subsets_of(const joint_table& t, std::size_t min_size) {
    const auto names = t.names();
    std::vector<std::vector<std::string>> out;
    const std::uint32_t full = (std::uint32_t{1} << names.size()) - 1;
    for (std::uint32_t m : mured::detail::ordered_masks(full, static_cast<int>(min_size), static_cast<int>(names.size()))) {
        out.push_back(mured::detail::names_of(names, m));
    }
    return out;
}

/// Runs the identity families over seeded random tables plus the fixture values.
inline std::vector<check_outcome> run_identity_suite(const suite_config& cfg = {}) {
    std::vector<check_outcome> out;
    auto record = [](check_outcome& c, double violation) {
        ++c.cases;
        c.worst = std::max(c.worst, violation);
        if (!(violation <= c.tolerance)) c.passed = false;
    };
    auto seed_for = [&](std::size_t n, std::size_t i) { return cfg.seed ^ (n * 0x100000001B3ULL) ^ (i * 0x9E3779B97F4A7C15ULL); };

    check_outcome sign{"redundancy sign law", 0, 0.0, 1e-9, true};
    check_outcome pair_sign{"pair redundancy nonpositive", 0, 0.0, 0.0, true};
    check_outcome q_rel{"Q equals minus redundancy", 0, 0.0, 1e-9, true};
    for (std::size_t n = 2; n <= 4; ++n) {
        for (std::size_t i = 0; i < cfg.tables_per_n; ++i) {
            const auto t = random_table(n, cfg.max_categories, seed_for(n, i));
            const auto all = t.names();
            const double tr = transmission(t, all).value;
            const double r = mutual_redundancy(t, all);
            record(sign, std::fabs(r - (n % 2 == 1 ? tr : -tr)));
            if (n == 2) record(pair_sign, std::max(0.0, r));
            record(q_rel, std::fabs(krippendorff_q(t, all) + r));
        }
    }

    check_outcome series{"alternating transmission series", 0, 0.0, 1e-9, true};
    check_outcome closure{"decomposition closure", 0, 0.0, 1e-9, true};
    check_outcome subadd{"subadditivity", 0, 0.0, 1e-12, true};
    for (std::size_t n = 2; n <= 5; ++n) {
        for (std::size_t i = 0; i < cfg.tables_per_n; ++i) {
            const double zf = i % 2 == 0 ? 0.0 : 0.5;
            const auto t = random_table(n, cfg.max_categories, seed_for(n + 16, i), zf);
            const auto all = t.names();
            record(series, std::fabs(transmission_series_check(t, all)));
            const auto d = decompose(t, all);
            record(closure, std::fabs(d.negative_term + d.config_term - d.redundancy));
            record(subadd, std::max(0.0, -subadditivity_gap(t, all)));
        }
    }

    check_outcome dual{"dual-path transmission", 0, 0.0, 1e-9, true};
    for (std::size_t i = 0; i < cfg.dual_path_tables; ++i) {
        const std::size_t n = 2 + i % 4;
        const auto t = random_table(n, cfg.max_categories, seed_for(n + 32, i), i % 3 == 0 ? 0.3 : 0.0);
        for (const auto& s : subsets_of(t, 2)) {
            record(dual, std::fabs(transmission(t, s).value - oracle_transmission(t, s)));
        }
    }

    check_outcome fixtures{"fixture expectations", 0, 0.0, 0.0, true};
    for (const auto& f : canonical_fixtures()) {
        for (const auto& e : f.expected) {
            const double err = std::fabs(evaluate(f, e.measure) - e.value);
            ++fixtures.cases;
            fixtures.worst = std::max(fixtures.worst, err - e.tolerance);
            if (!(err <= e.tolerance)) fixtures.passed = false;
        }
    }
    fixtures.worst = std::max(fixtures.worst, 0.0);

    out = {sign, pair_sign, q_rel, series, closure, subadd, dual, fixtures};
    return out;
}

}  // namespace mured::oracle
