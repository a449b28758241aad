#pragma once

// Joint distributions over named categorical variables and the single-distribution
// entropy quantities: H, H_max, Shannon redundancy, marginals, conditional entropy.
//
// Tables hold raw nonnegative weights (counts or probabilities) and are normalized
// on read. Cells are dense, row-major: the first variable is the slowest axis.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mured/error.hpp"
#include "mured/summation.hpp"

namespace mured {

enum class log_base { bits, nats, hartleys };

enum class support_mode {
    alphabet,  ///< N = product of declared alphabet sizes
    observed,  ///< N = number of cells with positive weight
};

/// Natural-log value of one unit of `base`.
constexpr double nats_per_unit(log_base base) noexcept {
    switch (base) {
        case log_base::bits: return std::numbers::ln2;
        case log_base::hartleys: return std::numbers::ln10;
        case log_base::nats: break;
    }
    return 1.0;
}

constexpr std::string_view to_string(log_base base) noexcept {
    switch (base) {
        case log_base::bits: return "bits";
        case log_base::nats: return "nats";
        case log_base::hartleys: return "hartleys";
    }
    return "bits";
}

inline log_base parse_log_base(std::string_view text) {
    if (text == "bits") return log_base::bits;
    if (text == "nats") return log_base::nats;
    if (text == "hartleys") return log_base::hartleys;
    throw invalid_argument("unknown log base '" + std::string(text) + "'");
}

constexpr std::string_view to_string(support_mode mode) noexcept {
    return mode == support_mode::alphabet ? "alphabet" : "observed";
}

inline support_mode parse_support_mode(std::string_view text) {
    if (text == "alphabet") return support_mode::alphabet;
    if (text == "observed") return support_mode::observed;
    throw invalid_argument("unknown support mode '" + std::string(text) + "'");
}

/// An entropy (or signed information quantity) tagged with its logarithm base.
struct entropy_value {
    double value = 0.0;
    log_base base = log_base::bits;

    double in(log_base target) const noexcept {
        if (target == base) return value;
        return value * nats_per_unit(base) / nats_per_unit(target);
    }
};

/// A named categorical variable with a fixed, ordered alphabet.
class variable_spec {
public:
    variable_spec(std::string name, std::vector<std::string> alphabet)
        : name_(std::move(name)), alphabet_(std::move(alphabet)) {
        if (name_.empty()) throw invalid_table("variable name must not be empty");
        if (alphabet_.empty()) throw invalid_table("variable '" + name_ + "' has an empty alphabet");
        std::unordered_set<std::string_view> seen;
        for (const auto& label : alphabet_) {
            if (!seen.insert(label).second) {
                throw invalid_table("variable '" + name_ + "' repeats category '" + label + "'");
            }
        }
    }

    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
    std::size_t size() const noexcept { return alphabet_.size(); }

    std::optional<std::size_t> index_of(std::string_view label) const noexcept {
        for (std::size_t i = 0; i < alphabet_.size(); ++i) {
            if (alphabet_[i] == label) return i;
        }
        return std::nullopt;
    }

    friend bool operator==(const variable_spec&, const variable_spec&) = default;

private:
    std::string name_;
    std::vector<std::string> alphabet_;
};

/// Dense n-way contingency table. Immutable once constructed.
class joint_table {
public:
    joint_table(std::vector<variable_spec> variables, std::vector<double> cells)
        : variables_(std::move(variables)), cells_(std::move(cells)) {
        if (variables_.empty()) throw invalid_table("table needs at least one variable");
        std::unordered_set<std::string_view> names;
        std::size_t expected = 1;
        for (const auto& v : variables_) {
            if (!names.insert(v.name()).second) {
                throw invalid_table("duplicate variable name '" + v.name() + "'");
            }
            expected *= v.size();
        }
        if (cells_.size() != expected) {
            throw invalid_table("table has " + std::to_string(cells_.size()) + " cells, shape needs " +
                                std::to_string(expected));
        }
        compensated_sum total;
        for (double c : cells_) {
            if (!std::isfinite(c) || c < 0.0) throw invalid_table("cells must be finite and nonnegative");
            total.add(c);
        }
        total_ = total.value();
        if (!(total_ > 0.0)) throw invalid_table("table total must be positive");

        strides_.assign(variables_.size(), 1);
        for (std::size_t d = variables_.size() - 1; d > 0; --d) {
            strides_[d - 1] = strides_[d] * variables_[d].size();
        }
    }

    const std::vector<variable_spec>& variables() const noexcept { return variables_; }
    std::size_t dimension() const noexcept { return variables_.size(); }
    std::span<const double> cells() const noexcept { return cells_; }
    std::size_t cell_count() const noexcept { return cells_.size(); }
    double total() const noexcept { return total_; }
    double probability(std::size_t offset) const { return cells_.at(offset) / total_; }

    /// Row-major stride of each axis.
    std::span<const std::size_t> strides() const noexcept { return strides_; }

    std::optional<std::size_t> find(std::string_view name) const noexcept {
        for (std::size_t i = 0; i < variables_.size(); ++i) {
            if (variables_[i].name() == name) return i;
        }
        return std::nullopt;
    }

    std::size_t index_of(const std::string& name) const {
        if (auto i = find(name)) return *i;
        throw unknown_variable(name);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(variables_.size());
        for (const auto& v : variables_) out.push_back(v.name());
        return out;
    }

    double at(std::span<const std::size_t> index) const {
        if (index.size() != variables_.size()) throw invalid_argument("index rank mismatch");
        std::size_t offset = 0;
        for (std::size_t d = 0; d < index.size(); ++d) {
            if (index[d] >= variables_[d].size()) throw invalid_argument("index out of range");
            offset += index[d] * strides_[d];
        }
        return cells_[offset];
    }

    friend bool operator==(const joint_table& a, const joint_table& b) {
        return a.variables_ == b.variables_ && a.cells_ == b.cells_;
    }

private:
    std::vector<variable_spec> variables_;
    std::vector<double> cells_;
    std::vector<std::size_t> strides_;
    double total_ = 0.0;
};

namespace detail {

/// Logarithm taken directly in `base`, so dyadic probabilities give exact bits.
inline double log_in(log_base base, double x) noexcept {
    switch (base) {
        case log_base::bits: return std::log2(x);
        case log_base::hartleys: return std::log10(x);
        case log_base::nats: break;
    }
    return std::log(x);
}

/// -sum p log p over positive weights, with 0 log 0 = 0.
inline double entropy_of(std::span<const double> weights, double total, log_base base) noexcept {
    compensated_sum h;
    for (double w : weights) {
        if (w > 0.0) {
            const double p = w / total;
            h.add(-p * log_in(base, p));
        }
    }
    return h.value();
}

/// Sums `table` over every axis not listed in `axes`. The result is laid out
/// row-major in the order `axes` are given.
inline std::vector<double> marginal_weights(const joint_table& table, std::span<const std::size_t> axes) {
    const std::size_t rank = table.dimension();
    const auto& vars = table.variables();

    std::vector<std::size_t> contribution(rank, 0);
    std::size_t out_size = 1;
    for (std::size_t k = axes.size(); k-- > 0;) {
        contribution[axes[k]] = out_size;
        out_size *= vars[axes[k]].size();
    }

    std::vector<compensated_sum> sums(out_size);
    std::vector<std::size_t> index(rank, 0);
    std::size_t out_offset = 0;
    const auto cells = table.cells();
    for (std::size_t offset = 0; offset < cells.size(); ++offset) {
        sums[out_offset].add(cells[offset]);
        // advance the mixed-radix counter, last axis fastest
        for (std::size_t d = rank; d-- > 0;) {
            if (++index[d] < vars[d].size()) {
                out_offset += contribution[d];
                break;
            }
            out_offset -= (vars[d].size() - 1) * contribution[d];
            index[d] = 0;
        }
    }

    std::vector<double> out(out_size);
    for (std::size_t i = 0; i < out_size; ++i) out[i] = sums[i].value();
    return out;
}

inline std::vector<std::size_t> resolve_axes(const joint_table& table, const std::vector<std::string>& names) {
    std::vector<std::size_t> axes;
    axes.reserve(names.size());
    for (const auto& n : names) {
        const std::size_t axis = table.index_of(n);
        for (std::size_t seen : axes) {
            if (seen == axis) throw invalid_argument("variable '" + n + "' listed twice");
        }
        axes.push_back(axis);
    }
    return axes;
}

inline double marginal_entropy(const joint_table& table, std::span<const std::size_t> axes, log_base base) {
    if (axes.empty()) return 0.0;
    if (axes.size() == table.dimension()) {
        bool identity = true;
        for (std::size_t k = 0; k < axes.size(); ++k) identity = identity && axes[k] == k;
        if (identity) return entropy_of(table.cells(), table.total(), base);
    }
    const auto weights = marginal_weights(table, axes);
    return entropy_of(weights, table.total(), base);
}

}  // namespace detail

inline entropy_value entropy(const joint_table& table, log_base base = log_base::bits) {
    return {detail::entropy_of(table.cells(), table.total(), base), base};
}

inline std::size_t support_size(const joint_table& table, support_mode mode) noexcept {
    if (mode == support_mode::alphabet) return table.cell_count();
    std::size_t n = 0;
    for (double c : table.cells()) n += c > 0.0 ? 1 : 0;
    return n;
}

/// log N, where N depends on `mode`.
inline entropy_value max_entropy(const joint_table& table, support_mode mode = support_mode::alphabet,
                                 log_base base = log_base::bits) {
    const std::size_t n = support_size(table, mode);
    if (n == 0) throw invalid_table("no nonempty cells");
    return {detail::log_in(base, static_cast<double>(n)), base};
}

/// (H_max - H) / H_max: the unused fraction of channel capacity. Base-independent.
inline double shannon_redundancy(const joint_table& table, support_mode mode = support_mode::alphabet) {
    const double h_max = max_entropy(table, mode).value;
    if (!(h_max > 0.0)) throw undefined_redundancy("redundancy is undefined for a single-outcome channel");
    const double h = entropy(table).value;
    double r = (h_max - h) / h_max;
    // H <= H_max up to rounding; keep the ratio in its closed range
    if (r < 0.0 && r > -1e-12) r = 0.0;
    return r;
}

/// Table over `subset` only (in the order given), summing out the other axes.
inline joint_table marginalize(const joint_table& table, const std::vector<std::string>& subset) {
    if (subset.empty()) throw invalid_argument("marginal over an empty subset");
    const auto axes = detail::resolve_axes(table, subset);
    std::vector<variable_spec> vars;
    vars.reserve(axes.size());
    for (std::size_t a : axes) vars.push_back(table.variables()[a]);
    return joint_table(std::move(vars), detail::marginal_weights(table, axes));
}

/// H(targets | given) = H(targets, given) - H(given).
inline entropy_value conditional_entropy(const joint_table& table, const std::vector<std::string>& targets,
                                         const std::vector<std::string>& given, log_base base = log_base::bits) {
    if (targets.empty()) throw invalid_argument("conditional entropy needs at least one target");
    std::vector<std::string> joint = targets;
    joint.insert(joint.end(), given.begin(), given.end());
    for (const auto& g : given) {
        for (const auto& t : targets) {
            if (g == t) throw invalid_argument("variable '" + g + "' is both target and condition");
        }
    }
    const auto joint_axes = detail::resolve_axes(table, joint);
    const auto given_axes = std::span<const std::size_t>(joint_axes).subspan(targets.size());
    return {detail::marginal_entropy(table, joint_axes, base) - detail::marginal_entropy(table, given_axes, base), base};
}

/// Boltzmann constant, J/K (exact SI value).
inline constexpr double boltzmann_constant = 1.380649e-23;

/// Gibbs coupling S = k_B * H, with H taken in nats. Result in J/K.
inline double to_thermodynamic(entropy_value h) noexcept { return boltzmann_constant * h.in(log_base::nats); }

inline entropy_value rebase(entropy_value h, log_base target) noexcept { return {h.in(target), target}; }

}  // namespace mured
