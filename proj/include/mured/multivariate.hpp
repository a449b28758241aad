#pragma once

// Transmissions (interaction information) over variable subsets, mutual redundancy,
// and the split of R_n into a subadditivity term and a configurational term.
//
// Sign conventions:
//   T(S)  = sum over nonempty X in S of (-1)^(|X|+1) H(X)
//   R_n   = (-1)^(1+n) T(x1..xn)
//   Q(S)  = sum over X in S of (-1)^(1+|S|-|X|) H(X)      (= -R_n)
//   R_n   = [H(x1..xn) - sum H(xi)] + [sum T_ij - sum T_ijk + ... +/- sum T_(n-1)]

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mured/core_entropy.hpp"
#include "mured/error.hpp"
#include "mured/summation.hpp"

namespace mured {

/// Largest subset accepted; inclusion-exclusion needs 2^n marginal entropies.
inline constexpr std::size_t max_subset_size = 12;

/// |R| at or below this (in the computation base) is labelled balanced.
inline constexpr double balanced_tolerance = 1e-9;

/// Agreement required between the two evaluations of the configurational term.
inline constexpr double identity_tolerance = 1e-9;

struct transmission_value {
    std::vector<std::string> subset;
    double value = 0.0;
    log_base base = log_base::bits;
};

enum class regime { self_organization, organization, balanced };

constexpr std::string_view to_string(regime r) noexcept {
    switch (r) {
        case regime::self_organization: return "self-organization";
        case regime::organization: return "organization";
        case regime::balanced: break;
    }
    return "balanced";
}

/// Negative R: self-organization prevails. Positive R: organization prevails.
constexpr regime classify_regime(double redundancy, double tolerance = balanced_tolerance) noexcept {
    if (std::fabs(redundancy) <= tolerance) return regime::balanced;
    return redundancy < 0.0 ? regime::self_organization : regime::organization;
}

struct decomposition {
    std::size_t n = 0;
    std::vector<std::string> subset;
    /// T for every sub-subset of size 2..n, ordered by size then by position in `subset`.
    std::vector<transmission_value> subset_transmissions;
    double negative_term = 0.0;
    /// redundancy - negative_term
    double config_term = 0.0;
    /// The same term evaluated as the alternating sum of sub-subset transmissions.
    double config_term_alternating = 0.0;
    double redundancy = 0.0;
    log_base base = log_base::bits;
    mured::regime regime = regime::balanced;
    /// Set for n >= 4 when the configurational term came out negative.
    bool config_term_negative = false;

    const transmission_value* find(const std::vector<std::string>& names) const noexcept {
        for (const auto& t : subset_transmissions) {
            if (t.subset == names) return &t;
        }
        return nullptr;
    }
};

namespace detail {

/// Entropies of every sub-subset of a variable selection, computed on demand.
/// Memoization is local to one instance; nothing is shared between calls.
class subset_entropies {
public:
    subset_entropies(const joint_table& table, const std::vector<std::string>& subset, log_base base)
        : reduced_(reduce(table, subset)),
          base_(base),
          memo_(std::size_t{1} << subset.size(), std::numeric_limits<double>::quiet_NaN()) {
        memo_[0] = 0.0;
    }

    std::size_t size() const noexcept { return reduced_.dimension(); }
    std::uint32_t full_mask() const noexcept { return (std::uint32_t{1} << size()) - 1; }

    /// H(X) for the variables whose bits are set in `mask`.
    double h(std::uint32_t mask) {
        double& slot = memo_[mask];
        if (std::isnan(slot)) {
            std::vector<std::size_t> axes;
            for (std::size_t i = 0; i < size(); ++i) {
                if (mask & (std::uint32_t{1} << i)) axes.push_back(i);
            }
            slot = marginal_entropy(reduced_, axes, base_);
        }
        return slot;
    }

    /// Inclusion-exclusion over the nonempty submasks of `mask`.
    double transmission(std::uint32_t mask) {
        compensated_sum t;
        for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
            const double e = h(sub);
            t.add(std::popcount(sub) % 2 == 1 ? e : -e);
        }
        return t.value();
    }

    double singles() {
        compensated_sum s;
        for (std::size_t i = 0; i < size(); ++i) s.add(h(std::uint32_t{1} << i));
        return s.value();
    }

private:
    static joint_table reduce(const joint_table& table, const std::vector<std::string>& subset) {
        if (subset.empty()) throw invalid_argument("empty variable subset");
        if (subset.size() > max_subset_size) throw subset_too_large(subset.size(), max_subset_size);
        const auto axes = resolve_axes(table, subset);
        bool identity = axes.size() == table.dimension();
        for (std::size_t k = 0; identity && k < axes.size(); ++k) identity = axes[k] == k;
        if (identity) return table;
        std::vector<variable_spec> vars;
        for (std::size_t a : axes) vars.push_back(table.variables()[a]);
        return joint_table(std::move(vars), marginal_weights(table, axes));
    }

    joint_table reduced_;
    log_base base_;
    std::vector<double> memo_;
};

/// Nonempty submasks of `full` with popcount in [lo, hi], ordered by size and then
/// lexicographically by member positions.
inline std::vector<std::uint32_t> ordered_masks(std::uint32_t full, int lo, int hi) {
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 1; m <= full; ++m) {
        const int k = std::popcount(m);
        if (k >= lo && k <= hi) masks.push_back(m);
    }
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        const int ka = std::popcount(a), kb = std::popcount(b);
        if (ka != kb) return ka < kb;
        // lowest differing bit decides; the mask holding it comes first
        const std::uint32_t diff = a ^ b;
        const std::uint32_t low = diff & (~diff + 1);
        return (a & low) != 0;
    });
    return masks;
}

inline std::vector<std::string> names_of(const std::vector<std::string>& subset, std::uint32_t mask) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (mask & (std::uint32_t{1} << i)) out.push_back(subset[i]);
    }
    return out;
}

inline double sign_for(std::size_t n) noexcept { return n % 2 == 1 ? 1.0 : -1.0; }  // (-1)^(1+n)

}  // namespace detail

/// Transmission (interaction information) among `subset`. For one variable this is H(x).
inline transmission_value transmission(const joint_table& table, const std::vector<std::string>& subset,
                                       log_base base = log_base::bits) {
    detail::subset_entropies h(table, subset, base);
    return {subset, h.transmission(h.full_mask()), base};
}

/// R_n = (-1)^(1+n) T_n. Negative for every pair.
inline double mutual_redundancy(const joint_table& table, const std::vector<std::string>& subset,
                                log_base base = log_base::bits) {
    if (subset.size() < 2) throw invalid_argument("mutual redundancy needs at least two variables");
    return detail::sign_for(subset.size()) * transmission(table, subset, base).value;
}

/// sum H(xi) - H(x1..xn); never negative beyond rounding.
inline double subadditivity_gap(const joint_table& table, const std::vector<std::string>& subset,
                                log_base base = log_base::bits) {
    if (subset.size() < 2) throw invalid_argument("subadditivity gap needs at least two variables");
    detail::subset_entropies h(table, subset, base);
    return h.singles() - h.h(h.full_mask());
}

/// Krippendorff's Q, evaluated literally with H(empty) = 0.
inline double krippendorff_q(const joint_table& table, const std::vector<std::string>& subset,
                             log_base base = log_base::bits) {
    if (subset.size() < 2) throw invalid_argument("Q needs at least two variables");
    detail::subset_entropies h(table, subset, base);
    const auto full = h.full_mask();
    const int n = static_cast<int>(h.size());
    compensated_sum q;
    for (std::uint32_t sub = full; sub != 0; sub = (sub - 1) & full) {
        const int exponent = 1 + n - std::popcount(sub);
        q.add(exponent % 2 == 0 ? h.h(sub) : -h.h(sub));
    }
    return q.value();
}

/// Alternating sum of sub-subset transmissions of sizes 2..n minus the subadditivity
/// gap. Both sides of the identity are evaluated independently, so the result is 0
/// up to rounding.
inline double transmission_series_check(const joint_table& table, const std::vector<std::string>& subset,
                                        log_base base = log_base::bits) {
    if (subset.size() < 2) throw invalid_argument("series check needs at least two variables");
    detail::subset_entropies h(table, subset, base);
    const auto full = h.full_mask();
    compensated_sum rhs;
    for (std::uint32_t m : detail::ordered_masks(full, 2, static_cast<int>(h.size()))) {
        const double t = h.transmission(m);
        rhs.add(std::popcount(m) % 2 == 0 ? t : -t);
    }
    const double gap = h.singles() - h.h(full);
    return rhs.value() - gap;
}

inline decomposition decompose(const joint_table& table, const std::vector<std::string>& subset,
                               log_base base = log_base::bits) {
    if (subset.size() < 2) throw invalid_argument("decomposition needs at least two variables");
    detail::subset_entropies h(table, subset, base);
    const auto full = h.full_mask();
    const std::size_t n = h.size();

    decomposition d;
    d.n = n;
    d.subset = subset;
    d.base = base;

    compensated_sum alternating;
    double full_t = 0.0;
    for (std::uint32_t m : detail::ordered_masks(full, 2, static_cast<int>(n))) {
        const double t = h.transmission(m);
        const auto k = static_cast<std::size_t>(std::popcount(m));
        d.subset_transmissions.push_back({detail::names_of(subset, m), t, base});
        if (k == n) {
            full_t = t;
        } else {
            alternating.add(k % 2 == 0 ? t : -t);
        }
    }

    d.negative_term = h.h(full) - h.singles();
    d.redundancy = detail::sign_for(n) * full_t;
    d.config_term = d.redundancy - d.negative_term;
    d.config_term_alternating = alternating.value();
    if (std::fabs(d.config_term - d.config_term_alternating) > identity_tolerance) {
        throw identity_violation("configurational term disagrees between its two evaluations");
    }
    d.regime = classify_regime(d.redundancy);
    d.config_term_negative = n >= 4 && d.config_term < -balanced_tolerance;
    return d;
}

}  // namespace mured
