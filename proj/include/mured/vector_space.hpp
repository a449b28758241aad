#pragma once

// Relations versus correlations: incidence matrices, Pearson and cosine similarity,
// similarity matrices, and dominant eigenpairs by power iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mured/csv.hpp"
#include "mured/error.hpp"
#include "mured/summation.hpp"

namespace mured {

/// Agents (rows) by attributes or relations (columns), nonnegative entries.
class incidence_matrix {
public:
    incidence_matrix(std::vector<std::string> row_labels, std::vector<std::string> column_labels,
                     std::vector<double> entries)
        : rows_(std::move(row_labels)), columns_(std::move(column_labels)), entries_(std::move(entries)) {
        require_unique(rows_, "row");
        require_unique(columns_, "column");
        if (entries_.size() != rows_.size() * columns_.size()) {
            throw invalid_argument("incidence matrix entry count does not match its labels");
        }
        for (double e : entries_) {
            if (!std::isfinite(e) || e < 0.0) throw invalid_argument("incidence entries must be finite and >= 0");
        }
    }

    const std::vector<std::string>& row_labels() const noexcept { return rows_; }
    const std::vector<std::string>& column_labels() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t columns() const noexcept { return columns_.size(); }
    double at(std::size_t r, std::size_t c) const { return entries_.at(r * columns_.size() + c); }

    std::span<const double> row(std::size_t r) const {
        if (r >= rows_.size()) throw invalid_argument("row index out of range");
        return std::span<const double>(entries_).subspan(r * columns_.size(), columns_.size());
    }

    std::vector<double> column(std::size_t c) const {
        if (c >= columns_.size()) throw invalid_argument("column index out of range");
        std::vector<double> out(rows_.size());
        for (std::size_t r = 0; r < rows_.size(); ++r) out[r] = entries_[r * columns_.size() + c];
        return out;
    }

    std::size_t row_index(std::string_view label) const { return index_in(rows_, label, "row"); }
    std::size_t column_index(std::string_view label) const { return index_in(columns_, label, "column"); }

private:
    static void require_unique(const std::vector<std::string>& labels, const char* what) {
        std::unordered_set<std::string_view> seen;
        for (const auto& l : labels) {
            if (!seen.insert(l).second) throw invalid_argument(std::string("duplicate ") + what + " label '" + l + "'");
        }
    }

    static std::size_t index_in(const std::vector<std::string>& labels, std::string_view label, const char* what) {
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) throw invalid_argument(std::string("unknown ") + what + " label '" + std::string(label) + "'");
        return static_cast<std::size_t>(it - labels.begin());
    }

    std::vector<std::string> rows_;
    std::vector<std::string> columns_;
    std::vector<double> entries_;
};

/// Header row = column labels (first header cell ignored); first column = row labels.
inline incidence_matrix read_incidence_csv(std::istream& in, char delimiter = ',') {
    csv::reader reader(in, delimiter);
    auto header = reader.next();
    if (!header || header->fields.size() < 2) throw parse_error("incidence CSV needs a header with at least one column", 1);
    std::vector<std::string> columns(header->fields.begin() + 1, header->fields.end());
    std::vector<std::string> rows;
    std::vector<double> entries;
    while (auto rec = reader.next()) {
        if (rec->fields.size() != header->fields.size()) {
            throw parse_error("expected " + std::to_string(header->fields.size()) + " fields, found " +
                                  std::to_string(rec->fields.size()),
                              rec->line);
        }
        rows.push_back(rec->fields.front());
        for (std::size_t c = 1; c < rec->fields.size(); ++c) {
            const std::string& text = rec->fields[c];
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != text.size()) throw parse_error("not a number: '" + text + "'", rec->line);
            entries.push_back(value);
        }
    }
    return incidence_matrix(std::move(rows), std::move(columns), std::move(entries));
}

/// Pearson product-moment correlation.
inline double pearson(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw invalid_argument("pearson: vectors differ in length");
    if (u.size() < 2) throw invalid_argument("pearson: need at least two observations");
    const double n = static_cast<double>(u.size());
    const double mu = accurate_sum(u) / n;
    const double mv = accurate_sum(v) / n;
    compensated_sum sxy, sxx, syy;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double du = u[i] - mu;
        const double dv = v[i] - mv;
        sxy.add(du * dv);
        sxx.add(du * du);
        syy.add(dv * dv);
    }
    if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) throw undefined_similarity("pearson: zero variance");
    const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
    return std::clamp(r, -1.0, 1.0);
}

inline double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw invalid_argument("cosine: vectors differ in length");
    compensated_sum dot, nu, nv;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot.add(u[i] * v[i]);
        nu.add(u[i] * u[i]);
        nv.add(v[i] * v[i]);
    }
    if (!(nu.value() > 0.0) || !(nv.value() > 0.0)) throw undefined_similarity("cosine: zero vector");
    return std::clamp(dot.value() / (std::sqrt(nu.value()) * std::sqrt(nv.value())), -1.0, 1.0);
}

enum class similarity_kind { pearson, cosine };
enum class matrix_axis { rows, columns };

constexpr std::string_view to_string(similarity_kind k) noexcept {
    return k == similarity_kind::pearson ? "pearson" : "cosine";
}

inline similarity_kind parse_similarity_kind(std::string_view text) {
    if (text == "pearson") return similarity_kind::pearson;
    if (text == "cosine") return similarity_kind::cosine;
    throw invalid_argument("unknown similarity kind '" + std::string(text) + "'");
}

/// Plain dense square matrix, row-major.
class square_matrix {
public:
    square_matrix() = default;
    explicit square_matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
    square_matrix(std::size_t n, std::vector<double> entries) : n_(n), a_(std::move(entries)) {
        if (a_.size() != n_ * n_) throw invalid_argument("square matrix needs n*n entries");
    }
    square_matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
        for (const auto& r : rows) {
            if (r.size() != n_) throw invalid_argument("square matrix rows must have n entries");
            a_.insert(a_.end(), r.begin(), r.end());
        }
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }

    std::vector<double> multiply(std::span<const double> v) const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            compensated_sum s;
            for (std::size_t j = 0; j < n_; ++j) s.add(a_[i * n_ + j] * v[j]);
            out[i] = s.value();
        }
        return out;
    }

    bool is_symmetric(double tolerance = 1e-12) const noexcept {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                if (std::fabs((*this)(i, j) - (*this)(j, i)) > tolerance) return false;
            }
        }
        return true;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

/// Pairwise similarities; entries that are undefined (zero vector, zero variance)
/// are empty rather than 0.
struct similarity_matrix {
    std::vector<std::string> labels;
    std::vector<std::optional<double>> entries;
    similarity_kind kind = similarity_kind::cosine;

    std::size_t size() const noexcept { return labels.size(); }
    const std::optional<double>& at(std::size_t i, std::size_t j) const { return entries.at(i * labels.size() + j); }

    square_matrix to_dense() const {
        square_matrix m(size());
        for (std::size_t i = 0; i < size(); ++i) {
            for (std::size_t j = 0; j < size(); ++j) {
                const auto& e = at(i, j);
                if (!e) throw undefined_similarity("similarity matrix has undefined entries");
                m(i, j) = *e;
            }
        }
        return m;
    }
};

inline similarity_matrix similarity(const incidence_matrix& m, similarity_kind kind, matrix_axis axis = matrix_axis::rows) {
    std::vector<std::vector<double>> vectors;
    similarity_matrix out;
    out.kind = kind;
    if (axis == matrix_axis::rows) {
        for (std::size_t r = 0; r < m.rows(); ++r) vectors.emplace_back(m.row(r).begin(), m.row(r).end());
        out.labels = m.row_labels();
    } else {
        for (std::size_t c = 0; c < m.columns(); ++c) vectors.push_back(m.column(c));
        out.labels = m.column_labels();
    }
    const std::size_t n = vectors.size();
    if (n < 2) throw invalid_argument("similarity matrix needs at least two vectors along the axis");

    auto measure = [kind](const std::vector<double>& a, const std::vector<double>& b) -> std::optional<double> {
        try {
            return kind == similarity_kind::pearson ? pearson(a, b) : cosine(a, b);
        } catch (const undefined_similarity&) {
            return std::nullopt;
        }
    };

    out.entries.assign(n * n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
        if (measure(vectors[i], vectors[i])) out.entries[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto s = measure(vectors[i], vectors[j]);
            out.entries[i * n + j] = s;
            out.entries[j * n + i] = s;
        }
    }
    return out;
}

struct eigen_options {
    double tolerance = 1e-10;
    std::size_t max_iterations = 10'000;
};

struct eigen_result {
    double eigenvalue = 0.0;
    std::vector<double> eigenvector;  ///< unit length, largest-magnitude entry positive
    std::size_t iterations = 0;
    double residual = 0.0;            ///< max |W v - lambda v| against the input matrix
    bool degenerate = false;          ///< eigenvalue shared with another returned pair
};

namespace detail {

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    compensated_sum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

inline double normalize(std::vector<double>& v) noexcept {
    const double norm = std::sqrt(dot(v, v));
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
    return norm;
}

inline void project_out(std::vector<double>& v, std::span<const std::vector<double>> basis) noexcept {
    for (const auto& b : basis) {
        const double c = dot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
    }
}

inline void fix_sign(std::vector<double>& v) noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::fabs(v[i]) > std::fabs(v[best])) best = i;
    }
    if (!v.empty() && v[best] < 0.0) {
        for (double& x : v) x = -x;
    }
}

inline void require_finite_square(const square_matrix& w) {
    if (w.size() == 0) throw invalid_argument("eigen: empty matrix");
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (!std::isfinite(w(i, j))) throw invalid_argument("eigen: non-finite entry");
        }
    }
}

/// Shift that makes every eigenvalue of W + sI nonnegative (Gershgorin lower bound),
/// so the algebraically largest eigenvalue also dominates in magnitude.
inline double gershgorin_shift(const square_matrix& w) noexcept {
    double lower = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (j != i) off += std::fabs(w(i, j));
        }
        lower = std::min(lower, w(i, i) - off);
    }
    return -lower;
}

/// Deterministic start: all-ones with a small ramp, orthogonalized against `found`.
inline std::vector<double> start_vector(std::size_t n, std::span<const std::vector<double>> found) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i + 1) / static_cast<double>(n);
    project_out(v, found);
    project_out(v, found);
    if (normalize(v) > 1e-8) return v;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> e(n, 0.0);
        e[k] = 1.0;
        project_out(e, found);
        project_out(e, found);
        if (normalize(e) > 1e-8) return e;
    }
    throw invalid_argument("eigen: no direction left outside the found eigenvectors");
}

/// Power iteration on `work` restricted to the complement of `found`; the returned
/// pair is checked against `original`.
inline eigen_result power_iterate(const square_matrix& original, const square_matrix& work,
                                  std::span<const std::vector<double>> found, const eigen_options& opts) {
    const std::size_t n = work.size();
    const double shift = gershgorin_shift(work);
    std::vector<double> v = start_vector(n, found);
    // recent iterates; a repeat without convergence means no unique dominant eigenvalue
    constexpr std::size_t max_period = 8;
    std::vector<std::vector<double>> history;
    double residual = std::numeric_limits<double>::infinity();

    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        std::vector<double> y = work.multiply(v);
        for (std::size_t i = 0; i < n; ++i) y[i] += shift * v[i];
        project_out(y, found);
        if (!(normalize(y) > 0.0)) {
            // v lies in the null space of W + sI: it is an eigenvector for -s
            y = v;
        }
        history.push_back(std::move(v));
        if (history.size() > max_period) history.erase(history.begin());
        v = std::move(y);

        const std::vector<double> wv = original.multiply(v);
        const double lambda = dot(v, wv) / dot(v, v);
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::fabs(wv[i] - lambda * v[i]));
        if (residual <= opts.tolerance) {
            fix_sign(v);
            return {lambda, std::move(v), it, residual, false};
        }
        // period >= 2: the iterate returns to an earlier position after moving away
        for (std::size_t back = 2; back <= history.size(); ++back) {
            const auto& earlier = history[history.size() - back];
            if (max_abs_diff(v, earlier) <= opts.tolerance &&
                max_abs_diff(v, history.back()) > std::sqrt(opts.tolerance)) {
                throw degenerate_spectrum("power iteration cycles: the dominant eigenvalue is not unique");
            }
        }
    }
    throw non_convergence(opts.max_iterations, residual);
}

}  // namespace detail

/// Algebraically largest eigenpair (the Perron pair for symmetric nonnegative input).
inline eigen_result principal_eigen(const square_matrix& w, const eigen_options& opts = {}) {
    detail::require_finite_square(w);
    return detail::power_iterate(w, w, {}, opts);
}

/// The k algebraically largest eigenpairs of a symmetric matrix, by power iteration
/// with Hotelling deflation. Pairs sharing an eigenvalue are flagged degenerate.
inline std::vector<eigen_result> top_eigenvectors(const square_matrix& w, std::size_t k, const eigen_options& opts = {}) {
    detail::require_finite_square(w);
    if (k == 0 || k > w.size()) throw invalid_argument("top_eigenvectors: k must be in [1, dimension]");
    if (!w.is_symmetric(1e-12)) throw invalid_argument("top_eigenvectors: matrix must be symmetric");

    // Error in a deflated vector leaks into every later residual, so vectors that
    // later pairs are orthogonalized against are converged further.
    double norm = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) row += std::fabs(w(i, j));
        norm = std::max(norm, row);
    }
    eigen_options basis_opts = opts;
    basis_opts.tolerance =
        std::min(opts.tolerance, std::max(1e-2 * opts.tolerance, 64.0 * std::numeric_limits<double>::epsilon() * norm));

    std::vector<eigen_result> results;
    std::vector<std::vector<double>> found;
    square_matrix work = w;
    for (std::size_t r = 0; r < k; ++r) {
        eigen_result e = detail::power_iterate(w, work, found, r + 1 < k ? basis_opts : opts);
        for (std::size_t i = 0; i < w.size(); ++i) {
            for (std::size_t j = 0; j < w.size(); ++j) work(i, j) -= e.eigenvalue * e.eigenvector[i] * e.eigenvector[j];
        }
        found.push_back(e.eigenvector);
        results.push_back(std::move(e));
    }

    const double scale = std::max(1.0, std::fabs(results.front().eigenvalue));
    for (std::size_t r = 0; r + 1 < results.size(); ++r) {
        if (std::fabs(results[r].eigenvalue - results[r + 1].eigenvalue) <= 1e-8 * scale) {
            results[r].degenerate = true;
            results[r + 1].degenerate = true;
        }
    }
    return results;
}

}  // namespace mured
