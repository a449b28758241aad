#pragma once

#include <cmath>

namespace mured {

/// Neumaier's improved Kahan summation. Order of `add` calls still matters for the
/// last bit, so callers iterate in a fixed order to stay reproducible.
class compensated_sum {
public:
    constexpr compensated_sum() = default;

    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            compensation_ += (sum_ - t) + x;
        } else {
            compensation_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    compensated_sum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

template <typename Range>
double accurate_sum(const Range& values) noexcept {
    compensated_sum s;
    for (double v : values) s.add(v);
    return s.value();
}

}  // namespace mured
