#pragma once

#include <cmath>

namespace qfint {

/// Neumaier (improved Kahan) running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    void add(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const noexcept { return sum_ + comp_; }
    /// Size of the correction term; a cheap roundoff indicator.
    double residual() const noexcept { return std::abs(comp_); }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace qfint
