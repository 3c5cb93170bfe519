#pragma once

namespace sensi {

/// Kahan compensated accumulator. Keeps the rounding error of each addition
/// and feeds it back into the next, so long sums of small terms stay accurate
/// regardless of accumulation order.
class KahanSum {
public:
    void add(double value) {
        const double y = value - compensation_;
        const double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }

    KahanSum& operator+=(double value) {
        add(value);
        return *this;
    }

    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

}  // namespace sensi
