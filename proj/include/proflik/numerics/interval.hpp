#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace proflik {

// Open interval (lo, hi); either side may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Interval positive() { return {0.0, std::numeric_limits<double>::infinity()}; }
    static Interval whole_line() { return {}; }

    bool contains(double x) const { return x > lo && x < hi; }

    void validate() const {
        if (std::isnan(lo) || std::isnan(hi) || !(lo < hi))
            throw std::invalid_argument("Interval: requires lo < hi");
    }
};

} // namespace proflik
