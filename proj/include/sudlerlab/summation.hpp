#pragma once

#include <cmath>

namespace sudlerlab {

// Neumaier compensated accumulator: the running compensation keeps the result
// within a couple of ulps of the exact sum regardless of term count.
struct compensated_sum {
    double s = 0.0;
    double c = 0.0;

    void add(double v) {
        double t = s + v;
        if (std::fabs(s) >= std::fabs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }

    double value() const { return s + c; }
};

} // namespace sudlerlab
