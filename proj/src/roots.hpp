#pragma once

#include <cmath>

#include "sharpmu/errors.hpp"

namespace sharpmu::detail {

/// Bisection on a sign-changing bracket [lo, hi] down to width `tol`.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw NumericalError("bisect: interval does not bracket a sign change");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace sharpmu::detail
