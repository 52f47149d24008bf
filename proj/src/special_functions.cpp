#include "sharpmu/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

#include "sharpmu/errors.hpp"

namespace sharpmu {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be finite");
    }
}

template <class F>
double guarded(F&& f) {
    try {
        return f();
    } catch (const std::domain_error& e) {
        throw DomainError(e.what());
    } catch (const std::overflow_error& e) {
        throw NumericalError(e.what());
    } catch (const boost::math::evaluation_error& e) {
        throw NumericalError(e.what());
    }
}

}  // namespace

BesselOrder::BesselOrder(double nu) : nu_(nu) {
    require_finite(nu, "Bessel order");
    if (nu < 0.0) {
        throw DomainError("Bessel order must be nonnegative, got " + std::to_string(nu));
    }
}

double bessel_j(BesselOrder nu, double x) {
    require_finite(x, "Bessel argument");
    if (x < 0.0) {
        throw DomainError("bessel_j requires x >= 0");
    }
    if (x == 0.0) {
        return nu.value() == 0.0 ? 1.0 : 0.0;
    }
    return guarded([&] { return boost::math::cyl_bessel_j(nu.value(), x); });
}

double bessel_j_prime(BesselOrder nu, double x) {
    const double v = nu.value();
    require_finite(x, "Bessel argument");
    if (x < 0.0) {
        throw DomainError("bessel_j_prime requires x >= 0");
    }
    if (x == 0.0) {
        if (v == 0.0 || v > 1.0) {
            return 0.0;
        }
        if (v == 1.0) {
            return 0.5;
        }
        return std::numeric_limits<double>::infinity();
    }
    if (v >= 1.0) {
        return 0.5 * (bessel_j(BesselOrder(v - 1.0), x) - bessel_j(BesselOrder(v + 1.0), x));
    }
    return v / x * bessel_j(nu, x) - bessel_j(BesselOrder(v + 1.0), x);
}

double bessel_y(BesselOrder nu, double x) {
    require_finite(x, "Bessel argument");
    if (x <= 0.0) {
        throw DomainError("bessel_y requires x > 0 (singular at the origin)");
    }
    return guarded([&] { return boost::math::cyl_neumann(nu.value(), x); });
}

double bessel_y_prime(BesselOrder nu, double x) {
    const double v = nu.value();
    if (v >= 1.0) {
        return 0.5 * (bessel_y(BesselOrder(v - 1.0), x) - bessel_y(BesselOrder(v + 1.0), x));
    }
    return v / x * bessel_y(nu, x) - bessel_y(BesselOrder(v + 1.0), x);
}

BesselZero bessel_zero(BesselOrder nu, int m) {
    if (m < 1) {
        throw DomainError("Bessel zero index must be >= 1");
    }
    constexpr double step = std::numbers::pi / 4.0;
    const auto f = [&](double x) { return bessel_j(nu, x); };

    // J_nu > 0 on (0, j_{nu,1}) and j_{nu,1} > nu.
    double lo = std::max(nu.value(), 1e-3);
    double flo = f(lo);
    int found = 0;
    double hi = lo;
    double fhi = flo;
    for (int guard = 0; guard < 100000; ++guard) {
        hi = lo + step;
        fhi = f(hi);
        if (fhi == 0.0 || std::signbit(fhi) != std::signbit(flo)) {
            if (++found == m) {
                break;
            }
        }
        lo = hi;
        flo = fhi;
    }
    if (found != m) {
        throw NumericalError("bessel_zero: scan did not bracket the requested zero");
    }
    if (fhi == 0.0) {
        return {nu, m, hi};
    }

    // Newton with bisection fallback on [lo, hi].
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (fx == 0.0) {
            break;
        }
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double d = bessel_j_prime(nu, x);
        double next = x - fx / d;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        const double delta = std::abs(next - x);
        x = next;
        if (delta < 1e-15 * std::max(1.0, x) || hi - lo < 4e-16 * x) {
            break;
        }
    }
    return {nu, m, x};
}

double bessel_zero_value(double nu, int m) { return bessel_zero(BesselOrder(nu), m).value; }

}  // namespace sharpmu
