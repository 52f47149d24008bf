#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "sharpmu/errors.hpp"
#include "sharpmu/special_functions.hpp"

using namespace sharpmu;
using std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("bessel_j: trivial values and the half-integer closed form") {
    CHECK(bessel_j(BesselOrder(0), 0.0) == 1.0);
    CHECK(bessel_j(BesselOrder(2), 0.0) == 0.0);
    CHECK(std::abs(bessel_j(BesselOrder(0.5), pi)) < 1e-15);
    for (double x : {0.1, 1.0, 3.7, 12.0, 40.0, 150.0}) {
        CHECK(bessel_j(BesselOrder(0.5), x) == doctest::Approx(oracle::j_half(x)).epsilon(1e-12));
    }
}

TEST_CASE("bessel_j matches the long-double series") {
    for (double nu : {0.0, 0.25, 0.5, 1.0, 1.5, 2.5, 4.0}) {
        for (double x : {0.01, 0.3, 1.0, 2.5, 5.0, 8.0, 11.0, 15.0}) {
            const double ref = static_cast<double>(oracle::bessel_j_series(nu, x));
            CAPTURE(nu);
            CAPTURE(x);
            // absolute near the zeros, relative elsewhere
            CHECK(std::abs(bessel_j(BesselOrder(nu), x) - ref) <= 1e-12 * std::max(std::abs(ref), 0.1));
        }
    }
}

TEST_CASE("bessel_j at the first zero of J0 found by series bisection") {
    const double j01 = oracle::bessel_zero(0.0, 1);
    CHECK(std::abs(bessel_j(BesselOrder(0), 2.404825557695773)) < 1e-12);
    CHECK(std::abs(bessel_j(BesselOrder(0), j01)) < 1e-12);
}

TEST_CASE("bessel_y: half-integer closed form and singularity") {
    CHECK(std::abs(bessel_y(BesselOrder(0.5), pi / 2)) < 1e-15);
    CHECK(bessel_y(BesselOrder(0.5), pi) == doctest::Approx(std::sqrt(2.0 / (pi * pi))).epsilon(1e-12));
    CHECK(bessel_y(BesselOrder(0.5), pi) == doctest::Approx(0.450158).epsilon(1e-6));  // sqrt(2)/pi
    for (double x : {0.2, 2.0, 9.0, 33.0}) {
        CHECK(bessel_y(BesselOrder(0.5), x) == doctest::Approx(oracle::y_half(x)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(bessel_y(BesselOrder(0), 0.0), DomainError);
    CHECK_THROWS_AS(bessel_y(BesselOrder(1), -1.0), DomainError);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(BesselOrder(-0.5), DomainError);
    CHECK_THROWS_AS(bessel_j(BesselOrder(0), -1.0), DomainError);
    CHECK_THROWS_AS(bessel_j(BesselOrder(0), std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(bessel_j(BesselOrder(0), std::nan("")), DomainError);
    CHECK_THROWS_AS(bessel_zero(BesselOrder(0), 0), DomainError);
}

TEST_CASE("Wronskian J Y' - J' Y = 2/(pi x)") {
    CHECK(bessel_j(BesselOrder(0), 1) * bessel_y_prime(BesselOrder(0), 1) -
              bessel_j_prime(BesselOrder(0), 1) * bessel_y(BesselOrder(0), 1) ==
          doctest::Approx(2 / pi).epsilon(1e-12));
    for (double nu : {0.0, 0.25, 0.5, 1.0, 2.5, 3.0}) {
        for (double x = 0.5; x <= 50.0; x += 0.75) {
            const BesselOrder o(nu);
            const double w = bessel_j(o, x) * bessel_y_prime(o, x) - bessel_j_prime(o, x) * bessel_y(o, x);
            CAPTURE(nu);
            CAPTURE(x);
            CHECK(rel(w, 2 / (pi * x)) < 1e-9);
        }
    }
}

TEST_CASE("three-term recurrence") {
    for (double nu : {1.0, 1.25, 1.5, 2.0, 3.5}) {
        for (double x = 0.5; x <= 50.0; x += 0.5) {
            const double lhs = bessel_j(BesselOrder(nu - 1), x) + bessel_j(BesselOrder(nu + 1), x);
            const double rhs = 2 * nu / x * bessel_j(BesselOrder(nu), x);
            const double scale = std::abs(bessel_j(BesselOrder(nu - 1), x)) + std::abs(bessel_j(BesselOrder(nu + 1), x));
            CHECK(std::abs(lhs - rhs) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("derivative agrees with central differences") {
    for (double nu : {0.0, 0.5, 1.0, 2.5}) {
        for (double x : {0.7, 3.0, 17.0}) {
            const BesselOrder o(nu);
            const double h = 1e-5;
            const double fd = (bessel_j(o, x + h) - bessel_j(o, x - h)) / (2 * h);
            CHECK(bessel_j_prime(o, x) == doctest::Approx(fd).epsilon(1e-8));
            const double fdy = (bessel_y(o, x + h) - bessel_y(o, x - h)) / (2 * h);
            CHECK(bessel_y_prime(o, x) == doctest::Approx(fdy).epsilon(1e-7));
        }
    }
    CHECK(bessel_j_prime(BesselOrder(0), 0.0) == 0.0);
    CHECK(bessel_j_prime(BesselOrder(1), 0.0) == doctest::Approx(0.5));
}

TEST_CASE("bessel_zero: closed forms and series oracle") {
    for (int m = 1; m <= 3; ++m) {
        CHECK(std::abs(bessel_zero_value(0.5, m) - m * pi) < 1e-10);
    }
    CHECK(std::abs(bessel_zero_value(0, 1) - 2.404825557695773) < 1e-10);
    CHECK(std::abs(bessel_zero_value(1, 1) - 3.831705970207512) < 1e-10);
    for (double nu : {0.0, 0.25, 1.0, 1.5, 2.5}) {
        for (int m = 1; m <= 4; ++m) {
            CAPTURE(nu);
            CAPTURE(m);
            CHECK(std::abs(bessel_zero_value(nu, m) - oracle::bessel_zero(nu, m)) < 1e-10);
        }
    }
    const BesselZero z = bessel_zero(BesselOrder(1.5), 2);
    CHECK(z.m == 2);
    CHECK(z.nu.value() == 1.5);
}

TEST_CASE("zeros increase, J changes sign across each, spacing laws") {
    for (double nu : {0.0, 0.25, 0.5, 1.0, 2.5}) {
        double prev_gap = 0;
        for (int n = 1; n <= 20; ++n) {
            const double z = bessel_zero_value(nu, n);
            const double z1 = bessel_zero_value(nu, n + 1);
            const double gap = z1 - z;
            CAPTURE(nu);
            CAPTURE(n);
            CHECK(z1 > z);
            const BesselOrder o(nu);
            CHECK(bessel_j(o, z - 1e-6) * bessel_j(o, z + 1e-6) < 0);
            if (nu >= 0.5) {
                CHECK(gap >= pi - 1e-9);
                if (n > 1) {
                    CHECK(gap <= prev_gap + 1e-9);
                }
            } else {
                CHECK(gap <= pi + 1e-9);
                if (n > 1) {
                    CHECK(gap >= prev_gap - 1e-9);
                }
            }
            prev_gap = gap;
        }
    }
}
