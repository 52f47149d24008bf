#pragma once

namespace sharpmu {

/// Order nu >= 0 of a Bessel function of the first or second kind.
class BesselOrder {
public:
    explicit BesselOrder(double nu);
    double value() const noexcept { return nu_; }

private:
    double nu_;
};

/// m-th positive root of J_nu.
struct BesselZero {
    BesselOrder nu;
    int m;
    double value;
};

/// J_nu(x) for x >= 0.
double bessel_j(BesselOrder nu, double x);

/// dJ_nu/dx, via J_nu' = (nu/x) J_nu - J_{nu+1}; J_0'(0) = 0 and J_nu'(0) handled explicitly.
double bessel_j_prime(BesselOrder nu, double x);

/// Y_nu(x) for x > 0.
double bessel_y(BesselOrder nu, double x);

double bessel_y_prime(BesselOrder nu, double x);

/// The m-th positive zero j_{nu,m}, absolute accuracy better than 1e-10.
///
/// Zeros are bracketed by scanning forward from max(nu, small) with a step of pi/4
/// (consecutive zeros of J_nu are more than pi/2 apart for every nu >= 0) and then
/// polished by safeguarded Newton.
BesselZero bessel_zero(BesselOrder nu, int m);

/// Convenience: value of j_{nu,m}.
double bessel_zero_value(double nu, int m);

}  // namespace sharpmu
