#pragma once

#include <random>
#include <string_view>

#include "sharpmu/profiles.hpp"

namespace sharpmu {

enum class BoundBranch { alpha_lt_2, alpha_eq_2, alpha_gt_2_odd, alpha_gt_2_even };

std::string_view to_string(BoundBranch b) noexcept;

/// Sharp upper bound for D^2 mu_k over domains with 1/alpha-concave profile
/// (diameter normalized to 1), together with the formula branch that produced it.
struct BoundValue {
    double alpha;
    int k;
    double value;
    BoundBranch branch;
};

/// alpha < 2:          (2 j_{nu,1} + (k-1) pi)^2
/// alpha = 2:          ((k+1) pi)^2
/// alpha > 2, k odd:   4 j_{nu,(k+1)/2}^2
/// alpha > 2, k even:  (j_{nu,k/2} + j_{nu,k/2+1})^2          with nu = (alpha-1)/2
BoundValue bound_value(double alpha, int k);

/// Bound for convex bodies in R^d, d >= 2: the profile is 1/(d-1)-concave.
BoundValue kroger_bound(int d, int k);

/// Three-segment profile: rise on [0,a], plateau, fall on [1-b,1]. a + b = 1 means no plateau.
struct CharacteristicProblem {
    double a;
    double b;
    double alpha;

    void validate() const;
};

/// The (a, b) geometry of optimal_profile(alpha, k).
CharacteristicProblem optimal_characteristic_problem(double alpha, int k);

/// Determinant of the 4x4 C^1 matching system for the piecewise eigenfunction
///   x^{-nu} J_nu(wx) | B1 cos(w(x-a)) + B2 sin(w(x-a)) | (1-x)^{-nu} J_nu(w(1-x)),
/// with the column factors a^{-nu}, b^{-nu} and the row factor w removed from the
/// derivative rows. No tangent appears, so the function has no poles; its positive
/// zeros are the eigenfrequencies sqrt(mu) of the profile.
double characteristic_det(const CharacteristicProblem& p, double w);

/// which-th positive zero of characteristic_det, scan plus bisection to 1e-10 absolute.
/// Throws NumericalError when the scan passes `ceiling` first.
double solve_characteristic(const CharacteristicProblem& p, int which, double ceiling = 1e4);

/// Closed-form eigenfunction of the optimal profile for (alpha, k), with the
/// rising-segment coefficient A1 = 1 (so u(0) = (w/2)^nu / Gamma(nu+1)).
class ClosedFormEigenfunction {
public:
    ClosedFormEigenfunction(double alpha, int k);

    double operator()(double x) const;
    double derivative(double x) const;
    double frequency() const noexcept { return w_; }
    double rise_end() const noexcept { return xa_; }
    double fall_start() const noexcept { return xb_; }

private:
    double radial(double r) const;        // r^{-nu} J_nu(w r)
    double radial_prime(double r) const;  // d/dr of the above

    double nu_;
    double w_;
    double xa_;
    double xb_;
    double b1_ = 0.0;
    double b2_ = 0.0;
    double c1_ = 0.0;
};

double closed_form_eigenfunction(double alpha, int k, double x);

/// First positive root of tan(x (1/2 - a)) = 1 + 1/(a x), 0 < a < 1/2.
double solve_wa(double a);

/// x tan(x(1/2-a)) - w_a - s / tanh(a s), s = sqrt(w_a^2 - x^2), for 0 < x < w_a.
/// A zero of this function would be an eigenfrequency of g_a below w_a.
double wa_lower_root_function(double a, double wa, double x);

/// One row of the exponential-foot example: w_a with its bracket
/// pi / (4 (1/2 - a)) < w_a < pi / (3 (1/2 - a)) and the FEM value of mu_1(g_a).
struct UnboundedRow {
    double a;
    double w_a;
    double w_a2;
    double fem_mu;
    double lower;
    double upper;
    bool inside_bracket;
};

UnboundedRow unbounded_row(double a, int n = 8192);

/// Tolerance on mu_k / bound for the FEM check: 0.5% for alpha <= 2, 1% above.
double discretization_tolerance(double alpha) noexcept;

struct BoundCheck {
    double alpha;
    int k;
    double mu;
    double bound;
    double ratio;
    bool pass;
    int n;
    Grading grading;
};

/// Compares mu_k(h^alpha) on n nodes with bound_value(alpha, k).
/// Grading defaults to endpoint_graded for alpha > 2 and uniform otherwise.
BoundCheck check_bound(const PiecewiseLinearProfile& h, double alpha, int k, int n);
BoundCheck check_bound(const PiecewiseLinearProfile& h, double alpha, int k, int n, Grading grading);

Grading default_grading(double alpha) noexcept;

/// Random member of the normalized concave class with at most `max_interior`
/// interior breakpoints: sorted uniform abscissae, sorted decreasing slopes,
/// lifted to be nonnegative and scaled to unit maximum.
PiecewiseLinearProfile random_concave_profile(std::mt19937_64& rng, int max_interior = 6);

}  // namespace sharpmu
