#include "sharpmu/sharp_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "roots.hpp"
#include "sharpmu/eigensolver_1d.hpp"
#include "sharpmu/errors.hpp"
#include "sharpmu/special_functions.hpp"

namespace sharpmu {

namespace {

constexpr double pi = std::numbers::pi;

void require_alpha(double alpha) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
        throw DomainError("alpha must be finite and >= 1");
    }
}

}  // namespace

std::string_view to_string(BoundBranch b) noexcept {
    switch (b) {
        case BoundBranch::alpha_lt_2: return "alpha_lt_2";
        case BoundBranch::alpha_eq_2: return "alpha_eq_2";
        case BoundBranch::alpha_gt_2_odd: return "alpha_gt_2_odd";
        case BoundBranch::alpha_gt_2_even: return "alpha_gt_2_even";
    }
    return "unknown";
}

BoundValue bound_value(double alpha, int k) {
    require_alpha(alpha);
    if (k < 1) {
        throw DomainError("k must be >= 1");
    }
    const double nu = 0.5 * (alpha - 1.0);
    if (alpha < 2.0) {
        const double w = 2.0 * bessel_zero_value(nu, 1) + (k - 1) * pi;
        return {alpha, k, w * w, BoundBranch::alpha_lt_2};
    }
    if (alpha == 2.0) {
        const double w = (k + 1) * pi;
        return {alpha, k, w * w, BoundBranch::alpha_eq_2};
    }
    if (k % 2 == 1) {
        const double j = bessel_zero_value(nu, (k + 1) / 2);
        return {alpha, k, 4.0 * j * j, BoundBranch::alpha_gt_2_odd};
    }
    const double w = bessel_zero_value(nu, k / 2) + bessel_zero_value(nu, k / 2 + 1);
    return {alpha, k, w * w, BoundBranch::alpha_gt_2_even};
}

BoundValue kroger_bound(int d, int k) {
    if (d < 2) {
        throw DomainError("kroger_bound: dimension must be >= 2");
    }
    return bound_value(static_cast<double>(d - 1), k);
}

void CharacteristicProblem::validate() const {
    require_alpha(alpha);
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("characteristic problem needs a > 0 and b > 0");
    }
    if (a + b > 1.0 + 1e-12) {
        throw DomainError("characteristic problem needs a + b <= 1");
    }
}

CharacteristicProblem optimal_characteristic_problem(double alpha, int k) {
    const auto h = optimal_profile(alpha, k);
    const auto bps = h.breakpoints();
    // Rise ends at the first breakpoint with value 1, fall starts at the last.
    double xa = 1.0;
    double xb = 0.0;
    for (const auto& p : bps) {
        if (p.y == 1.0) {
            xa = std::min(xa, p.x);
            xb = std::max(xb, p.x);
        }
    }
    return {xa, 1.0 - xb, alpha};
}

double characteristic_det(const CharacteristicProblem& p, double w) {
    p.validate();
    if (!(w > 0.0)) {
        throw DomainError("characteristic_det requires w > 0");
    }
    const BesselOrder nu(0.5 * (p.alpha - 1.0));
    const BesselOrder nu1(nu.value() + 1.0);
    const double plateau = std::max(0.0, 1.0 - p.a - p.b);
    const double j0a = bessel_j(nu, w * p.a);
    const double j1a = bessel_j(nu1, w * p.a);
    const double j0b = bessel_j(nu, w * p.b);
    const double j1b = bessel_j(nu1, w * p.b);
    const double c = std::cos(w * plateau);
    const double s = std::sin(w * plateau);
    // Unknowns (A1, B1, B2, C1); rows: value and slope/w at x_a, value and slope/w at x_b.
    Eigen::Matrix4d m;
    m << j0a, -1.0, 0.0, 0.0,
        -j1a, 0.0, -1.0, 0.0,
         0.0, c, s, -j0b,
         0.0, -s, c, -j1b;
    return m.determinant();
}

double solve_characteristic(const CharacteristicProblem& p, int which, double ceiling) {
    p.validate();
    if (which < 1) {
        throw DomainError("solve_characteristic: which must be >= 1");
    }
    const double plateau = std::max(0.0, 1.0 - p.a - p.b);
    const double step = pi / (8.0 * plateau + 8.0);
    const auto f = [&](double w) { return characteristic_det(p, w); };
    double lo = 1e-3 * step;
    double flo = f(lo);
    int found = 0;
    while (lo < ceiling) {
        const double hi = lo + step;
        const double fhi = f(hi);
        if (fhi == 0.0) {
            if (++found == which) {
                return hi;
            }
        } else if (std::signbit(fhi) != std::signbit(flo) && flo != 0.0) {
            if (++found == which) {
                return detail::bisect(f, lo, hi, 1e-13);
            }
        }
        lo = hi;
        flo = fhi;
    }
    throw NumericalError("solve_characteristic: scan reached the ceiling w = " + std::to_string(ceiling) +
                         " before zero number " + std::to_string(which));
}

ClosedFormEigenfunction::ClosedFormEigenfunction(double alpha, int k) {
    require_alpha(alpha);
    if (k < 1) {
        throw DomainError("closed-form eigenfunction needs k >= 1");
    }
    const auto geom = optimal_characteristic_problem(alpha, k);
    nu_ = 0.5 * (alpha - 1.0);
    w_ = std::sqrt(bound_value(alpha, k).value);
    xa_ = geom.a;
    xb_ = 1.0 - geom.b;
    // C^1 matching: plateau in the shifted basis cos(w(x-xa)), sin(w(x-xa)).
    b1_ = radial(xa_);
    b2_ = radial_prime(xa_) / w_;
    const double arg = w_ * (xb_ - xa_);
    const double value_b = b1_ * std::cos(arg) + b2_ * std::sin(arg);
    const double slope_b = w_ * (-b1_ * std::sin(arg) + b2_ * std::cos(arg));
    // Falling segment v(x) = C radial(1-x): v(xb) = C radial(b), v'(xb) = -C radial'(b).
    const double rb = radial(1.0 - xb_);
    const double rpb = -radial_prime(1.0 - xb_);
    c1_ = std::abs(rb) >= std::abs(rpb) / w_ ? value_b / rb : slope_b / rpb;
}

double ClosedFormEigenfunction::radial(double r) const {
    if (r <= 0.0) {
        return std::pow(0.5 * w_, nu_) / std::tgamma(nu_ + 1.0);
    }
    return std::pow(r, -nu_) * bessel_j(BesselOrder(nu_), w_ * r);
}

double ClosedFormEigenfunction::radial_prime(double r) const {
    if (r <= 0.0) {
        return 0.0;
    }
    return -w_ * std::pow(r, -nu_) * bessel_j(BesselOrder(nu_ + 1.0), w_ * r);
}

double ClosedFormEigenfunction::operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("closed-form eigenfunction evaluated outside [0,1]");
    }
    if (x <= xa_) {
        return radial(x);
    }
    if (x >= xb_) {
        return c1_ * radial(1.0 - x);
    }
    const double arg = w_ * (x - xa_);
    return b1_ * std::cos(arg) + b2_ * std::sin(arg);
}

double ClosedFormEigenfunction::derivative(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("closed-form eigenfunction evaluated outside [0,1]");
    }
    if (x <= xa_) {
        return radial_prime(x);
    }
    if (x >= xb_) {
        return -c1_ * radial_prime(1.0 - x);
    }
    const double arg = w_ * (x - xa_);
    return w_ * (-b1_ * std::sin(arg) + b2_ * std::cos(arg));
}

double closed_form_eigenfunction(double alpha, int k, double x) {
    return ClosedFormEigenfunction(alpha, k)(x);
}

double solve_wa(double a) {
    if (!(a > 0.0 && a < 0.5)) {
        throw DomainError("solve_wa requires 0 < a < 1/2");
    }
    const double len = 0.5 - a;
    // F increases from -inf to +inf on (0, pi / (2 len)): tan grows, -1/(a x) grows.
    const auto f = [&](double x) { return std::tan(x * len) - 1.0 - 1.0 / (a * x); };
    const double hi = 0.5 * pi / len;
    double lo = hi * 1e-9;
    double top = hi * (1.0 - 1e-12);
    return detail::bisect(f, lo, top, 1e-14 * hi);
}

double wa_lower_root_function(double a, double wa, double x) {
    const double s = std::sqrt(wa * wa - x * x);
    return x * std::tan(x * (0.5 - a)) - wa - s / std::tanh(a * s);
}

UnboundedRow unbounded_row(double a, int n) {
    const double w = solve_wa(a);
    const double lower = pi / (4.0 * (0.5 - a));
    const double upper = pi / (3.0 * (0.5 - a));
    const double fem = mu_k(exp_profile(a, w, n), 1).mu;
    return {a, w, w * w, fem, lower, upper, lower < w && w < upper};
}

double discretization_tolerance(double alpha) noexcept { return alpha <= 2.0 ? 0.005 : 0.01; }

Grading default_grading(double alpha) noexcept {
    return alpha > 2.0 ? Grading::endpoint_graded : Grading::uniform;
}

BoundCheck check_bound(const PiecewiseLinearProfile& h, double alpha, int k, int n, Grading grading) {
    const auto bound = bound_value(alpha, k);
    const auto sol = mu_k(sample_weight(h, alpha, n, grading), k);
    const double ratio = sol.mu / bound.value;
    return {alpha, k, sol.mu, bound.value, ratio, ratio <= 1.0 + discretization_tolerance(alpha), n, grading};
}

BoundCheck check_bound(const PiecewiseLinearProfile& h, double alpha, int k, int n) {
    return check_bound(h, alpha, k, n, default_grading(alpha));
}

PiecewiseLinearProfile random_concave_profile(std::mt19937_64& rng, int max_interior) {
    std::uniform_int_distribution<int> count(0, std::max(0, max_interior));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> slope(-4.0, 4.0);
    const int m = count(rng);

    std::vector<double> xs{0.0, 1.0};
    for (int i = 0; i < m; ++i) {
        xs.push_back(0.02 + 0.96 * unit(rng));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(), [](double p, double q) { return q - p < 1e-3; }), xs.end());
    xs.back() = 1.0;

    std::vector<double> slopes(xs.size() - 1);
    for (double& s : slopes) {
        s = slope(rng);
    }
    std::sort(slopes.begin(), slopes.end(), std::greater<>());

    std::vector<double> ys{unit(rng)};
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        ys.push_back(ys.back() + slopes[i] * (xs[i + 1] - xs[i]));
    }
    const double lift = std::max(0.0, -*std::min_element(ys.begin(), ys.end()));
    double top = 0.0;
    for (double& y : ys) {
        y += lift;
        top = std::max(top, y);
    }
    std::vector<Breakpoint> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        pts.push_back({xs[i], top > 1e-12 ? ys[i] / top : 1.0});
    }
    return make_profile(std::move(pts));
}

}  // namespace sharpmu
