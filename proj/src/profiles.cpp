#include "sharpmu/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sharpmu/errors.hpp"
#include "sharpmu/special_functions.hpp"

namespace sharpmu {

namespace {

std::string at(std::size_t i, const Breakpoint& p) {
    std::ostringstream os;
    os << "breakpoint " << i << " (" << p.x << ", " << p.y << ")";
    return os.str();
}

void require_alpha_k(double alpha, int k) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
        throw DomainError("alpha must be finite and >= 1");
    }
    if (k < 1) {
        throw DomainError("k must be >= 1");
    }
}

PiecewiseLinearProfile roof(double peak) {
    return make_profile({{0.0, 0.0}, {peak, 1.0}, {1.0, 0.0}});
}

}  // namespace

PiecewiseLinearProfile::PiecewiseLinearProfile(std::vector<Breakpoint> points, bool normalized)
    : points_(std::move(points)), normalized_(normalized) {
    constexpr double tol = kConcavityTolerance;
    if (points_.size() < 2) {
        throw ValidationError("profile needs at least two breakpoints");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        auto& p = points_[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError("non-finite " + at(i, p));
        }
        if (p.y < -tol || p.y > 1.0 + tol) {
            throw ValidationError("value outside [0,1] at " + at(i, p));
        }
        p.y = std::clamp(p.y, 0.0, 1.0);
    }
    if (std::abs(points_.front().x) > tol) {
        throw ValidationError("first abscissa must be 0, got " + at(0, points_.front()));
    }
    if (std::abs(points_.back().x - 1.0) > tol) {
        throw ValidationError("last abscissa must be 1, got " + at(points_.size() - 1, points_.back()));
    }
    points_.front().x = 0.0;
    points_.back().x = 1.0;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i].x > points_[i - 1].x)) {
            throw ValidationError("abscissae not strictly increasing at " + at(i, points_[i]));
        }
    }
    for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
        const double left = slope(i - 1);
        const double right = slope(i);
        const double excess = right - left;
        if (excess > tol * std::max(1.0, std::abs(left))) {
            throw ValidationError("concavity violated (slope increases) at " + at(i, points_[i]));
        }
        if (excess > 0.0) {
            // Roundoff-level kink: put the point back on the chord of its neighbours.
            const auto& a = points_[i - 1];
            const auto& b = points_[i + 1];
            points_[i].y = a.y + (b.y - a.y) * (points_[i].x - a.x) / (b.x - a.x);
        }
    }
    if (normalized_ && std::abs(max_value() - 1.0) > tol) {
        throw ValidationError("normalized profile must have max value 1");
    }
}

double PiecewiseLinearProfile::operator()(double x) const {
    if (x <= 0.0) {
        return points_.front().y;
    }
    if (x >= 1.0) {
        return points_.back().y;
    }
    const auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                     [](double v, const Breakpoint& p) { return v < p.x; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

double PiecewiseLinearProfile::max_value() const noexcept {
    double m = 0.0;
    for (const auto& p : points_) {
        m = std::max(m, p.y);
    }
    return m;
}

double PiecewiseLinearProfile::slope(std::size_t piece) const {
    const auto& a = points_.at(piece);
    const auto& b = points_.at(piece + 1);
    return (b.y - a.y) / (b.x - a.x);
}

PiecewiseLinearProfile make_profile(std::vector<Breakpoint> points, bool normalized) {
    return PiecewiseLinearProfile(std::move(points), normalized);
}

PiecewiseLinearProfile optimal_profile(double alpha, int k) {
    require_alpha_k(alpha, k);
    const double nu = 0.5 * (alpha - 1.0);
    if (alpha < 2.0) {
        if (k == 1) {
            return roof(0.5);
        }
        const double j = bessel_zero_value(nu, 1);
        const double xa = j / (2.0 * j + (k - 1) * std::numbers::pi);
        return make_profile({{0.0, 0.0}, {xa, 1.0}, {1.0 - xa, 1.0}, {1.0, 0.0}});
    }
    if (alpha == 2.0) {
        if (k % 2 == 1) {
            return roof(0.5);
        }
        return roof((k / 2.0) / (k + 1.0));
    }
    if (k % 2 == 1) {
        return roof(0.5);
    }
    const double j1 = bessel_zero_value(nu, k / 2);
    const double j2 = bessel_zero_value(nu, k / 2 + 1);
    return roof(j1 / (j1 + j2));
}

std::vector<double> alpha2_family_abscissae(int k) {
    if (k < 1) {
        throw DomainError("k must be >= 1");
    }
    std::vector<double> xs;
    for (int i = 1; i <= k; ++i) {
        xs.push_back(static_cast<double>(i) / (k + 1));
    }
    return xs;
}

void SampledWeight::validate() const {
    if (grid.size() < 2 || grid.size() != values.size()) {
        throw ValidationError("weight needs matching grid/value arrays of size >= 2");
    }
    if (grid.front() != 0.0 || grid.back() != 1.0) {
        throw ValidationError("weight grid must start at 0 and end at 1");
    }
    bool any_positive = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw ValidationError("weight grid not strictly increasing at node " + std::to_string(i));
        }
        if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
            throw ValidationError("weight value negative or non-finite at node " + std::to_string(i));
        }
        any_positive = any_positive || values[i] > 0.0;
    }
    if (!any_positive) {
        throw ValidationError("weight is identically zero");
    }
}

std::vector<double> make_grid(int n, Grading grading, std::span<const double> must_include) {
    if (n < 2) {
        throw DomainError("grid needs at least 2 nodes");
    }
    std::vector<double> nodes(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        if (grading == Grading::uniform) {
            nodes[i] = t;
        } else {
            nodes[i] = t <= 0.5 ? 2.0 * t * t : 1.0 - 2.0 * (1.0 - t) * (1.0 - t);
        }
    }
    nodes.front() = 0.0;
    nodes.back() = 1.0;

    // Snap the nearest interior node onto each required abscissa when it is close,
    // otherwise insert; keeps element sizes comparable to the base grid.
    std::vector<bool> moved(nodes.size(), false);
    std::vector<double> extra;
    for (double p : must_include) {
        if (!(p > 0.0 && p < 1.0)) {
            continue;
        }
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), p);
        const std::size_t u = static_cast<std::size_t>(it - nodes.begin());
        const std::size_t l = u - 1;
        const double gap = nodes[u] - nodes[l];
        if (nodes[u] - p < 1e-14 && u + 1 != nodes.size()) {
            nodes[u] = p;
            moved[u] = true;
            continue;
        }
        if (p - nodes[l] < 1e-14 && l != 0) {
            nodes[l] = p;
            moved[l] = true;
            continue;
        }
        if (p - nodes[l] < 0.3 * gap && l != 0 && !moved[l]) {
            nodes[l] = p;
            moved[l] = true;
        } else if (nodes[u] - p < 0.3 * gap && u + 1 != nodes.size() && !moved[u]) {
            nodes[u] = p;
            moved[u] = true;
        } else {
            extra.push_back(p);
        }
    }
    nodes.insert(nodes.end(), extra.begin(), extra.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double a, double b) { return b - a < 1e-14; }),
                nodes.end());
    nodes.back() = 1.0;
    return nodes;
}

SampledWeight sample_weight_on(const PiecewiseLinearProfile& h, double alpha, std::vector<double> grid) {
    if (!(alpha >= 1.0)) {
        throw DomainError("alpha must be >= 1");
    }
    SampledWeight w;
    w.values.reserve(grid.size());
    for (double x : grid) {
        w.values.push_back(std::pow(std::max(h(x), 0.0), alpha));
    }
    // Exact at breakpoints, where interpolation can lose the last ulp.
    for (const auto& bp : h.breakpoints()) {
        const auto it = std::lower_bound(grid.begin(), grid.end(), bp.x);
        if (it != grid.end() && *it == bp.x) {
            w.values[static_cast<std::size_t>(it - grid.begin())] = std::pow(bp.y, alpha);
        }
    }
    w.grid = std::move(grid);
    w.exponent = alpha;
    w.validate();
    return w;
}

SampledWeight sample_weight(const PiecewiseLinearProfile& h, double alpha, int n, Grading grading) {
    std::vector<double> xs;
    for (const auto& bp : h.breakpoints()) {
        xs.push_back(bp.x);
    }
    return sample_weight_on(h, alpha, make_grid(n, grading, xs));
}

double exp_profile_value(const ExpProfile& p, double x) {
    if (x < p.a) {
        return std::exp(2.0 * p.w * (x - p.a));
    }
    if (x > 1.0 - p.a) {
        return std::exp(2.0 * p.w * (1.0 - x - p.a));
    }
    return 1.0;
}

SampledWeight exp_profile(double a, double w, int n) {
    if (!(a > 0.0 && a < 0.5)) {
        throw DomainError("exp_profile requires 0 < a < 1/2");
    }
    if (!(w > 0.0) || !std::isfinite(w)) {
        throw DomainError("exp_profile requires w > 0");
    }
    const double marks[] = {a, 1.0 - a};
    SampledWeight s;
    s.grid = make_grid(n, Grading::uniform, marks);
    const ExpProfile p{a, w};
    for (double x : s.grid) {
        s.values.push_back(exp_profile_value(p, x));
    }
    // Symmetrize so that g(x) and g(1-x) agree bit for bit on mirrored nodes.
    const std::size_t m = s.grid.size();
    for (std::size_t i = 0; i < m / 2; ++i) {
        if (std::abs(s.grid[i] + s.grid[m - 1 - i] - 1.0) < 1e-14) {
            s.values[m - 1 - i] = s.values[i];
        }
    }
    s.exponent = 1.0;
    s.validate();
    return s;
}

}  // namespace sharpmu
