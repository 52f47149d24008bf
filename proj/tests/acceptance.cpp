// Acceptance suite: one PASS/FAIL line per criterion, with timings.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sharpmu/errors.hpp"
#include "sharpmu/eigensolver_1d.hpp"
#include "sharpmu/optimality.hpp"
#include "sharpmu/ridge_fem_2d.hpp"
#include "sharpmu/sharp_bounds.hpp"
#include "sharpmu/special_functions.hpp"

using namespace sharpmu;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const PiecewiseLinearProfile& roof() {
    static const auto r = make_profile({{0, 0}, {0.5, 1}, {1, 0}});
    return r;
}

const double j01 = oracle::bessel_zero(0, 1);
const double j11 = oracle::bessel_zero(1, 1);
const double j12 = oracle::bessel_zero(1, 2);

Outcome c1() {
    const double target = 4 * j01 * j01;
    const double mu = mu_k(sample_weight(roof(), 1, 4096), 1).mu;
    return {rel(mu, target) <= 5e-3, fmt("mu=%.6f target=%.6f", mu, target)};
}

Outcome c2() {
    double worst = 0;
    for (int k = 2; k <= 4; ++k) {
        const double w = 2 * j01 + (k - 1) * pi;
        const double mu = mu_k(sample_weight(optimal_profile(1, k), 1, 8192), k).mu;
        worst = std::max(worst, rel(mu, w * w));
    }
    return {worst <= 5e-3, fmt("max rel err %.2e", worst)};
}

Outcome c3() {
    double worst = 0;
    for (int k = 1; k <= 4; ++k) {
        const double target = (k + 1) * (k + 1) * pi * pi;
        const double mu = mu_k(sample_weight(optimal_profile(2, k), 2, 8192), k).mu;
        worst = std::max(worst, rel(mu, target));
    }
    return {worst <= 5e-3, fmt("max rel err %.2e", worst)};
}

Outcome c4() {
    const double t1 = 4 * j11 * j11;
    const double t2 = (j11 + j12) * (j11 + j12);
    const double m1 = mu_k(sample_weight(optimal_profile(3, 1), 3, 8192, Grading::endpoint_graded), 1).mu;
    const double m2 = mu_k(sample_weight(optimal_profile(3, 2), 3, 8192, Grading::endpoint_graded), 2).mu;
    return {rel(m1, t1) <= 1e-2 && rel(m2, t2) <= 1e-2,
            fmt("k=1 %.6f vs %.6f, k=2 %.6f vs %.6f", m1, t1, m2, t2)};
}

// Independent of the library generator: minimum of random affine functions.
PiecewiseLinearProfile random_profile(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    const int planes = 1 + static_cast<int>(rng() % 4);
    std::vector<std::pair<double, double>> lines;
    for (int i = 0; i < planes; ++i) {
        const double x0 = 0.05 + 0.9 * u(rng);
        const double s = -4 + 8 * u(rng);
        lines.push_back({1 - s * x0, s});
    }
    auto env = [&](double x) {
        double v = 1e9;
        for (auto [c, s] : lines) {
            v = std::min(v, c + s * x);
        }
        return v;
    };
    std::vector<double> xs{0, 1};
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const double ds = lines[i].second - lines[j].second;
            if (std::abs(ds) > 1e-9) {
                const double x = (lines[j].first - lines[i].first) / ds;
                if (x > 1e-3 && x < 1 - 1e-3) {
                    xs.push_back(x);
                }
            }
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return b - a < 1e-6; }), xs.end());
    xs.back() = 1;
    double lo = 1e9;
    double hi = -1e9;
    for (double x : xs) {
        lo = std::min(lo, env(x));
        hi = std::max(hi, env(x));
    }
    const double floor = rng() % 3 == 0 ? 0.0 : 0.8 * u(rng);
    std::vector<Breakpoint> pts;
    for (double x : xs) {
        const double y = hi > lo ? (env(x) - lo) / (hi - lo) : 1.0;
        pts.push_back({x, std::clamp(floor + (1 - floor) * y, 0.0, 1.0)});
    }
    return make_profile(std::move(pts));
}

Outcome c5() {
    std::mt19937_64 rng(2024);
    double worst = 0;
    int fails = 0;
    for (int i = 0; i < 200; ++i) {
        const auto h = i % 2 ? random_profile(rng) : random_concave_profile(rng);
        for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
            const auto p = assemble(sample_weight(h, alpha, 2048, default_grading(alpha)));
            for (int k = 1; k <= 3; ++k) {
                const double ratio = pencil_eigenvalue(p, k) / bound_value(alpha, k).value;
                worst = std::max(worst, ratio);
                fails += ratio > 1 + discretization_tolerance(alpha);
            }
        }
    }
    return {fails == 0, fmt("2400 checks, max ratio %.6f, violations %d", worst, fails)};
}

Outcome c6() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0, 1);
    const double alphas[] = {1.0, 1.5, 2.0, 3.0};
    double worst = 0;
    int done = 0;
    while (done < 20) {
        const auto h = random_profile(rng);
        const double alpha = alphas[rng() % 4];
        const int k = 1 + static_cast<int>(rng() % 3);
        const double c = 0.2 + 0.6 * u(rng);
        const double r = 0.05 + 0.1 * u(rng);
        auto phi = [c, r](double x) {
            const double t = (x - c) / r;
            return std::abs(t) < 1 ? std::pow(std::cos(0.5 * pi * t), 2) : 0.0;
        };
        const Grading g = default_grading(alpha);
        const int n = 2049;
        double d = 0;
        try {
            d = eigen_derivative(h, alpha, k, phi, n, g);
        } catch (const NumericalError&) {
            continue;
        }
        std::vector<double> xs;
        for (const auto& bp : h.breakpoints()) {
            xs.push_back(bp.x);
        }
        const auto grid = make_grid(n, g, xs);
        auto at = [&](double t) {
            SampledWeight w;
            w.grid = grid;
            for (double x : grid) {
                w.values.push_back(std::pow(std::max(h(x) + t * phi(x), 0.0), alpha));
            }
            return mu_k(w, k).mu;
        };
        const double fd = oracle::central_difference(at, 1e-5);
        worst = std::max(worst, std::abs(d - fd) / std::abs(fd));
        ++done;
    }
    return {worst <= 1e-3, fmt("20 cases, max rel diff %.2e", worst)};
}

Outcome c7() {
    const auto init = make_profile({{0, 0}, {0.125, 0.125 / 0.45}, {0.25, 0.25 / 0.45}, {0.375, 0.375 / 0.45}, {0.45, 1.0},
                                    {0.625, 0.375 / 0.55}, {0.75, 0.25 / 0.55}, {0.875, 0.125 / 0.55}, {1, 0}});
    const auto t0 = std::chrono::steady_clock::now();
    const auto r1 = maximize_mu(1, 1, 9, init);
    const double s1 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double peak = 0;
    double top = -1;
    for (const auto& bp : r1.final_profile.breakpoints()) {
        if (bp.y > top) {
            top = bp.y;
            peak = bp.x;
        }
    }
    const auto t1 = std::chrono::steady_clock::now();
    const auto r2 = maximize_mu(1, 2, 9);
    const double s2 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    const double f1 = r1.final_mu / (4 * j01 * j01);
    const double f2 = r2.final_mu / std::pow(2 * j01 + pi, 2);
    return {f1 >= 0.995 && std::abs(peak - 0.5) <= 0.02 && f2 >= 0.99 && s1 < 120 && s2 < 120,
            fmt("k=1 %.4f%% peak %.4f (%.1fs), k=2 %.4f%% (%.1fs)", 100 * f1, peak, s1, 100 * f2, s2)};
}

Outcome c8() {
    double worst_u = 0;
    bool counts = true;
    std::string seen;
    for (int k = 1; k <= 4; ++k) {
        const auto h = optimal_profile(1, k);
        const auto s = mu_k(sample_weight(h, 1, 8192), k);
        for (const auto& v : vertex_diagnostics(h, s)) {
            worst_u = std::max(worst_u, v.u_relative);
        }
        const int z = switching_function(s).total_changes;
        counts = counts && z == 2 * k;
        seen += std::to_string(z) + (k < 4 ? "," : "");
    }
    return {worst_u <= 1e-3 && counts, fmt("max |u(x_i)|/max|u| %.2e, zeros %s", worst_u, seen.c_str())};
}

Outcome c9() {
    const auto st = collapse_study(roof(), 1, {0.2, 0.1, 0.05}, 512, 8, 8192);
    bool below = true;
    std::string ratios;
    for (const auto& r : st.rows) {
        below = below && r.d2mu <= 23.1327 * 1.02;
        ratios += fmt("%.4f ", r.ratio);
    }
    return {below && st.gap_decreasing, "ratios " + ratios + (st.gap_decreasing ? "(gap decreasing)" : "(gap not monotone)")};
}

Outcome c10() {
    const auto flat = make_profile({{0, 1}, {1, 1}});
    const auto s = neumann_eigs_2d(build_ridge_mesh(flat, 1.0, 96, 96), 2);
    const double e = rel(s.values[0], pi * pi);
    const double d = rel(s.values[1], s.values[0]);
    return {e <= 5e-3 && d <= 5e-3, fmt("mu1/pi^2 %.6f, mu2/mu1 %.6f", s.values[0] / (pi * pi), s.values[1] / s.values[0])};
}

Outcome c11() {
    bool ok = true;
    double prev = 0;
    std::string out;
    for (double a : {0.3, 0.4, 0.45}) {
        const auto r = unbounded_row(a);
        const double lo = pi / (4 * (0.5 - a));
        const double hi = pi / (3 * (0.5 - a));
        ok = ok && r.w_a > lo && r.w_a < hi && rel(r.fem_mu, r.w_a2) <= 1e-2 && r.w_a2 > prev;
        prev = r.w_a2;
        out += fmt("a=%.2f w_a^2=%.4f fem=%.4f; ", a, r.w_a2, r.fem_mu);
    }
    return {ok, out};
}

Outcome c12() {
    bool spacing = true;
    for (double nu : {0.0, 0.25, 0.5, 1.0, 2.5}) {
        double prev_gap = 0;
        for (int n = 1; n <= 20; ++n) {
            const double gap = bessel_zero_value(nu, n + 1) - bessel_zero_value(nu, n);
            if (nu >= 0.5) {
                spacing = spacing && gap >= pi - 1e-9 && (n == 1 || gap <= prev_gap + 1e-9);
            } else {
                spacing = spacing && gap <= pi + 1e-9 && (n == 1 || gap >= prev_gap - 1e-9);
            }
            prev_gap = gap;
        }
    }
    double rec = 0;
    double wr = 0;
    for (double nu : {0.0, 0.25, 0.5, 1.0, 2.5}) {
        const BesselOrder o(nu);
        for (double x = 0.5; x <= 50; x += 0.25) {
            const double w = bessel_j(o, x) * bessel_y_prime(o, x) - bessel_j_prime(o, x) * bessel_y(o, x);
            wr = std::max(wr, rel(w, 2 / (pi * x)));
            if (nu >= 1) {
                const double l = bessel_j(BesselOrder(nu - 1), x) + bessel_j(BesselOrder(nu + 1), x);
                const double r = 2 * nu / x * bessel_j(o, x);
                const double scale = std::abs(bessel_j(BesselOrder(nu - 1), x)) + std::abs(bessel_j(BesselOrder(nu + 1), x));
                rec = std::max(rec, std::abs(l - r) / scale);
            }
        }
    }
    return {spacing && rec <= 1e-9 && wr <= 1e-9,
            fmt("spacing %s, recurrence %.1e, Wronskian %.1e", spacing ? "ok" : "violated", rec, wr)};
}

Outcome c13() {
    double worst = 0;
    for (double alpha : {1.0, 3.0}) {
        for (int k = 1; k <= 3; ++k) {
            const double w = solve_characteristic(optimal_characteristic_problem(alpha, k), k);
            const double fem =
                mu_k(sample_weight(optimal_profile(alpha, k), alpha, 8192, default_grading(alpha)), k).mu;
            worst = std::max(worst, rel(fem, w * w));
        }
    }
    return {worst <= 5e-3, fmt("max rel diff %.2e", worst)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget;  // seconds, 0 = none
    };
    const std::vector<Criterion> criteria{
        {"sharp constant alpha=1 k=1", c1, 1},
        {"sharp constants alpha=1 k=2..4", c2, 5},
        {"alpha=2 family k<=4", c3, 0},
        {"alpha=3 odd/even branches", c4, 0},
        {"domination over random concave profiles", c5, 60},
        {"shape derivative vs finite differences", c6, 0},
        {"optimizer recovers the maximizers", c7, 240},
        {"optimality diagnostics at the maximizers", c8, 0},
        {"collapse of roof ridges", c9, 120},
        {"unit square Neumann spectrum", c10, 0},
        {"exponential-foot unboundedness example", c11, 0},
        {"Bessel zero spacing and identities", c12, 0},
        {"characteristic equation vs FEM", c13, 0},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget > 0 && secs > c.budget) {
            o.pass = false;
            o.detail += fmt(" [over budget %.0fs]", c.budget);
        }
        failed += !o.pass;
        std::printf("%s %2zu  %-42s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
