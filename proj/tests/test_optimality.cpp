#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "sharpmu/eigensolver_1d.hpp"
#include "sharpmu/errors.hpp"
#include "sharpmu/optimality.hpp"
#include "sharpmu/sharp_bounds.hpp"

using namespace sharpmu;
using std::numbers::pi;

namespace {

const PiecewiseLinearProfile& roof() {
    static const auto r = make_profile({{0, 0}, {0.5, 1}, {1, 0}});
    return r;
}

std::vector<double> grid_for(const PiecewiseLinearProfile& h, int n, Grading g = Grading::uniform) {
    std::vector<double> xs;
    for (const auto& bp : h.breakpoints()) {
        xs.push_back(bp.x);
    }
    return make_grid(n, g, xs);
}

// mu_k((h + t phi)^alpha) on a fixed grid, the same nodes eigen_derivative uses.
double perturbed_mu(const PiecewiseLinearProfile& h, const std::function<double(double)>& phi, double alpha,
                    int k, const std::vector<double>& grid, double t) {
    SampledWeight w;
    w.grid = grid;
    for (double x : grid) {
        w.values.push_back(std::pow(std::max(h(x) + t * phi(x), 0.0), alpha));
    }
    return mu_k(w, k).mu;
}

double hausdorff(const PiecewiseLinearProfile& a, const PiecewiseLinearProfile& b) {
    const int n = 801;
    std::vector<std::array<double, 2>> pa;
    std::vector<std::array<double, 2>> pb;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        pa.push_back({x, a(x)});
        pb.push_back({x, b(x)});
    }
    auto one_side = [](const auto& p, const auto& q) {
        double worst = 0;
        for (const auto& s : p) {
            double best = 1e300;
            for (const auto& r : q) {
                best = std::min(best, std::hypot(s[0] - r[0], s[1] - r[1]));
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_side(pa, pb), one_side(pb, pa));
}

bool concave_member(const PiecewiseLinearProfile& h) {
    if (std::abs(h.max_value() - 1) > 1e-12) {
        return false;
    }
    for (std::size_t p = 1; p < h.piece_count(); ++p) {
        if (h.slope(p) > h.slope(p - 1) + 1e-9) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("eigen_derivative: zero direction and finite differences on the roof") {
    CHECK(eigen_derivative(roof(), 1, 1, [](double) { return 0.0; }, 2049) == 0.0);

    auto bump = [](double x) { return std::max(0.0, 1 - std::abs(x - 0.3) / 0.1); };
    const int n = 4097;
    const double d = eigen_derivative(roof(), 1, 1, bump, n);
    const auto grid = grid_for(roof(), n);
    const double fd =
        oracle::central_difference([&](double t) { return perturbed_mu(roof(), bump, 1, 1, grid, t); }, 1e-5);
    CHECK(d == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("eigen_derivative: stationarity at the roof and scale invariance") {
    // Peak shift is antisymmetric, so its first variation vanishes at the symmetric optimum.
    auto shift = [](double x) { return x < 0.5 ? -2.0 : (x > 0.5 ? 2.0 : 0.0); };
    CHECK(std::abs(eigen_derivative(roof(), 1, 1, shift, 4097)) <= 1e-6);

    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto h = gen::concave_profile(rng);
        const double alpha = gen::uniform(rng, 1, 3);
        const int k = gen::integer(rng, 1, 3);
        const double mu = mu_k(sample_weight(h, alpha, 2049), k).mu;
        const double d = eigen_derivative(h, alpha, k, [&](double x) { return h(x); }, 2049);
        CHECK(std::abs(d) / mu <= 1e-6);
    }
}

TEST_CASE("eigen_derivative matches central differences on random data") {
    std::mt19937_64 rng(47);
    int checked = 0;
    while (checked < 20) {
        const auto h = gen::concave_profile(rng);
        const double alpha = std::array{1.0, 1.5, 2.0, 3.0}[gen::integer(rng, 0, 3)];
        const int k = gen::integer(rng, 1, 3);
        const auto phi = gen::bump(rng);
        const Grading g = default_grading(alpha);
        const int n = 2049;
        double d = 0;
        try {
            d = eigen_derivative(h, alpha, k, phi, n, g);
        } catch (const NumericalError&) {
            continue;  // not simple: formula does not apply
        }
        const auto grid = grid_for(h, n, g);
        const double fd =
            oracle::central_difference([&](double t) { return perturbed_mu(h, phi, alpha, k, grid, t); }, 1e-5);
        CAPTURE(alpha);
        CAPTURE(k);
        CHECK(std::abs(d - fd) <= 1e-3 * std::abs(fd));
        ++checked;
    }
}

TEST_CASE("ShapeSensitivity rejects mismatched data") {
    CHECK_THROWS_AS(ShapeSensitivity({0, 0.5, 1}, {0, 1}, 1, 1), ValidationError);
    CHECK_THROWS_AS(ShapeSensitivity({0, 0.5, 1}, {0, 1, 0}, 0.5, 1), DomainError);
    const auto grid = make_grid(257, Grading::uniform, std::vector<double>{0.5});
    std::vector<double> hv;
    for (double x : grid) {
        hv.push_back(roof()(x));
    }
    const ShapeSensitivity s(grid, hv, 1, 1);
    CHECK_THROWS_AS(s.directional(Perturbation{{1.0, 2.0}}), ValidationError);
}

TEST_CASE("hat functions") {
    const std::vector<double> xs{0, 0.25, 0.5, 1};
    CHECK(hat(xs, 1, 0.25) == 1.0);
    CHECK(hat(xs, 1, 0.5) == 0.0);
    CHECK(hat(xs, 1, 0.375) == doctest::Approx(0.5));
    CHECK(hat(xs, 0, 0.0) == 1.0);
    CHECK(hat(xs, 3, 0.75) == doctest::Approx(0.5));
    for (double x = 0; x <= 1; x += 0.01) {
        double s = 0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            s += hat(xs, j, x);
        }
        CHECK(s == doctest::Approx(1.0));
    }
}

TEST_CASE("switching function at the optimal profiles, alpha = 1") {
    for (int k = 1; k <= 4; ++k) {
        const auto s = mu_k(sample_weight(optimal_profile(1, k), 1, 8192), k);
        const auto sw = switching_function(s);
        CAPTURE(k);
        CHECK(sw.total_changes == 2 * k);
        REQUIRE(sw.changes_per_interval.size() == static_cast<std::size_t>(k + 1));
        CHECK(sw.changes_per_interval.front() == 1);
        CHECK(sw.changes_per_interval.back() == 1);
        for (std::size_t i = 1; i + 1 < sw.changes_per_interval.size(); ++i) {
            CHECK(sw.changes_per_interval[i] == 2);
        }
        CHECK(sw.values.size() == s.grid.size() - 1);
    }
}

TEST_CASE("piece integrals vanish on internal pieces of the optimum, not elsewhere") {
    const auto h = optimal_profile(1, 2);
    const auto s = mu_k(sample_weight(h, 1, 8192), 2);
    const auto pi_ = piece_integrals(h, 1, s);
    REQUIRE(pi_.pieces.size() == 3);
    CHECK_FALSE(pi_.pieces[0].internal);
    CHECK(pi_.pieces[1].internal);
    CHECK_FALSE(pi_.pieces[2].internal);
    for (const auto& p : pi_.pieces) {
        if (p.internal) {
            CHECK(std::abs(p.int_f) <= 1e-3 * pi_.norm_f);
            CHECK(std::abs(p.int_tf) <= 1e-3 * pi_.norm_f);
        }
    }

    const auto shifted = make_profile({{0, 0}, {0.4, 1}, {1, 0}});
    const auto s2 = mu_k(sample_weight(shifted, 1, 8192), 1);
    const auto p2 = piece_integrals(shifted, 1, s2);
    double worst = 0;
    for (const auto& p : p2.pieces) {
        worst = std::max(worst, std::abs(p.int_f));
    }
    CHECK(worst > 1e-2 * p2.norm_f);

    // a grid that misses the kink is refused
    const auto coarse = mu_k(sample_weight(make_profile({{0, 0}, {0.5, 1}, {1, 0}}), 1, 1024), 1);
    CHECK_THROWS_AS(piece_integrals(shifted, 1, coarse), ValidationError);
}

TEST_CASE("eigenfunction vanishes at the interior kinks of the optimal profiles") {
    for (double alpha : {1.0, 1.5, 3.0}) {
        for (int k = 1; k <= 4; ++k) {
            const auto h = optimal_profile(alpha, k);
            const auto s = mu_k(sample_weight(h, alpha, 8192, default_grading(alpha)), k);
            const auto vd = vertex_diagnostics(h, s);
            CHECK_FALSE(vd.empty());
            for (const auto& v : vd) {
                CAPTURE(alpha);
                CAPTURE(k);
                CHECK(v.u_relative <= 1e-3);
            }
        }
    }
}

TEST_CASE("project_concave: feasibility, idempotence, fixed points") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = gen::integer(rng, 2, 12);
        std::vector<double> xs{0.0};
        for (int i = 1; i < m - 1; ++i) {
            xs.push_back(gen::uniform(rng, 0, 1));
        }
        xs.push_back(1.0);
        std::sort(xs.begin() + 1, xs.end() - 1);
        bool distinct = true;
        for (std::size_t i = 1; i < xs.size(); ++i) {
            distinct = distinct && xs[i] - xs[i - 1] > 1e-3;
        }
        if (!distinct) {
            continue;
        }
        std::vector<double> ys;
        for (int i = 0; i < m; ++i) {
            ys.push_back(gen::uniform(rng, -0.5, 1.5));
        }
        const auto p = project_concave(xs, ys);
        double top = 0;
        for (double y : p) {
            CHECK(y >= 0.0);
            CHECK(y <= 1.0);
            top = std::max(top, y);
        }
        CHECK(top == 1.0);
        for (std::size_t i = 2; i < p.size(); ++i) {
            const double s0 = (p[i - 1] - p[i - 2]) / (xs[i - 1] - xs[i - 2]);
            const double s1 = (p[i] - p[i - 1]) / (xs[i] - xs[i - 1]);
            CHECK(s1 <= s0 + 1e-9);
        }
        const auto q = project_concave(xs, p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
        }
    }
    const std::vector<double> xs{0, 0.3, 0.7, 1};
    const std::vector<double> ys{0.1, 1, 1, 0.2};
    CHECK(project_concave(xs, ys) == ys);
    CHECK_THROWS_AS(project_concave(xs, {1.0, 2.0}), ValidationError);
}

TEST_CASE("maximize_mu: alpha = 1, k = 1 from an asymmetric roof") {
    const auto init = make_profile({{0, 0}, {0.125, 0.125 / 0.45}, {0.25, 0.25 / 0.45}, {0.375, 0.375 / 0.45}, {0.45, 1.0},
                                    {0.625, 0.375 / 0.55}, {0.75, 0.25 / 0.55}, {0.875, 0.125 / 0.55}, {1, 0}});
    const auto r = maximize_mu(1, 1, 9, init);
    const double target = bound_value(1, 1).value;
    CHECK(r.final_mu >= 0.995 * target);
    CHECK(r.final_mu <= target * (1 + 5e-3));
    double peak = 0;
    double top = -1;
    for (const auto& bp : r.final_profile.breakpoints()) {
        if (bp.y > top) {
            top = bp.y;
            peak = bp.x;
        }
    }
    CHECK(std::abs(peak - 0.5) <= 0.02);
    CHECK(concave_member(r.final_profile));
    CHECK(endpoint_check(r));
    for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
        CHECK(r.trajectory[i].mu >= r.trajectory[i - 1].mu);
    }
    CHECK(r.breakpoints == 9);
    CHECK(r.trajectory.front().iteration == 0);
}

TEST_CASE("maximize_mu: alpha = 1, k = 2 approaches the trapezoid") {
    const auto r = maximize_mu(1, 2, 9);
    const double target = bound_value(1, 2).value;
    CHECK(r.final_mu >= 0.99 * target);
    CHECK(hausdorff(r.final_profile, optimal_profile(1, 2)) <= 0.05);
    CHECK(concave_member(r.final_profile));
}

TEST_CASE("maximize_mu: alpha = 3, k = 1") {
    const auto r = maximize_mu(3, 1, 9);
    CHECK(r.final_mu >= 0.99 * bound_value(3, 1).value);
    CHECK(endpoint_check(r));
}

TEST_CASE("maximize_mu: alpha = 1, k = 3 drives the endpoints to zero") {
    const auto r = maximize_mu(1, 3, 9);
    CHECK(endpoint_check(r));
    CHECK(r.final_mu >= 0.95 * bound_value(1, 3).value);
}

TEST_CASE("maximize_mu: a profile starting at h(0) = 1/2 loses its endpoint mass") {
    const auto init = make_profile({{0, 0.5}, {0.5, 1}, {1, 0.5}});
    OptimOptions o;
    o.free_abscissae = false;
    const auto r = maximize_mu(1, 1, 9, init, o);
    REQUIRE(r.trajectory.size() > 10);
    CHECK(r.trajectory.back().h0 < r.trajectory.front().h0);
    const std::size_t n = r.trajectory.size();
    int up = 0;
    for (std::size_t i = n - 10; i < n; ++i) {
        up += r.trajectory[i].h0 > r.trajectory[i - 1].h0 + 1e-12;
    }
    CHECK(up == 0);
    CHECK(endpoint_check(r));
}

TEST_CASE("maximize_mu: deterministic given the seed, argument checks") {
    OptimOptions o;
    o.steps = 15;
    o.seed = 9;
    const auto a = maximize_mu(1, 1, 7, o);
    const auto b = maximize_mu(1, 1, 7, o);
    CHECK(a.final_mu == b.final_mu);
    CHECK(a.trajectory.size() == b.trajectory.size());
    CHECK_THROWS_AS(maximize_mu(1, 3, 3, roof()), DomainError);
    CHECK_THROWS_AS(maximize_mu(0.5, 1, 9, roof()), DomainError);
}
