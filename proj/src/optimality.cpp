#include "sharpmu/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sharpmu/errors.hpp"
#include "sharpmu/sharp_bounds.hpp"

namespace sharpmu {

namespace {

double relative_gap(const TridiagonalPencil& p, int k, double mu) {
    double gap = std::abs(pencil_eigenvalue(p, k + 1) - mu);
    if (k >= 2) {
        gap = std::min(gap, std::abs(mu - pencil_eigenvalue(p, k - 1)));
    }
    return gap / std::abs(mu);
}

/// Weighted pool-adjacent-violators for a nonincreasing fit. Returns false when
/// the input already satisfies the order (and leaves it untouched).
bool pava_nonincreasing(std::vector<double>& v, std::span<const double> w) {
    bool ordered = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1]) {
            ordered = false;
            break;
        }
    }
    if (ordered) {
        return false;
    }
    struct Block {
        double value;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < v.size(); ++i) {
        blocks.push_back({v[i], w[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].value < blocks.back().value) {
            const Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double weight = prev.weight + top.weight;
            prev.value = (prev.value * prev.weight + top.value * top.weight) / weight;
            prev.weight = weight;
            prev.count += top.count;
        }
    }
    std::size_t i = 0;
    for (const auto& b : blocks) {
        for (std::size_t c = 0; c < b.count; ++c) {
            v[i++] = b.value;
        }
    }
    return true;
}

bool concave_enough(std::span<const double> xs, std::span<const double> ys) {
    for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
        const double left = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
        const double right = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if (right - left > 0.5 * kConcavityTolerance * std::max(1.0, std::abs(left))) {
            return false;
        }
    }
    return true;
}

PiecewiseLinearProfile to_profile(std::span<const double> xs, std::span<const double> ys) {
    std::vector<Breakpoint> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        pts.push_back({xs[i], ys[i]});
    }
    return make_profile(std::move(pts));
}

std::vector<double> uniform_abscissae(int m) {
    std::vector<double> xs(m);
    for (int i = 0; i < m; ++i) {
        xs[i] = static_cast<double>(i) / (m - 1);
    }
    xs.back() = 1.0;
    return xs;
}

// Sorted interior abscissae at least `gap` apart, endpoints pinned to 0 and 1.
std::vector<double> separate_abscissae(std::vector<double> xs, double gap) {
    const std::size_t m = xs.size();
    std::sort(xs.begin() + 1, xs.end() - 1);
    xs.front() = 0.0;
    xs.back() = 1.0;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        xs[j] = std::clamp(xs[j], gap * static_cast<double>(j), 1.0 - gap * static_cast<double>(m - 1 - j));
    }
    for (std::size_t j = 1; j + 1 < m; ++j) {
        xs[j] = std::max(xs[j], xs[j - 1] + gap);
    }
    for (std::size_t j = m - 1; j-- > 1;) {
        xs[j] = std::min(xs[j], xs[j + 1] - gap);
    }
    return xs;
}

}  // namespace

Perturbation sample_perturbation(std::span<const double> grid, const std::function<double(double)>& phi) {
    Perturbation p;
    p.values.reserve(grid.size());
    for (double x : grid) {
        p.values.push_back(phi(x));
    }
    return p;
}

double hat(std::span<const double> abscissae, std::size_t j, double x) {
    const double c = abscissae[j];
    if (x == c) {
        return 1.0;
    }
    if (x < c) {
        if (j == 0 || x <= abscissae[j - 1]) {
            return 0.0;
        }
        return (x - abscissae[j - 1]) / (c - abscissae[j - 1]);
    }
    if (j + 1 == abscissae.size() || x >= abscissae[j + 1]) {
        return 0.0;
    }
    return (abscissae[j + 1] - x) / (abscissae[j + 1] - c);
}

ShapeSensitivity::ShapeSensitivity(std::vector<double> grid, std::vector<double> h_nodes, double alpha, int k)
    : h_(std::move(h_nodes)), alpha_(alpha) {
    if (!(alpha >= 1.0)) {
        throw DomainError("alpha must be >= 1");
    }
    if (grid.size() != h_.size()) {
        throw ValidationError("ShapeSensitivity: grid and profile values differ in size");
    }
    weight_.grid = std::move(grid);
    weight_.exponent = alpha;
    weight_.values.reserve(h_.size());
    for (double v : h_) {
        weight_.values.push_back(std::pow(std::max(v, 0.0), alpha));
    }
    const auto pencil = assemble(weight_);
    solution_ = mu_k(pencil, k);
    const double gap = relative_gap(pencil, k, solution_.mu);
    if (!(gap > kSimpleGap)) {
        throw NumericalError("eigenvalue mu_" + std::to_string(k) + " is not simple (relative gap " +
                             std::to_string(gap) + "); the shape derivative is undefined");
    }
    const auto dw = weight_sensitivity(weight_, solution_);
    node_gradient_.resize(dw.size());
    for (std::size_t i = 0; i < dw.size(); ++i) {
        const double chain = alpha == 1.0 ? 1.0 : alpha * std::pow(std::max(h_[i], 0.0), alpha - 1.0);
        node_gradient_[i] = chain * dw[i];
    }
}

double ShapeSensitivity::directional(const Perturbation& phi) const {
    if (phi.values.size() != node_gradient_.size()) {
        throw ValidationError("perturbation not sampled on the solver grid");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < node_gradient_.size(); ++i) {
        s += node_gradient_[i] * phi.values[i];
    }
    return s;
}

double ShapeSensitivity::directional(const std::function<double(double)>& phi) const {
    return directional(sample_perturbation(weight_.grid, phi));
}

double eigen_derivative(const PiecewiseLinearProfile& h, double alpha, int k,
                        const std::function<double(double)>& phi, int n, Grading grading) {
    std::vector<double> xs;
    for (const auto& bp : h.breakpoints()) {
        xs.push_back(bp.x);
    }
    auto grid = make_grid(n, grading, xs);
    std::vector<double> hv;
    hv.reserve(grid.size());
    for (double x : grid) {
        hv.push_back(h(x));
    }
    const ShapeSensitivity sens(std::move(grid), std::move(hv), alpha, k);
    return sens.directional(phi);
}

SwitchingFunction switching_function(const SpectralSolution& s) {
    const auto& x = s.grid;
    const auto& u = s.u;
    SwitchingFunction out;
    std::vector<int> element_sign;
    for (std::size_t e = 0; e + 1 < x.size(); ++e) {
        const double len = x[e + 1] - x[e];
        const double du = (u[e + 1] - u[e]) / len;
        const double um = 0.5 * (u[e] + u[e + 1]);
        out.midpoints.push_back(0.5 * (x[e] + x[e + 1]));
        out.values.push_back(du * du - s.mu * um * um);
        element_sign.push_back(um > 0.0 ? 1 : (um < 0.0 ? -1 : 0));
    }
    // Elements are grouped into nodal intervals by the sign of u at their midpoint.
    int current = 0;
    int fsign = 0;
    for (std::size_t e = 0; e < out.values.size(); ++e) {
        const int us = element_sign[e] == 0 ? current : element_sign[e];
        if (us != current || out.changes_per_interval.empty()) {
            out.changes_per_interval.push_back(0);
            current = us;
            fsign = 0;
        }
        const double f = out.values[e];
        const int fs = f > 0.0 ? 1 : (f < 0.0 ? -1 : 0);
        if (fs != 0) {
            if (fsign != 0 && fs != fsign) {
                ++out.changes_per_interval.back();
                ++out.total_changes;
            }
            fsign = fs;
        }
    }
    return out;
}

PieceIntegrals piece_integrals(const PiecewiseLinearProfile& h, double alpha, const SpectralSolution& s) {
    const auto bps = h.breakpoints();
    // Maximal affine pieces: drop breakpoints where the slope does not change.
    std::vector<double> cuts{0.0};
    for (std::size_t i = 1; i + 1 < bps.size(); ++i) {
        if (std::abs(h.slope(i) - h.slope(i - 1)) > 1e-12 * std::max(1.0, std::abs(h.slope(i - 1)))) {
            cuts.push_back(bps[i].x);
        }
    }
    cuts.push_back(1.0);
    for (double c : cuts) {
        if (!std::binary_search(s.grid.begin(), s.grid.end(), c)) {
            throw ValidationError("piece_integrals: solver grid misses the breakpoint x = " + std::to_string(c));
        }
    }
    PieceIntegrals out;
    out.norm_f = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        out.pieces.push_back({cuts[p], cuts[p + 1], 0.0, 0.0, 0.0, p != 0 && p + 2 != cuts.size()});
    }
    std::size_t piece = 0;
    for (std::size_t e = 0; e + 1 < s.grid.size(); ++e) {
        const double len = s.grid[e + 1] - s.grid[e];
        const double mid = 0.5 * (s.grid[e] + s.grid[e + 1]);
        while (mid > out.pieces[piece].x_end) {
            ++piece;
        }
        const double du = (s.u[e + 1] - s.u[e]) / len;
        const double um = 0.5 * (s.u[e] + s.u[e + 1]);
        const double f = du * du - s.mu * um * um;
        auto& pi = out.pieces[piece];
        pi.int_f += f * len;
        pi.int_tf += mid * f * len;
        pi.int_fh += f * std::pow(std::max(h(mid), 0.0), alpha) * len;
        out.norm_f += std::abs(f) * len;
    }
    return out;
}

std::vector<VertexDiagnostic> vertex_diagnostics(const PiecewiseLinearProfile& h, const SpectralSolution& s) {
    double umax = 0.0;
    for (double v : s.u) {
        umax = std::max(umax, std::abs(v));
    }
    std::vector<VertexDiagnostic> out;
    const auto bps = h.breakpoints();
    for (std::size_t i = 1; i + 1 < bps.size(); ++i) {
        if (std::abs(h.slope(i) - h.slope(i - 1)) <= 1e-12 * std::max(1.0, std::abs(h.slope(i - 1)))) {
            continue;
        }
        const auto it = std::lower_bound(s.grid.begin(), s.grid.end(), bps[i].x);
        if (it == s.grid.end() || *it != bps[i].x) {
            throw ValidationError("vertex_diagnostics: solver grid misses a breakpoint");
        }
        const auto j = static_cast<std::size_t>(it - s.grid.begin());
        const double left = (s.u[j] - s.u[j - 1]) / (s.grid[j] - s.grid[j - 1]);
        const double right = (s.u[j + 1] - s.u[j]) / (s.grid[j + 1] - s.grid[j]);
        out.push_back({bps[i].x, s.u[j], 0.5 * (left + right), std::abs(s.u[j]) / umax});
    }
    return out;
}

std::vector<double> project_concave(std::span<const double> xs, std::vector<double> ys) {
    const std::size_t m = ys.size();
    if (m != xs.size() || m < 2) {
        throw ValidationError("project_concave: need matching abscissae and ordinates (>= 2)");
    }
    std::vector<double> len(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        len[i] = xs[i + 1] - xs[i];
    }
    for (int round = 0; round < 200; ++round) {
        std::vector<double> slopes(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            slopes[i] = (ys[i + 1] - ys[i]) / len[i];
        }
        if (pava_nonincreasing(slopes, len)) {
            // Rebuild with the offset that best matches the old ordinates.
            std::vector<double> cum(m, 0.0);
            for (std::size_t i = 1; i < m; ++i) {
                cum[i] = cum[i - 1] + slopes[i - 1] * len[i - 1];
            }
            double offset = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                offset += ys[i] - cum[i];
            }
            offset /= static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i) {
                ys[i] = offset + cum[i];
            }
        }
        bool clipped = false;
        for (double& y : ys) {
            if (y < 0.0) {
                y = 0.0;
                clipped = true;
            }
        }
        if (!clipped || concave_enough(xs, ys)) {
            break;
        }
    }
    if (!concave_enough(xs, ys)) {
        // Alternation did not settle: lift instead, which keeps the slopes.
        std::vector<double> slopes(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            slopes[i] = (ys[i + 1] - ys[i]) / len[i];
        }
        pava_nonincreasing(slopes, len);
        for (std::size_t i = 1; i < m; ++i) {
            ys[i] = ys[i - 1] + slopes[i - 1] * len[i - 1];
        }
        const double lo = *std::min_element(ys.begin(), ys.end());
        for (double& y : ys) {
            y -= std::min(lo, 0.0);
        }
    }
    const double top = *std::max_element(ys.begin(), ys.end());
    if (!(top > 0.0)) {
        return std::vector<double>(m, 1.0);
    }
    if (top != 1.0) {
        for (double& y : ys) {
            y = std::clamp(y / top, 0.0, 1.0);
        }
    }
    return ys;
}

OptimReport maximize_mu(double alpha, int k, int breakpoints, const PiecewiseLinearProfile& init,
                        const OptimOptions& options) {
    if (!(alpha >= 1.0)) {
        throw DomainError("alpha must be >= 1");
    }
    if (k < 1) {
        throw DomainError("k must be >= 1");
    }
    if (breakpoints < k + 1 || breakpoints < 2) {
        throw DomainError("maximize_mu needs at least k+1 breakpoints");
    }
    if (options.steps < 0 || !(options.initial_step > 0.0)) {
        throw ValidationError("maximize_mu: steps must be >= 0 and the initial step positive");
    }
    const Grading grading = options.grading.value_or(default_grading(alpha));
    const std::size_t m = static_cast<std::size_t>(breakpoints);

    std::vector<double> xs;
    if (init.breakpoints().size() == m) {
        for (const auto& bp : init.breakpoints()) {
            xs.push_back(bp.x);
        }
    } else {
        xs = uniform_abscissae(breakpoints);
    }
    const double min_gap = 0.25 / static_cast<double>(m - 1);
    std::vector<double> ys(m);
    for (std::size_t j = 0; j < m; ++j) {
        ys[j] = init(xs[j]);
    }
    ys = project_concave(xs, std::move(ys));

    const auto evaluate = [&](const std::vector<double>& px, const std::vector<double>& py) {
        auto grid = make_grid(options.n, grading, px);
        std::vector<double> hv(grid.size());
        std::size_t piece = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            while (piece + 2 < px.size() && grid[i] > px[piece + 1]) {
                ++piece;
            }
            const double t = (grid[i] - px[piece]) / (px[piece + 1] - px[piece]);
            hv[i] = std::max(0.0, py[piece] + t * (py[piece + 1] - py[piece]));
        }
        return ShapeSensitivity(std::move(grid), std::move(hv), alpha, k);
    };

    // Ascent direction: d mu / d y_j from hats; d mu / d x_j from -h' hat_j, the
    // exact variation of the interpolant when knot j slides with its value fixed.
    const auto gradient = [&](const ShapeSensitivity& sens, const std::vector<double>& px,
                              const std::vector<double>& py) {
        std::vector<double> g(options.free_abscissae ? 2 * m : m, 0.0);
        const auto grid = sens.grid();
        for (std::size_t j = 0; j < m; ++j) {
            g[j] = sens.directional(sample_perturbation(grid, [&](double x) { return hat(px, j, x); }));
        }
        if (options.free_abscissae) {
            for (std::size_t j = 1; j + 1 < m; ++j) {
                const double left = (py[j] - py[j - 1]) / (px[j] - px[j - 1]);
                const double right = (py[j + 1] - py[j]) / (px[j + 1] - px[j]);
                g[m + j] = sens.directional(sample_perturbation(grid, [&](double x) {
                    const double slope = x < px[j] ? left : (x > px[j] ? right : 0.5 * (left + right));
                    return -slope * hat(px, j, x);
                }));
            }
        }
        return g;
    };

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, 1e-3);
    std::optional<ShapeSensitivity> current;
    for (int attempt = 0; attempt < 6 && !current; ++attempt) {
        try {
            current.emplace(evaluate(xs, ys));
        } catch (const NumericalError&) {
            for (double& y : ys) {
                y += noise(rng);
            }
            ys = project_concave(xs, std::move(ys));
        }
    }
    if (!current) {
        throw NumericalError("maximize_mu: multiple eigenvalue at the initial profile persists after restarts");
    }

    OptimReport report;
    report.alpha = alpha;
    report.k = k;
    report.breakpoints = breakpoints;
    report.trajectory.push_back({0, current->mu(), ys.front(), ys.back(), 0.0});

    // Ordinates and abscissae take alternating steps, each block with its own
    // normalized direction and step length.
    double step_y = options.initial_step;
    double step_x = options.initial_step;
    int restarts = 0;
    const auto line_search = [&](const std::vector<double>& g, std::size_t offset, double& step, bool& multiple) {
        double gnorm = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            gnorm += g[offset + j] * g[offset + j];
        }
        gnorm = std::sqrt(gnorm);
        if (gnorm < options.grad_tol) {
            return false;
        }
        for (int halving = 0; halving <= options.max_halvings; ++halving) {
            std::vector<double> tx = xs;
            std::vector<double> ty = ys;
            if (offset == 0) {
                for (std::size_t j = 0; j < m; ++j) {
                    ty[j] += step * g[j] / gnorm;
                }
            } else {
                for (std::size_t j = 1; j + 1 < m; ++j) {
                    tx[j] += step * g[offset + j] / gnorm;
                }
                tx = separate_abscissae(std::move(tx), min_gap);
            }
            ty = project_concave(tx, std::move(ty));
            try {
                ShapeSensitivity next = evaluate(tx, ty);
                if (next.mu() > current->mu()) {
                    xs = std::move(tx);
                    ys = std::move(ty);
                    current.emplace(std::move(next));
                    return true;
                }
            } catch (const NumericalError&) {
                multiple = true;  // near-multiple eigenvalue at the trial point
            }
            step *= 0.5;
        }
        return false;
    };

    // Fallback when the projected gradient step fails. On straight pieces (e.g. every
    // interior knot of a roof) each single-knot move opens a convex kink next to it,
    // so the projected first-order direction is not an ascent direction; moving one
    // knot at a time and letting the projection re-straighten its neighbours is.
    const auto knot_search = [&](double& step, bool& multiple) {
        for (; step > 1e-6; step *= 0.5) {
            std::optional<ShapeSensitivity> best;
            std::vector<double> best_x;
            std::vector<double> best_y;
            for (std::size_t j = 1; j + 1 < m; ++j) {
                for (double sign : {1.0, -1.0}) {
                    std::vector<double> tx = xs;
                    tx[j] += sign * step;
                    tx = separate_abscissae(std::move(tx), min_gap);
                    std::vector<double> ty = project_concave(tx, ys);
                    try {
                        ShapeSensitivity next = evaluate(tx, ty);
                        if (next.mu() > (best ? best->mu() : current->mu())) {
                            best.emplace(std::move(next));
                            best_x = std::move(tx);
                            best_y = std::move(ty);
                        }
                    } catch (const NumericalError&) {
                        multiple = true;
                    }
                }
            }
            if (best) {
                xs = std::move(best_x);
                ys = std::move(best_y);
                current.emplace(std::move(*best));
                return true;
            }
        }
        return false;
    };

    for (int it = 1; it <= options.steps; ++it) {
        const auto g = gradient(*current, xs, ys);
        double gnorm = 0.0;
        for (double v : g) {
            gnorm += v * v;
        }
        if (std::sqrt(gnorm) < options.grad_tol) {
            report.converged = true;
            break;
        }
        bool multiple = false;
        bool accepted = line_search(g, 0, step_y, multiple);
        if (accepted) {
            step_y = std::min(options.initial_step, 2.0 * step_y);
        } else {
            step_y = options.initial_step;
        }
        if (options.free_abscissae) {
            if (accepted) {
                // Knot step from a fresh gradient at the updated ordinates.
                const auto g2 = gradient(*current, xs, ys);
                if (line_search(g2, m, step_x, multiple)) {
                    step_x = std::min(options.initial_step, 2.0 * step_x);
                } else {
                    step_x = options.initial_step;
                }
            } else if (line_search(g, m, step_x, multiple)) {
                accepted = true;
                step_x = std::min(options.initial_step, 2.0 * step_x);
            } else {
                step_x = options.initial_step;
            }
        }
        if (!accepted && options.free_abscissae) {
            double step = options.initial_step;
            accepted = knot_search(step, multiple);
        }
        if (!accepted) {
            if (multiple && restarts < 3) {
                // Perturbed restart from the current iterate.
                ++restarts;
                std::vector<double> ty = ys;
                for (double& y : ty) {
                    y += noise(rng);
                }
                ty = project_concave(xs, std::move(ty));
                try {
                    ShapeSensitivity next = evaluate(xs, ty);
                    ys = std::move(ty);
                    current.emplace(std::move(next));
                    continue;
                } catch (const NumericalError&) {
                }
            }
            report.converged = true;
            break;
        }
        report.trajectory.push_back({it, current->mu(), ys.front(), ys.back(), step_y});
    }

    report.final_profile = to_profile(xs, ys);
    report.final_mu = current->mu();
    const auto& sol = current->solution();
    report.vertex_diagnostics = vertex_diagnostics(report.final_profile, sol);
    report.piece_integrals = piece_integrals(report.final_profile, alpha, sol).pieces;
    return report;
}

OptimReport maximize_mu(double alpha, int k, int breakpoints, const OptimOptions& options) {
    if (breakpoints < 2) {
        throw DomainError("maximize_mu needs at least 2 breakpoints");
    }
    const auto xs = uniform_abscissae(breakpoints);
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    std::vector<double> ys;
    for (double x : xs) {
        ys.push_back(4.0 * x * (1.0 - x) + jitter(rng));
    }
    ys = project_concave(xs, std::move(ys));
    return maximize_mu(alpha, k, breakpoints, to_profile(xs, ys), options);
}

bool endpoint_check(const OptimReport& report) {
    return report.final_profile(0.0) <= 0.05 && report.final_profile(1.0) <= 0.05;
}

}  // namespace sharpmu
