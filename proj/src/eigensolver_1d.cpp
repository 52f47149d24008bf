#include "sharpmu/eigensolver_1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "quadrature.hpp"
#include "sharpmu/errors.hpp"

namespace sharpmu {

namespace {

constexpr double kNodalThreshold = 1e-8;
constexpr int kMaxInverseIterations = 50;
constexpr double kResidualTolerance = 1e-9;

// Inverse iteration runs in extended precision: in double, the relative residual of
// even the correctly rounded eigenvector is of order eps |K| / (mu |M|), which
// already exceeds 1e-9 for a few thousand nodes.
using Real = long double;
using RealVec = std::vector<Real>;

RealVec widen(std::span<const double> v) { return RealVec(v.begin(), v.end()); }

Real norm2(const RealVec& v) {
    Real s = 0.0L;
    for (Real x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

Real dot(const RealVec& a, const RealVec& b) {
    Real s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

RealVec tri_multiply(const RealVec& diag, const RealVec& off, const RealVec& x) {
    const std::size_t n = diag.size();
    RealVec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        Real s = diag[i] * x[i];
        if (i > 0) {
            s += off[i - 1] * x[i - 1];
        }
        if (i + 1 < n) {
            s += off[i] * x[i + 1];
        }
        y[i] = s;
    }
    return y;
}

// K u through differences of neighbouring values (K has zero row sums).
RealVec stiffness_multiply(const RealVec& off, const RealVec& x) {
    const std::size_t n = x.size();
    RealVec y(n, 0.0L);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Real flux = -off[i] * (x[i] - x[i + 1]);
        y[i] += flux;
        y[i + 1] -= flux;
    }
    return y;
}

Real stiffness_energy(const RealVec& off, const RealVec& x) {
    Real e = 0.0L;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const Real d = x[i] - x[i + 1];
        e -= off[i] * d * d;
    }
    return e;
}

/// Solves T x = b for symmetric tridiagonal T by LU with partial pivoting
/// (same elimination as LAPACK gttrf/gtts2) on the row-equilibrated system.
/// Rows of degenerate-weight nodes are many orders of magnitude smaller than the
/// rest; without equilibration the pivot choice there is arbitrary and the back
/// substitution amplifies rounding by the ratio of row scales. A vanishing pivot
/// is replaced by a tiny number, which is what inverse iteration wants.
RealVec solve_tridiagonal(RealVec d, const RealVec& off, RealVec b) {
    const std::size_t n = d.size();
    RealVec dl(off);
    RealVec du(off);
    for (std::size_t i = 0; i < n; ++i) {
        Real row = std::abs(d[i]);
        if (i > 0) {
            row += std::abs(off[i - 1]);
        }
        if (i + 1 < n) {
            row += std::abs(off[i]);
        }
        if (row == 0.0L) {
            continue;
        }
        d[i] /= row;
        b[i] /= row;
        if (i > 0) {
            dl[i - 1] /= row;
        }
        if (i + 1 < n) {
            du[i] /= row;
        }
    }
    RealVec du2(n > 2 ? n - 2 : 0, 0.0L);
    std::vector<bool> swapped(n > 0 ? n - 1 : 0, false);
    const Real tiny = std::numeric_limits<Real>::epsilon();

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0L) {
                d[i] = tiny;
            }
            const Real fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            const Real fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            const Real temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = true;
        }
    }
    if (n > 0 && d[n - 1] == 0.0L) {
        d[n - 1] = tiny;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (swapped[i]) {
            std::swap(b[i], b[i + 1]);
        }
        b[i + 1] -= dl[i] * b[i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        Real s = b[ii];
        if (ii + 1 < n) {
            s -= du[ii] * b[ii + 1];
        }
        if (ii + 2 < n) {
            s -= du2[ii] * b[ii + 2];
        }
        b[ii] = s / d[ii];
    }
    return b;
}

/// Number of negative pivots of the LDL^T factorization of K - lambda M, or -1 on breakdown.
int negative_pivots(const TridiagonalPencil& p, double lambda) {
    const std::size_t n = p.size();
    // Pivots smaller than pivmin are replaced by +pivmin (the dstebz guard with the
    // sign chosen for a strict count): an eigenvalue sitting exactly at the shift,
    // e.g. the constant mode of K at lambda = 0, is not counted as below it.
    double bmax = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double b = p.k_off[i] - lambda * p.m_off[i];
        bmax = std::max(bmax, b * b);
    }
    const double pivmin = std::numeric_limits<double>::min() * bmax;
    int count = 0;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = p.k_diag[i] - lambda * p.m_diag[i];
        if (i == 0) {
            d = a;
        } else {
            const double b = p.k_off[i - 1] - lambda * p.m_off[i - 1];
            d = a - b * b / d;
        }
        if (!std::isfinite(d)) {
            return -1;
        }
        if (std::abs(d) < pivmin) {
            d = pivmin;
        }
        if (d < 0.0) {
            ++count;
        }
    }
    return count;
}

void orient(std::vector<double>& u) {
    double umax = 0.0;
    for (double v : u) {
        umax = std::max(umax, std::abs(v));
    }
    for (double v : u) {
        if (std::abs(v) > kNodalThreshold * umax) {
            if (v < 0.0) {
                for (double& x : u) {
                    x = -x;
                }
            }
            return;
        }
    }
}

}  // namespace

TridiagonalPencil assemble(const SampledWeight& w) {
    w.validate();
    const std::size_t n = w.size();
    TridiagonalPencil p;
    p.grid = w.grid;
    p.k_diag.assign(n, 0.0);
    p.m_diag.assign(n, 0.0);
    p.k_off.assign(n - 1, 0.0);
    p.m_off.assign(n - 1, 0.0);
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double len = w.grid[e + 1] - w.grid[e];
        const double w0 = w.values[e];
        const double w1 = w.values[e + 1];
        const double ks = 0.5 * (w0 + w1) / len;
        p.k_diag[e] += ks;
        p.k_diag[e + 1] += ks;
        p.k_off[e] -= ks;
        p.m_diag[e] += len * (3.0 * w0 + w1) / 12.0;
        p.m_diag[e + 1] += len * (w0 + 3.0 * w1) / 12.0;
        p.m_off[e] += len * (w0 + w1) / 12.0;
    }
    return p;
}

int count_below(const TridiagonalPencil& p, double lambda) {
    double shift = lambda;
    for (int attempt = 0; attempt < 4; ++attempt) {
        const int c = negative_pivots(p, shift);
        if (c >= 0) {
            return c;
        }
        shift = lambda + (std::abs(lambda) + 1e-300) * 1e-14 * (attempt + 1) * (attempt % 2 == 0 ? 1 : -1);
    }
    throw NumericalError("count_below: pivot breakdown persists at lambda = " + std::to_string(lambda));
}

double pencil_eigenvalue(const TridiagonalPencil& p, int index, double rel_width) {
    if (index < 0 || static_cast<std::size_t>(index) >= p.size()) {
        throw ResolutionError("eigenvalue index outside the pencil");
    }
    double lo = 0.0;
    if (count_below(p, lo) > index) {
        lo = -1.0;
        while (count_below(p, lo) > index) {
            lo *= 2.0;
        }
    }
    double hi = 1.0;
    while (count_below(p, hi) <= index) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            throw NumericalError("pencil_eigenvalue: no upper bracket");
        }
    }
    while (hi - lo > rel_width * std::abs(hi)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (count_below(p, mid) > index) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SpectralSolution mu_k(const TridiagonalPencil& p, int k) {
    const std::size_t n = p.size();
    if (k < 1) {
        throw DomainError("mu_k: k must be >= 1");
    }
    if (static_cast<std::size_t>(k) > n / 8) {
        throw ResolutionError("mu_k: k = " + std::to_string(k) + " too large for " + std::to_string(n) +
                              " nodes; use at least " + std::to_string(8 * k) + " nodes");
    }
    const double sigma = pencil_eigenvalue(p, k);

    const RealVec ko = widen(p.k_off);
    const RealVec md = widen(p.m_diag), mo = widen(p.m_off);
    const RealVec m_ones = tri_multiply(md, mo, RealVec(n, 1.0L));
    Real ones_mass = 0.0L;
    for (Real v : m_ones) {
        ones_mass += v;
    }

    RealVec v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::cos(k * std::numbers::pi * p.grid[i]) + 1e-3 * std::sin(0.7 + 13.0 * p.grid[i]);
    }
    // The diagonal of K is rebuilt from its off-diagonal in extended precision, so the
    // solve and the residual see the same operator with an exact constant null mode.
    RealVec shifted(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Real left = i > 0 ? ko[i - 1] : 0.0L;
        const Real right = i + 1 < n ? ko[i] : 0.0L;
        shifted[i] = -(left + right) - sigma * md[i];
    }
    RealVec shifted_off(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        shifted_off[i] = ko[i] - sigma * mo[i];
    }

    SpectralSolution s;
    s.k = k;
    s.grid = p.grid;
    Real rayleigh = sigma;
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxInverseIterations; ++it) {
        v = solve_tridiagonal(shifted, shifted_off, tri_multiply(md, mo, v));
        // Remove the constant mode in the M inner product, then M-normalize.
        const Real c = dot(v, m_ones) / ones_mass;
        for (Real& x : v) {
            x -= c;
        }
        RealVec mv = tri_multiply(md, mo, v);
        const Real inv = 1.0L / std::sqrt(dot(v, mv));
        for (std::size_t i = 0; i < n; ++i) {
            v[i] *= inv;
            mv[i] *= inv;
        }
        const RealVec kv = stiffness_multiply(ko, v);
        rayleigh = stiffness_energy(ko, v);
        RealVec r(n);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = kv[i] - rayleigh * mv[i];
        }
        const double next = static_cast<double>(norm2(r) / (norm2(kv) + std::abs(rayleigh) * norm2(mv)));
        const bool stalled = it >= 2 && next > 0.5 * residual;
        residual = next;
        if (residual <= 1e-14 || (stalled && residual <= kResidualTolerance)) {
            break;
        }
    }
    if (!(residual <= kResidualTolerance)) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "mu_k: inverse iteration did not converge, residual %.3e", residual);
        throw NumericalError(msg);
    }
    std::vector<double> u(v.begin(), v.end());
    orient(u);
    s.mu = static_cast<double>(rayleigh);
    s.u = std::move(u);
    s.residual = residual;
    s.nodal_intervals = nodal_intervals(s.u);
    return s;
}

SpectralSolution mu_k(const SampledWeight& w, int k) { return mu_k(assemble(w), k); }

int nodal_intervals(std::span<const double> u) {
    double umax = 0.0;
    for (double v : u) {
        umax = std::max(umax, std::abs(v));
    }
    if (umax == 0.0) {
        return 0;
    }
    int runs = 0;
    int sign = 0;
    for (double v : u) {
        if (std::abs(v) < kNodalThreshold * umax) {
            continue;
        }
        const int sv = v > 0.0 ? 1 : -1;
        if (sv != sign) {
            ++runs;
            sign = sv;
        }
    }
    return runs;
}

int nodal_intervals(const SpectralSolution& s) { return nodal_intervals(s.u); }

std::vector<double> weight_sensitivity(const SampledWeight& w, const SpectralSolution& s) {
    const std::size_t n = w.size();
    if (s.u.size() != n) {
        throw ValidationError("weight_sensitivity: solution and weight live on different grids");
    }
    std::vector<double> g(n, 0.0);
    const auto& u = s.u;
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double len = w.grid[e + 1] - w.grid[e];
        const double du = u[e + 1] - u[e];
        const double stiff = 0.5 * du * du / len;
        const double cross = 2.0 * u[e] * u[e + 1];
        g[e] += stiff - s.mu * len / 12.0 * (3.0 * u[e] * u[e] + cross + u[e + 1] * u[e + 1]);
        g[e + 1] += stiff - s.mu * len / 12.0 * (u[e] * u[e] + cross + 3.0 * u[e + 1] * u[e + 1]);
    }
    return g;
}

double polynomial_upper_bound(const SampledWeight& w, int k) {
    w.validate();
    if (k < 1) {
        throw DomainError("polynomial_upper_bound: k must be >= 1");
    }
    if (k > 12) {
        throw NumericalError("polynomial_upper_bound: monomial basis too ill-conditioned for k > 12; use a smaller k");
    }
    // Moments m_p = int w x^p, p = 0..2k, exact for the P1 weight.
    const int pmax = 2 * k;
    const auto rule = detail::gauss_legendre((pmax + 2) / 2 + 1);
    std::vector<long double> mom(pmax + 1, 0.0L);
    for (std::size_t e = 0; e + 1 < w.size(); ++e) {
        const double x0 = w.grid[e];
        const double len = w.grid[e + 1] - x0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = 0.5 * (rule.nodes[q] + 1.0);
            const double x = x0 + t * len;
            const double wx = w.values[e] + (w.values[e + 1] - w.values[e]) * t;
            long double term = 0.5L * len * rule.weights[q] * wx;
            for (int pw = 0; pw <= pmax; ++pw) {
                mom[pw] += term;
                term *= x;
            }
        }
    }
    Eigen::MatrixXd stiff(k, k);
    Eigen::MatrixXd mass(k, k);
    for (int i = 1; i <= k; ++i) {
        for (int j = 1; j <= k; ++j) {
            stiff(i - 1, j - 1) = static_cast<double>(i * j * mom[i + j - 2]);
            mass(i - 1, j - 1) = static_cast<double>(mom[i + j] - mom[i] * mom[j] / mom[0]);
        }
    }
    const Eigen::VectorXd dinv = mass.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = dinv.asDiagonal() * mass * dinv.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(scaled, Eigen::EigenvaluesOnly);
    const double lmin = gram.eigenvalues().minCoeff();
    const double lmax = gram.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e13) {
        throw NumericalError("polynomial_upper_bound: Gram matrix ill-conditioned; use a smaller k");
    }
    const Eigen::MatrixXd a = dinv.asDiagonal() * stiff * dinv.asDiagonal();
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(a, scaled, Eigen::EigenvaluesOnly);
    return ritz.eigenvalues().maxCoeff();
}

}  // namespace sharpmu
