#pragma once

#include <span>
#include <vector>

#include "sharpmu/profiles.hpp"

namespace sharpmu {

/// Stiffness/mass pair of the weighted P1 discretization of
///   -(w u')' = mu w u  on (0,1),  natural boundary conditions.
/// Both matrices are symmetric tridiagonal: `*_diag` has n entries,
/// `*_off` has n-1 (entry i couples nodes i and i+1).
struct TridiagonalPencil {
    std::vector<double> k_diag, k_off;
    std::vector<double> m_diag, m_off;
    std::vector<double> grid;

    std::size_t size() const noexcept { return k_diag.size(); }
};

/// One eigenpair of the pencil plus diagnostics.
struct SpectralSolution {
    double mu = 0.0;
    int k = 0;
    std::vector<double> u;  ///< nodal values, u^T M u = 1, M-orthogonal to constants
    double residual = 0.0;  ///< |Ku - mu Mu| / (|Ku| + mu |Mu|)
    int nodal_intervals = 0;
    std::vector<double> grid;
};

/// Element matrices are integrated exactly for the P1 interpolant of the weight
/// (the result coincides with 2-point Gauss quadrature of the cubic integrands).
/// Throws ValidationError for an identically zero weight.
TridiagonalPencil assemble(const SampledWeight& w);

/// Number of pencil eigenvalues strictly below lambda (Sylvester inertia of K - lambda M).
int count_below(const TridiagonalPencil& p, double lambda);

/// Eigenvalue number `index` of the pencil counted from 0 (index 0 is the constant
/// mode, eigenvalue 0), by inertia bisection to relative width `rel_width`.
double pencil_eigenvalue(const TridiagonalPencil& p, int index, double rel_width = 1e-10);

/// k-th nonzero relaxed eigenvalue, k >= 1. The constant mode is excluded by index.
/// Throws ResolutionError when k > n/8.
SpectralSolution mu_k(const SampledWeight& w, int k);
SpectralSolution mu_k(const TridiagonalPencil& p, int k);

/// Maximal sign-constant runs of nodal values, ignoring |u_i| < 1e-8 max|u|.
int nodal_intervals(std::span<const double> u);
int nodal_intervals(const SpectralSolution& s);

/// d mu / d W_j for every nodal weight value W_j of the pencil the solution came from.
/// Exact derivative of the discrete eigenvalue (simple eigenvalue assumed).
std::vector<double> weight_sensitivity(const SampledWeight& w, const SpectralSolution& s);

/// Rayleigh-Ritz value over span{x^i - (int t^i w)/(int w), i = 1..k}: an upper bound
/// for mu_k(w). Integrals are exact for the P1 interpolant of the weight.
/// Throws NumericalError when the Gram matrix is too ill-conditioned (suggests smaller k).
double polynomial_upper_bound(const SampledWeight& w, int k);

}  // namespace sharpmu
