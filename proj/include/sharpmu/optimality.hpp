#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sharpmu/eigensolver_1d.hpp"
#include "sharpmu/profiles.hpp"

namespace sharpmu {

/// Direction of a profile perturbation, sampled at the nodes of the solver grid.
struct Perturbation {
    std::vector<double> values;
};

Perturbation sample_perturbation(std::span<const double> grid, const std::function<double(double)>& phi);

/// Hat function equal to 1 at abscissae[j] and 0 at the other abscissae.
double hat(std::span<const double> abscissae, std::size_t j, double x);

/// Derivative of mu_k(h^alpha) with respect to the nodal values of h, for one
/// solve. Holds the eigenpair so that many directions can be evaluated cheaply:
///
///   d mu[phi] = alpha * int (u'^2 - mu u^2) h^{alpha-1} phi dx,   int h^alpha u^2 = 1,
///
/// evaluated with the same element integrals as the assembly, so the value is
/// the exact derivative of the discrete eigenvalue.
class ShapeSensitivity {
public:
    /// Throws NumericalError when mu_k is not simple (relative gap <= 1e-6).
    ShapeSensitivity(std::vector<double> grid, std::vector<double> h_nodes, double alpha, int k);

    double mu() const noexcept { return solution_.mu; }
    const SpectralSolution& solution() const noexcept { return solution_; }
    std::span<const double> grid() const noexcept { return weight_.grid; }
    std::span<const double> profile_values() const noexcept { return h_; }
    double alpha() const noexcept { return alpha_; }

    double directional(const Perturbation& phi) const;
    double directional(const std::function<double(double)>& phi) const;

private:
    std::vector<double> h_;
    double alpha_;
    SampledWeight weight_;
    SpectralSolution solution_;
    std::vector<double> node_gradient_;  // d mu / d h_i
};

inline constexpr double kSimpleGap = 1e-6;

double eigen_derivative(const PiecewiseLinearProfile& h, double alpha, int k,
                        const std::function<double(double)>& phi, int n, Grading grading = Grading::uniform);

/// f = u'^2 - mu u^2 at element midpoints and its sign changes inside each nodal interval of u.
struct SwitchingFunction {
    std::vector<double> midpoints;
    std::vector<double> values;
    std::vector<int> changes_per_interval;  ///< first and last entries are the boundary intervals
    int total_changes = 0;
};

SwitchingFunction switching_function(const SpectralSolution& s);

/// Integrals of f, t f and f h^alpha over one maximal affine piece of the profile.
struct PieceIntegral {
    double x_begin;
    double x_end;
    double int_f;
    double int_tf;
    double int_fh;
    bool internal;  ///< piece touches neither 0 nor 1
};

struct PieceIntegrals {
    std::vector<PieceIntegral> pieces;
    double norm_f;  ///< int |f| over [0,1]
};

/// Midpoint sums over the elements of s.grid. The grid must contain every breakpoint of h.
PieceIntegrals piece_integrals(const PiecewiseLinearProfile& h, double alpha, const SpectralSolution& s);

struct VertexDiagnostic {
    double x;
    double u;
    double du;
    double u_relative;  ///< |u(x)| / max |u|
};

/// u and u' (average of the adjacent element slopes) at the interior kinks of h.
std::vector<VertexDiagnostic> vertex_diagnostics(const PiecewiseLinearProfile& h, const SpectralSolution& s);

/// Projection used by the optimizer: nonincreasing slopes (pool-adjacent-violators on
/// the slopes, weighted by segment length) alternated with clipping at 0, then scaling
/// to unit maximum. A concave input in [0,1] with unit maximum is returned unchanged.
std::vector<double> project_concave(std::span<const double> xs, std::vector<double> ys);

struct OptimOptions {
    int n = 2048;
    std::optional<Grading> grading;  ///< defaults to endpoint_graded for alpha > 2
    int steps = 200;
    double initial_step = 0.1;
    int max_halvings = 30;
    double grad_tol = 1e-7;
    std::uint64_t seed = 0;
    /// Also move the interior abscissae (kept sorted, at least 1/(4(M-1)) apart).
    /// With frozen equally spaced abscissae the optimal kinks are generally not
    /// representable, e.g. alpha = 1, k = 2, M = 9 stalls at 98% of the optimum.
    bool free_abscissae = true;
};

struct TrajectoryPoint {
    int iteration;
    double mu;
    double h0;
    double h1;
    double step;
};

struct OptimReport {
    double alpha = 1.0;
    int k = 1;
    int breakpoints = 0;
    std::vector<TrajectoryPoint> trajectory;  ///< entry 0 is the projected initial profile
    PiecewiseLinearProfile final_profile{{{0.0, 1.0}, {1.0, 1.0}}};
    double final_mu = 0.0;
    std::vector<VertexDiagnostic> vertex_diagnostics;
    std::vector<PieceIntegral> piece_integrals;
    bool converged = false;
};

/// Projected gradient ascent of mu_k(h^alpha) over the ordinates (and, by default,
/// the interior abscissae) of a profile with `breakpoints` knots. The knots start
/// at the breakpoints of `init` when it has exactly that many, else equally spaced.
OptimReport maximize_mu(double alpha, int k, int breakpoints, const PiecewiseLinearProfile& init,
                        const OptimOptions& options = {});

/// Same, starting from a seeded perturbation of 4x(1-x).
OptimReport maximize_mu(double alpha, int k, int breakpoints, const OptimOptions& options = {});

/// Final profile vanishes (to 0.05) at both endpoints.
bool endpoint_check(const OptimReport& report);

}  // namespace sharpmu
