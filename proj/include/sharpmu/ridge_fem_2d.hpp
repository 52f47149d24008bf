#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "sharpmu/profiles.hpp"

namespace sharpmu {

/// Columns where the profile drops below this are removed from the mesh.
inline constexpr double kClipThreshold = 1e-3;

/// Triangulation of {(x,y): 0 < x < 1, 0 < y < eps h(x)} trimmed to {h >= kClipThreshold}.
struct RidgeMesh {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;  ///< counter-clockwise
    double epsilon = 0.0;
    double diameter = 0.0;      ///< max distance between vertices, over hull vertices
    std::string profile_id;     ///< free-form label of the source profile
    int nx = 0;
    int ny = 0;
    int clipped_columns = 0;    ///< grid columns x = i/nx removed; see build_ridge_mesh

    std::size_t vertex_count() const noexcept { return vertices.size(); }
    double area() const;
};

/// Structured mesh: columns x_i = i/nx, each carrying ny+1 vertices at heights
/// (j/ny) eps h(x_i); every quad is cut into two triangles.
///
/// Since h is concave, {h >= kClipThreshold} is an interval [x_lo, x_hi]. Grid
/// columns outside it are removed, except that the innermost removed column on
/// each side is moved onto x_lo (resp. x_hi) instead of being dropped, so that the
/// trimmed domain keeps its length. clipped_columns counts only the dropped
/// columns, hence vertex_count() == (nx + 1 - clipped_columns) * (ny + 1).
///
/// Preconditions: 0 < eps <= 1, nx >= 64, ny >= 4. Throws ValidationError when h is
/// below the threshold everywhere.
RidgeMesh build_ridge_mesh(const PiecewiseLinearProfile& h, double epsilon, int nx, int ny,
                           std::string profile_id = {});

/// Largest distance between two points of the set, via its convex hull.
double point_set_diameter(const std::vector<std::array<double, 2>>& points);

/// P1 stiffness and mass matrices, natural boundary conditions.
struct SparsePencil2D {
    Eigen::SparseMatrix<double> K;
    Eigen::SparseMatrix<double> M;
    int n = 0;
};

SparsePencil2D assemble_pencil(const RidgeMesh& mesh);

struct NeumannSpectrum {
    std::vector<double> values;     ///< smallest nonzero eigenvalues, ascending
    std::vector<double> residuals;  ///< |Kx - mu Mx| / (|Kx| + mu |Mx|) per value
    int iterations = 0;
};

/// The k_max smallest nonzero eigenvalues (k_max <= 10). Block subspace iteration
/// on (K + M)^{-1} M with the constant vector projected out, Rayleigh-Ritz every
/// sweep, until every residual is <= 1e-8. Throws NumericalError otherwise.
NeumannSpectrum neumann_eigs_2d(const RidgeMesh& mesh, int k_max);
NeumannSpectrum neumann_eigs_2d(const SparsePencil2D& pencil, int k_max);

struct CollapseRow {
    double epsilon;
    double diameter;
    double mu_k;
    double d2mu;
    double target;  ///< mu_k(h) from the 1D solver
    double ratio;   ///< d2mu / target
};

struct CollapseStudy {
    int k = 1;
    int nx = 0;
    int ny = 0;
    double target = 0.0;
    std::vector<CollapseRow> rows;
    bool bound_holds = false;    ///< every d2mu <= target * (1 + kCollapseTolerance)
    bool gap_decreasing = false; ///< |d2mu - target| / target strictly decreases along the rows
};

inline constexpr double kCollapseTolerance = 0.02;

/// D^2 mu_k of the ridge domains for each epsilon (decreasing, each in (0, 0.5]),
/// compared with mu_k(h) computed on n1d nodes.
CollapseStudy collapse_study(const PiecewiseLinearProfile& h, int k, const std::vector<double>& epsilons,
                             int nx = 512, int ny = 8, int n1d = 8192);

/// ASCII listing: counts, then "v x y" lines, then "t i j k" lines (0-based).
void write_mesh(std::ostream& out, const RidgeMesh& mesh);

}  // namespace sharpmu
