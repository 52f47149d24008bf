#include "sharpmu/ridge_fem_2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "sharpmu/eigensolver_1d.hpp"
#include "sharpmu/errors.hpp"

namespace sharpmu {

namespace {

constexpr double kMinTriangleArea = 1e-14;
constexpr double kEigenResidual = 1e-8;
constexpr int kMaxSweeps = 500;

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// End of the clipped interval on one side of the peak; h is monotone there.
double clip_abscissa(const PiecewiseLinearProfile& h, double inside, double outside) {
    for (int i = 0; i < 200 && std::abs(inside - outside) > 1e-15; ++i) {
        const double mid = 0.5 * (inside + outside);
        (h(mid) >= kClipThreshold ? inside : outside) = mid;
    }
    return inside;
}

}  // namespace

double RidgeMesh::area() const {
    double a = 0.0;
    for (const auto& t : triangles) {
        a += 0.5 * cross(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    }
    return a;
}

double point_set_diameter(const std::vector<std::array<double, 2>>& points) {
    std::vector<std::array<double, 2>> pts(points);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2) {
        return 0.0;
    }
    // Andrew's monotone chain.
    std::vector<std::array<double, 2>> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) {
            --k;
        }
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) {
            --k;
        }
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    double best = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
            best = std::max(best, std::hypot(hull[i][0] - hull[j][0], hull[i][1] - hull[j][1]));
        }
    }
    if (hull.size() < 2) {
        // Collinear input collapses to its two extreme points.
        best = std::hypot(pts.front()[0] - pts.back()[0], pts.front()[1] - pts.back()[1]);
    }
    return best;
}

RidgeMesh build_ridge_mesh(const PiecewiseLinearProfile& h, double epsilon, int nx, int ny, std::string profile_id) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw ValidationError("build_ridge_mesh: epsilon must lie in (0, 1]");
    }
    if (nx < 64 || ny < 4) {
        throw ValidationError("build_ridge_mesh: need nx >= 64 and ny >= 4");
    }
    double peak = 0.0;
    double top = -1.0;
    for (const auto& bp : h.breakpoints()) {
        if (bp.y > top) {
            top = bp.y;
            peak = bp.x;
        }
    }
    if (top < kClipThreshold) {
        throw ValidationError("build_ridge_mesh: profile is below the clip threshold everywhere");
    }
    const double x_lo = h(0.0) >= kClipThreshold ? 0.0 : clip_abscissa(h, peak, 0.0);
    const double x_hi = h(1.0) >= kClipThreshold ? 1.0 : clip_abscissa(h, peak, 1.0);

    std::vector<double> columns;
    int first = -1;
    int last = -1;
    for (int i = 0; i <= nx; ++i) {
        const double x = static_cast<double>(i) / nx;
        if (x >= x_lo && x <= x_hi) {
            if (first < 0) {
                first = i;
            }
            last = i;
        }
    }
    int dropped = 0;
    if (first < 0) {
        // The kept interval falls between two grid columns: both neighbours move.
        first = static_cast<int>(std::floor(x_lo * nx)) + 1;
        last = first - 1;
    }
    const auto grid_x = [nx](int i) { return static_cast<double>(i) / nx; };
    if (first > 0 && grid_x(first) - x_lo > 1e-9) {
        columns.push_back(x_lo);
        dropped += first - 1;
    } else {
        dropped += first;
    }
    for (int i = first; i <= last; ++i) {
        columns.push_back(grid_x(i));
    }
    if (last < nx && x_hi - grid_x(last) > 1e-9) {
        columns.push_back(x_hi);
        dropped += nx - last - 1;
    } else {
        dropped += nx - last;
    }
    if (columns.size() < 2) {
        throw ValidationError("build_ridge_mesh: clipped profile leaves fewer than two columns");
    }

    RidgeMesh mesh;
    mesh.epsilon = epsilon;
    mesh.nx = nx;
    mesh.ny = ny;
    mesh.profile_id = std::move(profile_id);
    mesh.clipped_columns = dropped;
    const int rows = ny + 1;
    for (double x : columns) {
        const double height = epsilon * h(x);
        for (int j = 0; j <= ny; ++j) {
            mesh.vertices.push_back({x, height * static_cast<double>(j) / ny});
        }
    }
    const auto id = [rows](std::size_t c, int j) { return static_cast<int>(c) * rows + j; };
    for (std::size_t c = 0; c + 1 < columns.size(); ++c) {
        for (int j = 0; j < ny; ++j) {
            const int a = id(c, j);
            const int b = id(c + 1, j);
            const int d = id(c + 1, j + 1);
            const int e = id(c, j + 1);
            for (const auto& t : {std::array<int, 3>{a, b, d}, std::array<int, 3>{a, d, e}}) {
                if (0.5 * cross(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) > kMinTriangleArea) {
                    mesh.triangles.push_back(t);
                }
            }
        }
    }
    mesh.diameter = point_set_diameter(mesh.vertices);
    return mesh;
}

SparsePencil2D assemble_pencil(const RidgeMesh& mesh) {
    const int n = static_cast<int>(mesh.vertices.size());
    std::vector<Eigen::Triplet<double>> kt;
    std::vector<Eigen::Triplet<double>> mt;
    kt.reserve(9 * mesh.triangles.size());
    mt.reserve(9 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const auto& p0 = mesh.vertices[t[0]];
        const auto& p1 = mesh.vertices[t[1]];
        const auto& p2 = mesh.vertices[t[2]];
        const double area = 0.5 * cross(p0, p1, p2);
        const double b[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
        const double c[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                kt.emplace_back(t[i], t[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
                mt.emplace_back(t[i], t[j], area / 12.0 * (i == j ? 2.0 : 1.0));
            }
        }
    }
    SparsePencil2D p;
    p.n = n;
    p.K.resize(n, n);
    p.M.resize(n, n);
    p.K.setFromTriplets(kt.begin(), kt.end());
    p.M.setFromTriplets(mt.begin(), mt.end());
    return p;
}

NeumannSpectrum neumann_eigs_2d(const SparsePencil2D& pencil, int k_max) {
    if (k_max < 1 || k_max > 10) {
        throw ValidationError("neumann_eigs_2d: k_max must be in 1..10");
    }
    const int n = pencil.n;
    const int block = std::min(n - 1, k_max + std::max(4, k_max));
    if (block < k_max) {
        throw ResolutionError("neumann_eigs_2d: mesh too small for the requested eigenvalues");
    }
    // Shift by -1: K + M is positive definite.
    const Eigen::SparseMatrix<double> shifted = pencil.K + pencil.M;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("neumann_eigs_2d: factorization of K + M failed");
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd m_ones = pencil.M * ones;
    const double ones_mass = ones.dot(m_ones);

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd x(n, block);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < block; ++j) {
            x(i, j) = unif(rng);
        }
    }

    NeumannSpectrum out;
    Eigen::VectorXd residuals = Eigen::VectorXd::Constant(k_max, 1.0);
    Eigen::VectorXd theta;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
        Eigen::MatrixXd y = solver.solve(pencil.M * x);
        // Deflate the constant mode, then M-orthonormalize by Cholesky of the Gram matrix.
        for (int j = 0; j < block; ++j) {
            y.col(j) -= (m_ones.dot(y.col(j)) / ones_mass) * ones;
        }
        Eigen::MatrixXd gram = y.transpose() * (pencil.M * y);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(gram);
        const Eigen::VectorXd gv = gram_eig.eigenvalues();
        const double floor = 1e-14 * gv.maxCoeff();
        Eigen::MatrixXd basis = gram_eig.eigenvectors();
        for (int j = 0; j < block; ++j) {
            basis.col(j) /= std::sqrt(std::max(gv(j), floor));
        }
        y = y * basis;
        const Eigen::MatrixXd ky = pencil.K * y;
        const Eigen::MatrixXd my = pencil.M * y;
        Eigen::MatrixXd a = y.transpose() * ky;
        Eigen::MatrixXd b = y.transpose() * my;
        a = 0.5 * (a + a.transpose());
        b = 0.5 * (b + b.transpose());
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(a, b);
        if (ritz.info() != Eigen::Success) {
            throw NumericalError("neumann_eigs_2d: Rayleigh-Ritz step failed");
        }
        theta = ritz.eigenvalues();
        const Eigen::MatrixXd& v = ritz.eigenvectors();
        x = y * v;
        const Eigen::MatrixXd kx = ky * v;
        const Eigen::MatrixXd mx = my * v;
        for (int j = 0; j < k_max; ++j) {
            const double mu = theta(j);
            const Eigen::VectorXd r = kx.col(j) - mu * mx.col(j);
            residuals(j) = r.norm() / (kx.col(j).norm() + std::abs(mu) * mx.col(j).norm());
        }
        out.iterations = sweep;
        if (residuals.maxCoeff() <= kEigenResidual) {
            break;
        }
    }
    if (!(residuals.maxCoeff() <= kEigenResidual)) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "neumann_eigs_2d: no convergence after %d sweeps, residual %.3e", kMaxSweeps,
                      residuals.maxCoeff());
        throw NumericalError(msg);
    }
    for (int j = 0; j < k_max; ++j) {
        out.values.push_back(theta(j));
        out.residuals.push_back(residuals(j));
    }
    if (!(out.values.front() > 1e-8)) {
        throw NumericalError("neumann_eigs_2d: constant mode leaked through the deflation");
    }
    return out;
}

NeumannSpectrum neumann_eigs_2d(const RidgeMesh& mesh, int k_max) {
    return neumann_eigs_2d(assemble_pencil(mesh), k_max);
}

CollapseStudy collapse_study(const PiecewiseLinearProfile& h, int k, const std::vector<double>& epsilons, int nx,
                             int ny, int n1d) {
    if (k < 1 || k > 10) {
        throw ValidationError("collapse_study: k must be in 1..10");
    }
    if (epsilons.empty()) {
        throw ValidationError("collapse_study: empty epsilon list");
    }
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0 && epsilons[i] <= 0.5)) {
            throw ValidationError("collapse_study: every epsilon must lie in (0, 0.5]");
        }
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
            throw ValidationError("collapse_study: epsilons must be strictly decreasing");
        }
    }
    CollapseStudy study;
    study.k = k;
    study.nx = nx;
    study.ny = ny;
    study.target = mu_k(sample_weight(h, 1.0, n1d), k).mu;
    study.bound_holds = true;
    study.gap_decreasing = true;
    double previous_gap = std::numeric_limits<double>::infinity();
    for (double eps : epsilons) {
        const auto mesh = build_ridge_mesh(h, eps, nx, ny);
        const double mu = neumann_eigs_2d(mesh, k).values.at(k - 1);
        const double d2mu = mesh.diameter * mesh.diameter * mu;
        study.rows.push_back({eps, mesh.diameter, mu, d2mu, study.target, d2mu / study.target});
        if (d2mu > study.target * (1.0 + kCollapseTolerance)) {
            study.bound_holds = false;
        }
        const double gap = std::abs(d2mu - study.target) / study.target;
        if (!(gap < previous_gap)) {
            study.gap_decreasing = false;
        }
        previous_gap = gap;
    }
    return study;
}

void write_mesh(std::ostream& out, const RidgeMesh& mesh) {
    char line[96];
    out << "# ridge mesh epsilon " << mesh.epsilon << " nx " << mesh.nx << " ny " << mesh.ny << '\n';
    out << mesh.vertices.size() << ' ' << mesh.triangles.size() << '\n';
    for (const auto& v : mesh.vertices) {
        std::snprintf(line, sizeof line, "v %.17g %.17g\n", v[0], v[1]);
        out << line;
    }
    for (const auto& t : mesh.triangles) {
        out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
}

}  // namespace sharpmu
