#pragma once

#include <span>
#include <vector>

namespace sharpmu {

struct Breakpoint {
    double x;
    double y;
};

/// Concave piecewise-affine function on [0,1] with values in [0,1].
///
/// The breakpoints are the single source of truth; evaluation at other
/// abscissae is by linear interpolation. A profile flagged `normalized`
/// additionally satisfies max y = 1, i.e. it belongs to the class of
/// concave functions [0,1] -> [0,1] with unit maximum.
class PiecewiseLinearProfile {
public:
    /// Validating constructor; see make_profile.
    PiecewiseLinearProfile(std::vector<Breakpoint> points, bool normalized = true);

    double operator()(double x) const;

    std::span<const Breakpoint> breakpoints() const noexcept { return points_; }
    bool normalized() const noexcept { return normalized_; }
    double max_value() const noexcept;

    /// Slope of the affine piece [x_i, x_{i+1}].
    double slope(std::size_t piece) const;
    std::size_t piece_count() const noexcept { return points_.size() - 1; }

private:
    std::vector<Breakpoint> points_;
    bool normalized_;
};

/// Tolerance on concavity violations; smaller slope increases are flattened.
inline constexpr double kConcavityTolerance = 1e-12;

/// Builds and validates a profile. Throws ValidationError naming the first
/// offending breakpoint when the endpoints, range or concavity are violated.
PiecewiseLinearProfile make_profile(std::vector<Breakpoint> points, bool normalized = true);

/// The maximizer of mu_k(h^alpha) over the normalized concave class.
///
///   alpha < 2, k = 1      roof with peak 1/2
///   alpha < 2, k >= 2     symmetric trapezoid with plateau [x_a, 1 - x_a],
///                         x_a = j / (2 j + (k-1) pi), j = j_{(alpha-1)/2, 1}
///   alpha > 2, k odd      roof with peak 1/2
///   alpha > 2, k even     asymmetric roof, peak j_{nu,k/2} / (j_{nu,k/2} + j_{nu,k/2+1})
///   alpha = 2             not unique; see alpha2_family_abscissae. The returned
///                         representative is the roof (k odd) or the roof with
///                         peak (k/2)/(k+1) (k even).
PiecewiseLinearProfile optimal_profile(double alpha, int k);

/// For alpha = 2 every profile vanishing at 0 and 1 whose kinks sit on a subset of
/// {i/(k+1), i = 1..k} is a maximizer. Returns that candidate set.
std::vector<double> alpha2_family_abscissae(int k);

enum class Grading { uniform, endpoint_graded };

/// Weight values on a strictly increasing grid containing 0 and 1.
struct SampledWeight {
    std::vector<double> grid;
    std::vector<double> values;
    double exponent = 1.0;  ///< alpha used to build the weight (provenance only)

    std::size_t size() const noexcept { return grid.size(); }
    /// Throws ValidationError on negative values, all-zero values or a bad grid.
    void validate() const;
};

/// Grid of n nodes (uniform or with a quadratic clustering at both ends) with
/// the given extra abscissae inserted.
std::vector<double> make_grid(int n, Grading grading, std::span<const double> must_include = {});

/// h(x)^alpha at the nodes of a grid built from n, grading and the breakpoints of h.
SampledWeight sample_weight(const PiecewiseLinearProfile& h, double alpha, int n,
                            Grading grading = Grading::uniform);

/// h(x)^alpha sampled on a caller-supplied grid.
SampledWeight sample_weight_on(const PiecewiseLinearProfile& h, double alpha, std::vector<double> grid);

/// Parameters of the exponential-foot profile g_a.
struct ExpProfile {
    double a;
    double w;
};

/// g_a(x): exp(2w(x-a)) on [0,a), 1 on [a,1-a], exp(2w(1-x-a)) on (1-a,1].
double exp_profile_value(const ExpProfile& p, double x);

/// g_a sampled on a uniform grid of n nodes that contains a and 1-a.
SampledWeight exp_profile(double a, double w, int n = 4096);

}  // namespace sharpmu
