#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sharpmu/eigensolver_1d.hpp"
#include "sharpmu/optimality.hpp"
#include "sharpmu/profiles.hpp"
#include "sharpmu/ridge_fem_2d.hpp"
#include "sharpmu/sharp_bounds.hpp"

namespace sharpmu::io {

using nlohmann::json;

/// {"breakpoints": [[x, y], ...], "normalized": bool}
json to_json(const PiecewiseLinearProfile& h);
PiecewiseLinearProfile profile_from_json(const json& j);
PiecewiseLinearProfile read_profile(const std::string& path);
void write_profile(const std::string& path, const PiecewiseLinearProfile& h);

std::string to_string(Grading g);
Grading parse_grading(const std::string& s);

json to_json(const BoundValue& b);
/// {alpha, k, mu, bound, ratio, pass, n, grading}
json to_json(const BoundCheck& c);
/// Summary without the nodal vector: mu, k, residual, nodal_intervals, n.
json summary_json(const SpectralSolution& s);
json to_json(const OptimReport& r);
json to_json(const CollapseStudy& s);
json to_json(const UnboundedRow& r);

/// Header plus one line per row; numbers with 17 significant digits.
void write_collapse_csv(std::ostream& out, const CollapseStudy& s);
void write_unbounded_csv(std::ostream& out, const std::vector<UnboundedRow>& rows);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

}  // namespace sharpmu::io
