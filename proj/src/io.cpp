#include "sharpmu/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "sharpmu/errors.hpp"

namespace sharpmu::io {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json to_json(const PiecewiseLinearProfile& h) {
    json pts = json::array();
    for (const auto& bp : h.breakpoints()) {
        pts.push_back({bp.x, bp.y});
    }
    return {{"breakpoints", pts}, {"normalized", h.normalized()}};
}

PiecewiseLinearProfile profile_from_json(const json& j) {
    if (!j.is_object() || !j.contains("breakpoints") || !j["breakpoints"].is_array()) {
        throw ValidationError("profile JSON needs a \"breakpoints\" array");
    }
    std::vector<Breakpoint> pts;
    for (const auto& p : j["breakpoints"]) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw ValidationError("profile JSON: each breakpoint must be [x, y]");
        }
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    bool normalized = true;
    if (j.contains("normalized")) {
        if (!j["normalized"].is_boolean()) {
            throw ValidationError("profile JSON: \"normalized\" must be a boolean");
        }
        normalized = j["normalized"].get<bool>();
    }
    return make_profile(std::move(pts), normalized);
}

PiecewiseLinearProfile read_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open profile file " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("profile file " + path + ": " + e.what());
    }
    return profile_from_json(j);
}

void write_profile(const std::string& path, const PiecewiseLinearProfile& h) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write " + path);
    }
    out << to_json(h).dump(2) << '\n';
}

std::string to_string(Grading g) { return g == Grading::uniform ? "uniform" : "endpoint_graded"; }

Grading parse_grading(const std::string& s) {
    if (s == "uniform") {
        return Grading::uniform;
    }
    if (s == "endpoint_graded" || s == "graded") {
        return Grading::endpoint_graded;
    }
    throw ValidationError("unknown grading '" + s + "' (uniform | endpoint_graded)");
}

json to_json(const BoundValue& b) {
    return {{"alpha", b.alpha}, {"k", b.k}, {"value", b.value}, {"branch", std::string(to_string(b.branch))}};
}

json to_json(const BoundCheck& c) {
    return {{"alpha", c.alpha}, {"k", c.k},       {"mu", c.mu}, {"bound", c.bound},
            {"ratio", c.ratio}, {"pass", c.pass}, {"n", c.n},   {"grading", to_string(c.grading)}};
}

json summary_json(const SpectralSolution& s) {
    return {{"mu", s.mu},
            {"k", s.k},
            {"residual", s.residual},
            {"nodal_intervals", s.nodal_intervals},
            {"nodes", s.grid.size()}};
}

json to_json(const OptimReport& r) {
    json traj = json::array();
    for (const auto& t : r.trajectory) {
        traj.push_back({{"iteration", t.iteration}, {"mu", t.mu}, {"h0", t.h0}, {"h1", t.h1}, {"step", t.step}});
    }
    json verts = json::array();
    for (const auto& v : r.vertex_diagnostics) {
        verts.push_back({{"x", v.x}, {"u", v.u}, {"du", v.du}, {"u_relative", v.u_relative}});
    }
    json pieces = json::array();
    for (const auto& p : r.piece_integrals) {
        pieces.push_back({{"x_begin", p.x_begin},
                          {"x_end", p.x_end},
                          {"int_f", p.int_f},
                          {"int_tf", p.int_tf},
                          {"int_fh", p.int_fh},
                          {"internal", p.internal}});
    }
    return {{"alpha", r.alpha},
            {"k", r.k},
            {"breakpoints", r.breakpoints},
            {"final_mu", r.final_mu},
            {"converged", r.converged},
            {"final_profile", to_json(r.final_profile)},
            {"trajectory", traj},
            {"vertex_diagnostics", verts},
            {"piece_integrals", pieces}};
}

json to_json(const CollapseStudy& s) {
    json rows = json::array();
    for (const auto& r : s.rows) {
        rows.push_back({{"epsilon", r.epsilon},
                        {"D", r.diameter},
                        {"mu_k", r.mu_k},
                        {"D2mu", r.d2mu},
                        {"target", r.target},
                        {"ratio", r.ratio}});
    }
    return {{"k", s.k},
            {"nx", s.nx},
            {"ny", s.ny},
            {"target", s.target},
            {"bound_holds", s.bound_holds},
            {"gap_decreasing", s.gap_decreasing},
            {"rows", rows}};
}

json to_json(const UnboundedRow& r) {
    return {{"a", r.a},         {"w_a", r.w_a},     {"w_a2", r.w_a2},
            {"fem_mu", r.fem_mu}, {"lower", r.lower}, {"upper", r.upper},
            {"inside_bracket", r.inside_bracket}};
}

void write_collapse_csv(std::ostream& out, const CollapseStudy& s) {
    out << "epsilon,D,mu_k,D2mu,target,ratio\n";
    for (const auto& r : s.rows) {
        out << format_double(r.epsilon) << ',' << format_double(r.diameter) << ',' << format_double(r.mu_k) << ','
            << format_double(r.d2mu) << ',' << format_double(r.target) << ',' << format_double(r.ratio) << '\n';
    }
}

void write_unbounded_csv(std::ostream& out, const std::vector<UnboundedRow>& rows) {
    out << "a,w_a,w_a2,fem_mu,lower,upper\n";
    for (const auto& r : rows) {
        out << format_double(r.a) << ',' << format_double(r.w_a) << ',' << format_double(r.w_a2) << ','
            << format_double(r.fem_mu) << ',' << format_double(r.lower) << ',' << format_double(r.upper) << '\n';
    }
}

}  // namespace sharpmu::io
