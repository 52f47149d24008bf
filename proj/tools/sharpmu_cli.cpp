// sharpmu: command-line front end.
//
// Every subcommand prints a document that contains its fully resolved
// configuration, so a run can be repeated exactly. Exit codes: 0 ok,
// 2 invalid input, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sharpmu/errors.hpp"
#include "sharpmu/io.hpp"

namespace {

using namespace sharpmu;
using io::json;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Output {
    std::string format = "pretty";
    std::string path;
};

// A finished run: the JSON document, plus an optional table writer for CSV.
struct Result {
    json doc;
    std::function<void(std::ostream&)> table;
};

std::string scalar_text(const json& v) {
    if (v.is_number_float()) {
        return io::format_double(v.get<double>());
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

void write_config_comments(std::ostream& out, const json& config) {
    for (const auto& [key, value] : config.items()) {
        out << "# " << key << '=' << scalar_text(value) << '\n';
    }
}

void write_csv(std::ostream& out, const Result& r) {
    write_config_comments(out, r.doc.at("config"));
    if (r.table) {
        r.table(out);
        return;
    }
    // One row of the top-level scalars.
    std::vector<std::string> keys;
    for (const auto& [key, value] : r.doc.items()) {
        if (key != "config" && value.is_primitive()) {
            keys.push_back(key);
        }
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
        out << (i ? "," : "") << keys[i];
    }
    out << '\n';
    for (std::size_t i = 0; i < keys.size(); ++i) {
        out << (i ? "," : "") << scalar_text(r.doc[keys[i]]);
    }
    out << '\n';
}

void write_pretty(std::ostream& out, const json& doc, int indent = 0) {
    const std::string pad(indent, ' ');
    for (const auto& [key, value] : doc.items()) {
        if (value.is_object()) {
            out << pad << key << ":\n";
            write_pretty(out, value, indent + 2);
        } else if (value.is_array() && !value.empty() && value.front().is_object()) {
            out << pad << key << ": [" << value.size() << " entries]\n";
            for (const auto& row : value) {
                out << pad << "  -";
                for (const auto& [k, v] : row.items()) {
                    out << ' ' << k << '=' << (v.is_primitive() ? scalar_text(v) : v.dump());
                }
                out << '\n';
            }
        } else {
            out << pad << key << ": " << (value.is_primitive() ? scalar_text(value) : value.dump()) << '\n';
        }
    }
}

void emit(const Result& r, const Output& o) {
    if (!o.path.empty()) {
        std::ofstream f(o.path);
        if (!f) {
            throw ValidationError("cannot write " + o.path);
        }
        if (o.format == "csv") {
            write_csv(f, r);
        } else {
            f << r.doc.dump(2) << '\n';
        }
        return;
    }
    if (o.format == "json") {
        std::cout << r.doc.dump(2) << '\n';
    } else if (o.format == "csv") {
        write_csv(std::cout, r);
    } else {
        write_pretty(std::cout, r.doc);
    }
}

PiecewiseLinearProfile builtin_profile(const std::string& kind, double alpha, int k, double peak) {
    if (kind == "optimal") {
        return optimal_profile(alpha, k);
    }
    if (kind == "roof") {
        return make_profile({{0.0, 0.0}, {peak, 1.0}, {1.0, 0.0}});
    }
    if (kind == "constant") {
        return make_profile({{0.0, 1.0}, {1.0, 1.0}});
    }
    throw ValidationError("unknown profile kind '" + kind + "' (optimal | roof | constant)");
}

Grading resolve_grading(const std::string& s, double alpha) {
    return s == "auto" ? default_grading(alpha) : io::parse_grading(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxed Sturm-Liouville eigenvalues, sharp diameter bounds and their verification"};
    app.require_subcommand(1);
    app.fallthrough();
    Output out;
    app.add_option("--format", out.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "pretty"}))
        ->capture_default_str();
    app.add_option("-o,--output", out.path, "Write to a file (JSON, or CSV with --format csv)");

    std::function<Result()> run;

    // bound
    auto* bound = app.add_subcommand("bound", "Sharp upper bound for D^2 mu_k");
    double b_alpha = 1.0;
    int b_k = 1;
    int b_d = 0;
    auto* b_alpha_opt = bound->add_option("--alpha", b_alpha, "Concavity exponent alpha >= 1");
    auto* b_d_opt = bound->add_option("--d", b_d, "Dimension of a convex body (bound with alpha = d-1)");
    b_alpha_opt->excludes(b_d_opt);
    bound->add_option("--k", b_k, "Eigenvalue index")->required();
    bound->callback([&] {
        run = [&] {
            const BoundValue b = b_d_opt->count() ? kroger_bound(b_d, b_k) : bound_value(b_alpha, b_k);
            json config = {{"command", "bound"}, {"k", b_k}};
            if (b_d_opt->count()) {
                config["d"] = b_d;
            } else {
                config["alpha"] = b_alpha;
            }
            json doc = io::to_json(b);
            doc["config"] = config;
            return Result{doc, {}};
        };
    });

    // Shared profile selection for mu / check / collapse.
    struct ProfileArgs {
        std::string file;
        std::string kind = "roof";
        double peak = 0.5;
    };
    const auto add_profile_options = [](CLI::App* cmd, ProfileArgs& p) {
        auto* file = cmd->add_option("--profile", p.file, "Profile JSON file");
        auto* kind = cmd->add_option("--builtin", p.kind, "Built-in profile: optimal | roof | constant")
                         ->capture_default_str();
        file->excludes(kind);
        cmd->add_option("--peak", p.peak, "Peak abscissa of the built-in roof")->capture_default_str();
    };
    const auto profile_config = [](const ProfileArgs& p, json& config) {
        if (!p.file.empty()) {
            config["profile"] = p.file;
        } else {
            config["builtin"] = p.kind;
            if (p.kind == "roof") {
                config["peak"] = p.peak;
            }
        }
    };

    // mu
    auto* mu = app.add_subcommand("mu", "mu_k(h^alpha) by the weighted P1 solver");
    ProfileArgs mu_profile;
    double mu_alpha = 1.0;
    int mu_k_index = 1;
    int mu_n = 4096;
    std::string mu_grading = "auto";
    add_profile_options(mu, mu_profile);
    mu->add_option("--alpha", mu_alpha)->capture_default_str();
    mu->add_option("--k", mu_k_index)->capture_default_str();
    mu->add_option("--n", mu_n, "Grid nodes")->capture_default_str();
    mu->add_option("--grading", mu_grading, "auto | uniform | endpoint_graded")->capture_default_str();
    mu->callback([&] {
        run = [&] {
            const auto h = mu_profile.file.empty()
                               ? builtin_profile(mu_profile.kind, mu_alpha, mu_k_index, mu_profile.peak)
                               : io::read_profile(mu_profile.file);
            const Grading g = resolve_grading(mu_grading, mu_alpha);
            const auto s = sharpmu::mu_k(sample_weight(h, mu_alpha, mu_n, g), mu_k_index);
            json doc = io::summary_json(s);
            doc["profile"] = io::to_json(h);
            json config = {{"command", "mu"}, {"alpha", mu_alpha}, {"k", mu_k_index}, {"n", mu_n},
                           {"grading", io::to_string(g)}};
            profile_config(mu_profile, config);
            doc["config"] = config;
            return Result{doc, {}};
        };
    });

    // check
    auto* check = app.add_subcommand("check", "Compare mu_k(h^alpha) with the sharp bound");
    ProfileArgs ck_profile;
    double ck_alpha = 1.0;
    int ck_k = 1;
    int ck_n = 4096;
    std::string ck_grading = "auto";
    add_profile_options(check, ck_profile);
    check->add_option("--alpha", ck_alpha)->capture_default_str();
    check->add_option("--k", ck_k)->capture_default_str();
    check->add_option("--n", ck_n)->capture_default_str();
    check->add_option("--grading", ck_grading)->capture_default_str();
    check->callback([&] {
        run = [&] {
            const auto h = ck_profile.file.empty() ? builtin_profile(ck_profile.kind, ck_alpha, ck_k, ck_profile.peak)
                                                   : io::read_profile(ck_profile.file);
            const Grading g = resolve_grading(ck_grading, ck_alpha);
            json doc = io::to_json(check_bound(h, ck_alpha, ck_k, ck_n, g));
            json config = {{"command", "check"}, {"alpha", ck_alpha}, {"k", ck_k}, {"n", ck_n},
                           {"grading", io::to_string(g)}};
            profile_config(ck_profile, config);
            doc["config"] = config;
            return Result{doc, {}};
        };
    });

    // optimize
    auto* optimize = app.add_subcommand("optimize", "Projected gradient ascent of mu_k over concave profiles");
    double op_alpha = 1.0;
    int op_k = 1;
    int op_m = 9;
    OptimOptions op_options;
    std::string op_init;
    std::string op_grading = "auto";
    bool op_fixed = false;
    optimize->add_option("--alpha", op_alpha)->capture_default_str();
    optimize->add_option("--k", op_k)->capture_default_str();
    optimize->add_option("--M", op_m, "Number of breakpoints")->capture_default_str();
    optimize->add_option("--steps", op_options.steps)->capture_default_str();
    optimize->add_option("--seed", op_options.seed)->capture_default_str();
    optimize->add_option("--n", op_options.n, "Solver grid nodes")->capture_default_str();
    optimize->add_option("--grading", op_grading)->capture_default_str();
    optimize->add_option("--init", op_init, "Initial profile JSON (default: seeded perturbation of 4x(1-x))");
    optimize->add_flag("--fixed-abscissae", op_fixed, "Optimize ordinates only");
    optimize->callback([&] {
        run = [&] {
            op_options.grading = resolve_grading(op_grading, op_alpha);
            op_options.free_abscissae = !op_fixed;
            const OptimReport r = op_init.empty()
                                      ? maximize_mu(op_alpha, op_k, op_m, op_options)
                                      : maximize_mu(op_alpha, op_k, op_m, io::read_profile(op_init), op_options);
            json doc = io::to_json(r);
            doc["target"] = bound_value(op_alpha, op_k).value;
            doc["endpoint_check"] = endpoint_check(r);
            json config = {{"command", "optimize"},
                           {"alpha", op_alpha},
                           {"k", op_k},
                           {"M", op_m},
                           {"steps", op_options.steps},
                           {"seed", op_options.seed},
                           {"n", op_options.n},
                           {"grading", io::to_string(*op_options.grading)},
                           {"free_abscissae", op_options.free_abscissae},
                           {"initial_step", op_options.initial_step},
                           {"max_halvings", op_options.max_halvings},
                           {"grad_tol", op_options.grad_tol}};
            if (!op_init.empty()) {
                config["init"] = op_init;
            }
            doc["config"] = config;
            return Result{doc, {}};
        };
    });

    // collapse
    auto* collapse = app.add_subcommand("collapse", "D^2 mu_k of collapsing ridge domains against mu_k(h)");
    ProfileArgs co_profile;
    int co_k = 1;
    std::vector<double> co_eps{0.2, 0.1, 0.05};
    int co_nx = 512;
    int co_ny = 8;
    int co_n1d = 8192;
    std::string co_mesh_out;
    add_profile_options(collapse, co_profile);
    collapse->add_option("--k", co_k)->capture_default_str();
    collapse->add_option("--eps", co_eps, "Decreasing epsilons, comma separated")->delimiter(',')->capture_default_str();
    collapse->add_option("--nx", co_nx)->capture_default_str();
    collapse->add_option("--ny", co_ny)->capture_default_str();
    collapse->add_option("--n1d", co_n1d, "Nodes of the 1D reference solve")->capture_default_str();
    collapse->add_option("--mesh-out", co_mesh_out, "Write the mesh of the last epsilon as ASCII");
    collapse->callback([&] {
        run = [&] {
            const auto h = co_profile.file.empty() ? builtin_profile(co_profile.kind, 1.0, co_k, co_profile.peak)
                                                   : io::read_profile(co_profile.file);
            const auto study = collapse_study(h, co_k, co_eps, co_nx, co_ny, co_n1d);
            if (!co_mesh_out.empty()) {
                std::ofstream f(co_mesh_out);
                if (!f) {
                    throw ValidationError("cannot write " + co_mesh_out);
                }
                write_mesh(f, build_ridge_mesh(h, co_eps.back(), co_nx, co_ny));
            }
            json doc = io::to_json(study);
            json config = {{"command", "collapse"}, {"k", co_k},   {"epsilons", co_eps},
                           {"nx", co_nx},           {"ny", co_ny}, {"n1d", co_n1d}};
            profile_config(co_profile, config);
            doc["config"] = config;
            return Result{doc, [study](std::ostream& os) { io::write_collapse_csv(os, study); }};
        };
    });

    // unbounded
    auto* unbounded = app.add_subcommand("unbounded", "Exponential-foot profiles g_a: w_a, its bracket, FEM mu_1");
    std::vector<double> un_a{0.3, 0.4, 0.45};
    int un_n = 8192;
    unbounded->add_option("--a", un_a, "Values of a in (0, 1/2), comma separated")
        ->delimiter(',')
        ->capture_default_str();
    unbounded->add_option("--n", un_n)->capture_default_str();
    unbounded->callback([&] {
        run = [&] {
            std::vector<UnboundedRow> rows;
            json jrows = json::array();
            for (double a : un_a) {
                rows.push_back(unbounded_row(a, un_n));
                jrows.push_back(io::to_json(rows.back()));
            }
            json doc = {{"rows", jrows}, {"config", {{"command", "unbounded"}, {"a", un_a}, {"n", un_n}}}};
            return Result{doc, [rows](std::ostream& os) { io::write_unbounded_csv(os, rows); }};
        };
    });

    // profile
    auto* profile = app.add_subcommand("profile", "Emit a profile JSON (optimal, roof or constant)");
    std::string pr_kind = "optimal";
    double pr_alpha = 1.0;
    int pr_k = 1;
    double pr_peak = 0.5;
    profile->add_option("--kind", pr_kind)->capture_default_str();
    profile->add_option("--alpha", pr_alpha)->capture_default_str();
    profile->add_option("--k", pr_k)->capture_default_str();
    profile->add_option("--peak", pr_peak)->capture_default_str();
    profile->callback([&] {
        run = [&] {
            json doc = io::to_json(builtin_profile(pr_kind, pr_alpha, pr_k, pr_peak));
            json config = {{"command", "profile"}, {"kind", pr_kind}};
            if (pr_kind == "optimal") {
                config["alpha"] = pr_alpha;
                config["k"] = pr_k;
            } else if (pr_kind == "roof") {
                config["peak"] = pr_peak;
            }
            doc["config"] = config;
            return Result{doc, {}};
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInvalid;
    }
    try {
        emit(run(), out);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const io::json::exception& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    }
    return 0;
}
