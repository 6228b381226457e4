#include "cli.hpp"

#include "cmc/config.hpp"
#include "cmc/diagnostics.hpp"
#include "cmc/errors.hpp"
#include "cmc/field_io.hpp"
#include "cmc/legendre.hpp"
#include "cmc/newton.hpp"
#include "cmc/radial.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <streambuf>

namespace cmc::cli {

namespace {

using nlohmann::json;

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Writes to two streams at once; the second may be null.
class TeeBuf : public std::streambuf {
public:
    TeeBuf(std::ostream* a, std::ostream* b) : a_(a), b_(b) {}

protected:
    int overflow(int ch) override {
        if (ch == traits_type::eof()) return traits_type::not_eof(ch);
        const char c = static_cast<char>(ch);
        if (a_) a_->put(c);
        if (b_) b_->put(c);
        return ch;
    }
    std::streamsize xsputn(const char* s, std::streamsize n) override {
        if (a_) a_->write(s, n);
        if (b_) b_->write(s, n);
        return n;
    }
    int sync() override {
        if (a_) a_->flush();
        if (b_) b_->flush();
        return 0;
    }

private:
    std::ostream* a_;
    std::ostream* b_;
};

void write_json(const std::filesystem::path& p, const json& j) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << j.dump(2) << "\n";
}

ModelKind parse_model(const std::string& s) {
    if (s == "minkowski") return ModelKind::Minkowski;
    if (s == "euclidean") return ModelKind::Euclidean;
    throw ConfigError("unknown model '" + s + "'");
}

// --- radial -----------------------------------------------------------------

struct RadialArgs {
    int n = 2;
    double r0 = 1.0;
    double t0 = 0.5;
    std::string model = "minkowski";
    int samples = 11;
    std::string out;
};

int cmd_radial(const RadialArgs& a, std::ostream& out, std::ostream& err) {
    try {
        if (a.samples < 2) throw ConfigError("--samples must be at least 2");
        const auto sol = make_radial(a.n, a.r0, a.t0, parse_model(a.model));
        out << "c = " << fmt9(sol.c) << "\n";
        std::ofstream file;
        if (!a.out.empty()) {
            file.open(a.out);
            if (!file) throw ConfigError("cannot write " + a.out);
        }
        std::ostream& csv = a.out.empty() ? out : file;
        csv << "r,u,du,d2u\n";
        for (int k = 0; k < a.samples; ++k) {
            const double r = a.r0 * k / (a.samples - 1);
            const auto v = radial_profile(sol, r);
            csv << fmt9(r) << ',' << fmt9(v.u) << ',' << fmt9(v.du) << ',' << fmt9(v.d2u) << "\n";
        }
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

// --- solve ------------------------------------------------------------------

struct SolveArgs {
    std::string config;
    bool quiet = false;
};

json step_json(double t, int iterations, double residual, double c) {
    return {{"t", t}, {"iterations", iterations}, {"residual_inf", residual}, {"c", c}};
}

// Runs the dual cross-solve; on failure the report gets a failing entry.
void attach_dual(const RunConfig& cfg, const ProblemSpec& spec, const SolutionField& field,
                 DiagnosticsReport& report, json& summary, std::optional<HomotopyResult>& dual) {
    try {
        dual = dual_solve(spec, cfg.dual_options());
        report = full_report(spec, field, &dual->field, cfg.tolerances);
        summary["dual_c"] = dual->field.c;
    } catch (const Error& e) {
        summary["dual_error"] = e.what();
        report.dual_consistency = std::numeric_limits<double>::quiet_NaN();
        for (auto& c : report.checks) {
            if (c.name != "dual_consistency") continue;
            c.evaluated = true;
            c.value = *report.dual_consistency;
            c.pass = false;
        }
    }
}

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(a.config);
        std::filesystem::create_directories(cfg.output_dir);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    const auto dir = cfg.output_dir;
    std::ofstream logfile(dir / "progress.log");
    TeeBuf tee_buf(a.quiet ? nullptr : &out, &logfile);
    std::ostream log(&tee_buf);
    cfg.solve.log = &log;

    json summary;
    summary["config"] = a.config;
    summary["model"] = to_string(cfg.model);
    summary["log"] = "progress.log";
    json steps = json::array();
    ProblemSpec spec;
    SolutionField field;

    auto finish = [&](int code) {
        summary["exit_code"] = code;
        summary["steps"] = steps;
        write_json(dir / "summary.json", summary);
        return code;
    };

    try {
        if (cfg.homotopy) {
            const auto hr = run_homotopy(cfg.omega, cfg.omega_tilde, cfg.model, cfg.homotopy_options());
            for (const auto& st : hr.history)
                steps.push_back(step_json(st.t, st.iterations, st.residual_inf, st.field.c));
            spec = hr.spec;
            field = hr.field;
        } else {
            spec = make_problem(cfg.omega, cfg.omega_tilde, cfg.model, cfg.n_rho, cfg.n_phi,
                                OperatorKind::Primal, cfg.solve.eps_space);
            SolutionField seed;
            if (cfg.seed == SeedChoice::File) {
                const auto stored = read_field(cfg.seed_file);
                if (stored.dual || stored.spec.model != spec.model)
                    throw ConfigError("seed.file holds a field of a different problem");
                seed = transfer_field(stored.field, stored.spec.omega_tilde, spec);
            } else {
                const SeedStrategy s = cfg.seed == SeedChoice::Radial      ? SeedStrategy::Radial
                                       : cfg.seed == SeedChoice::Quadratic ? SeedStrategy::Quadratic
                                                                           : SeedStrategy::Auto;
                seed = seed_field(spec, s);
            }
            const auto res = newton_solve(spec, seed, cfg.solve);
            steps.push_back(step_json(1.0, res.iterations, res.residual_inf, res.field.c));
            field = res.field;
        }
    } catch (const NonConvergence& e) {
        err << "no convergence: " << e.what() << "\n";
        summary["converged"] = false;
        summary["message"] = e.what();
        summary["failed_t"] = e.t();
        summary["best_residual"] = e.best_residual();
        return finish(kSolverFailure);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        summary["converged"] = false;
        summary["message"] = e.what();
        return finish(kConfigError);
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        summary["converged"] = false;
        summary["message"] = e.what();
        return finish(kConfigError);
    } catch (const Error& e) {
        err << "solver failure: " << e.what() << "\n";
        summary["converged"] = false;
        summary["message"] = e.what();
        return finish(kSolverFailure);
    }
    log.flush();
    summary["converged"] = true;
    summary["c"] = field.c;
    int total = 0;
    for (const auto& s : steps) total += s["iterations"].get<int>();
    summary["total_iterations"] = total;

    DiagnosticsReport report = full_report(spec, field, nullptr, cfg.tolerances);
    std::optional<HomotopyResult> dual;
    if (cfg.dual) attach_dual(cfg, spec, field, report, summary, dual);

    write_field(dir / "field", spec, field);
    summary["field"] = "field";
    if (dual) {
        write_field(dir / "dual_field", dual->spec, dual->field);
        summary["dual_field"] = "dual_field";
    }
    write_json(dir / "report.json", to_json(report));
    summary["report"] = "report.json";
    summary["all_pass"] = report.all_pass();

    out << "c = " << fmt9(field.c) << "\n";
    print_table(out, report);
    return finish(report.all_pass() ? kOk : kDiagnosticsFailure);
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
    std::string field;
    std::string config;
    bool dual = false;
    std::string out;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    StoredField stored;
    try {
        cfg = load_config(a.config);
        stored = read_field(a.field);
        const bool swapped = stored.dual;
        const ConvexDomain& dom = swapped ? stored.spec.omega_tilde : stored.spec.omega;
        const ConvexDomain& tgt = swapped ? stored.spec.omega : stored.spec.omega_tilde;
        if (stored.spec.model != cfg.model || !(dom == cfg.omega) || !(tgt == cfg.omega_tilde))
            throw ConfigError("stored field does not belong to the configured problem");
    } catch (const Error& e) {
        err << "schema error: " << e.what() << "\n";
        return kConfigError;
    }
    DiagnosticsReport report = full_report(stored.spec, stored.field, nullptr, cfg.tolerances);
    json summary;
    std::optional<HomotopyResult> dual;
    if (a.dual || cfg.dual) attach_dual(cfg, stored.spec, stored.field, report, summary, dual);
    if (summary.contains("dual_error")) err << "dual solve failed: " << summary["dual_error"] << "\n";

    const json j = to_json(report);
    if (a.out.empty()) {
        out << j.dump(2) << "\n";
    } else {
        try {
            write_json(a.out, j);
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
            return kConfigError;
        }
        print_table(out, report);
    }
    return report.all_pass() ? kOk : kDiagnosticsFailure;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constant mean curvature second boundary value problem solver"};
    app.require_subcommand(1);

    RadialArgs ra;
    auto* radial = app.add_subcommand("radial", "Closed-form radial solution table (CSV)");
    radial->add_option("--n", ra.n, "Dimension")->capture_default_str();
    radial->add_option("--r0", ra.r0, "Radius of the domain ball")->capture_default_str();
    radial->add_option("--t0", ra.t0, "Radius of the gradient image ball")->required();
    radial->add_option("--model", ra.model, "minkowski or euclidean")->capture_default_str();
    radial->add_option("--samples", ra.samples, "Number of radii in [0, r0]")->capture_default_str();
    radial->add_option("--out", ra.out, "Write the CSV here instead of standard output");

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Solve the problem described by a config file");
    solve->add_option("config", sa.config, "Configuration file")->required();
    solve->add_flag("--quiet", sa.quiet, "Progress only to the log file");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Recompute diagnostics for a stored field");
    verify->add_option("field", va.field, "Field stem (without .csv / .json)")->required();
    verify->add_option("config", va.config, "Configuration file")->required();
    verify->add_flag("--dual", va.dual, "Also run the dual cross-solve");
    verify->add_option("--out", va.out, "Write the report JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "usage error: " << e.what() << "\n";
        return kConfigError;
    }
    if (radial->parsed()) return cmd_radial(ra, out, err);
    if (solve->parsed()) return cmd_solve(sa, out, err);
    return cmd_verify(va, out, err);
}

} // namespace cmc::cli
