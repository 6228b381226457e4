#include "cmc/config.hpp"

#include "cmc/errors.hpp"
#include "cmc/residual.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace cmc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(key + ": expected a number, got '" + s + "'");
    return v;
}

int to_int(const std::string& key, const std::string& s) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
}

Vec2 to_vec2(const std::string& key, const std::string& s) {
    const auto v = to_list(key, s);
    if (v.size() != 2) throw ConfigError(key + ": expected two comma-separated numbers");
    return Vec2(v[0], v[1]);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct DomainDecl {
    std::string kind;
    Vec2 center = Vec2::Zero();
    std::optional<double> radius;
    std::optional<Vec2> semi_axes;
};

ConvexDomain build_domain(const std::string& name, const std::optional<DomainDecl>& d) {
    if (!d || d->kind.empty()) throw ConfigError(name + ".kind is required");
    try {
        if (d->kind == "ball") {
            if (!d->radius || d->semi_axes) throw ConfigError(name + ": a ball takes only radius");
            return ConvexDomain::ball(d->center, *d->radius);
        }
        if (d->kind == "ellipse") {
            if (!d->semi_axes || d->radius)
                throw ConfigError(name + ": an ellipse takes only semi_axes");
            return ConvexDomain::ellipse(d->center, d->semi_axes->x(), d->semi_axes->y());
        }
    } catch (const DomainError& e) {
        throw ConfigError(name + ": " + e.what());
    }
    throw ConfigError(name + ".kind: unknown kind '" + d->kind + "'");
}

void write_domain(std::ostream& os, const std::string& name, const ConvexDomain& d) {
    os << name << ".kind = " << (d.kind() == DomainKind::Ball ? "ball" : "ellipse") << "\n";
    os << name << ".center = " << num(d.center().x()) << ", " << num(d.center().y()) << "\n";
    if (d.kind() == DomainKind::Ball)
        os << name << ".radius = " << num(d.circumradius()) << "\n";
    else
        os << name << ".semi_axes = " << num(d.quadric_a()) << ", " << num(d.quadric_b()) << "\n";
}

const char* seed_name(SeedChoice s) {
    switch (s) {
    case SeedChoice::Radial: return "radial";
    case SeedChoice::Quadratic: return "quadratic";
    case SeedChoice::File: return "file";
    default: return "auto";
    }
}

} // namespace

HomotopyOptions RunConfig::homotopy_options() const {
    HomotopyOptions h;
    h.n_rho = n_rho;
    h.n_phi = n_phi;
    h.schedule = schedule;
    h.steps = steps;
    h.t_min = t_min;
    h.max_bisections = max_bisections;
    h.max_step_newton = max_step_newton;
    h.solve = solve;
    if (seed == SeedChoice::Radial) h.anchor_seed = SeedStrategy::Radial;
    if (seed == SeedChoice::Quadratic) h.anchor_seed = SeedStrategy::Quadratic;
    return h;
}

HomotopyOptions RunConfig::dual_options() const {
    HomotopyOptions h = homotopy_options();
    h.n_rho = n_rho * dual_refine;
    h.n_phi = n_phi * dual_refine;
    h.anchor_seed.reset();
    return h;
}

RunConfig parse_config(std::istream& is) {
    RunConfig cfg;
    std::optional<DomainDecl> dom[2];
    std::set<std::string> seen;

    auto domain_key = [&](int which, const std::string& field, const std::string& key,
                          const std::string& value) {
        if (!dom[which]) dom[which] = DomainDecl{};
        DomainDecl& d = *dom[which];
        if (field == "kind")
            d.kind = value;
        else if (field == "center")
            d.center = to_vec2(key, value);
        else if (field == "radius")
            d.radius = to_double(key, value);
        else if (field == "semi_axes")
            d.semi_axes = to_vec2(key, value);
        else
            throw ConfigError("unknown key '" + key + "'");
    };

    const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
        handlers = {
            {"model",
             [&](const std::string& k, const std::string& v) {
                 if (v == "minkowski")
                     cfg.model = ModelKind::Minkowski;
                 else if (v == "euclidean")
                     cfg.model = ModelKind::Euclidean;
                 else
                     throw ConfigError(k + ": unknown model '" + v + "'");
             }},
            {"grid.n_rho", [&](auto& k, auto& v) { cfg.n_rho = to_int(k, v); }},
            {"grid.n_phi", [&](auto& k, auto& v) { cfg.n_phi = to_int(k, v); }},
            {"solve.tol_residual", [&](auto& k, auto& v) { cfg.solve.tol_residual = to_double(k, v); }},
            {"solve.max_newton", [&](auto& k, auto& v) { cfg.solve.max_newton = to_int(k, v); }},
            {"solve.armijo_factor", [&](auto& k, auto& v) { cfg.solve.armijo_factor = to_double(k, v); }},
            {"solve.armijo_c", [&](auto& k, auto& v) { cfg.solve.armijo_c = to_double(k, v); }},
            {"solve.eps_convexity",
             [&](auto& k, auto& v) { cfg.solve.eps_convexity = to_double(k, v); }},
            {"solve.eps_space", [&](auto& k, auto& v) { cfg.solve.eps_space = to_double(k, v); }},
            {"solve.min_step", [&](auto& k, auto& v) { cfg.solve.min_step = to_double(k, v); }},
            {"homotopy.enabled", [&](auto& k, auto& v) { cfg.homotopy = to_bool(k, v); }},
            {"homotopy.steps", [&](auto& k, auto& v) { cfg.steps = to_int(k, v); }},
            {"homotopy.t_min", [&](auto& k, auto& v) { cfg.t_min = to_double(k, v); }},
            {"homotopy.schedule", [&](auto& k, auto& v) { cfg.schedule = to_list(k, v); }},
            {"homotopy.max_bisections", [&](auto& k, auto& v) { cfg.max_bisections = to_int(k, v); }},
            {"homotopy.max_step_newton",
             [&](auto& k, auto& v) { cfg.max_step_newton = to_int(k, v); }},
            {"seed.strategy",
             [&](const std::string& k, const std::string& v) {
                 if (v == "auto")
                     cfg.seed = SeedChoice::Auto;
                 else if (v == "radial")
                     cfg.seed = SeedChoice::Radial;
                 else if (v == "quadratic")
                     cfg.seed = SeedChoice::Quadratic;
                 else if (v == "file")
                     cfg.seed = SeedChoice::File;
                 else
                     throw ConfigError(k + ": unknown strategy '" + v + "'");
             }},
            {"seed.file", [&](auto&, auto& v) { cfg.seed_file = v; }},
            {"output.dir", [&](auto&, auto& v) { cfg.output_dir = v; }},
            {"diagnostics.mass_balance",
             [&](auto& k, auto& v) { cfg.tolerances.mass_balance = to_double(k, v); }},
            {"diagnostics.flux_identity",
             [&](auto& k, auto& v) { cfg.tolerances.flux_identity = to_double(k, v); }},
            {"diagnostics.obliqueness_min",
             [&](auto& k, auto& v) { cfg.tolerances.obliqueness_min = to_double(k, v); }},
            {"diagnostics.residual",
             [&](auto& k, auto& v) { cfg.tolerances.residual = to_double(k, v); }},
            {"diagnostics.dual_consistency",
             [&](auto& k, auto& v) { cfg.tolerances.dual_consistency = to_double(k, v); }},
            {"diagnostics.slack_factor",
             [&](auto& k, auto& v) { cfg.tolerances.slack_factor = to_double(k, v); }},
            {"dual.enabled", [&](auto& k, auto& v) { cfg.dual = to_bool(k, v); }},
            {"dual.refine", [&](auto& k, auto& v) { cfg.dual_refine = to_int(k, v); }},
        };

    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("repeated key '" + key + "'");
        if (key.rfind("omega_tilde.", 0) == 0)
            domain_key(1, key.substr(12), key, value);
        else if (key.rfind("omega.", 0) == 0)
            domain_key(0, key.substr(6), key, value);
        else if (auto it = handlers.find(key); it != handlers.end())
            it->second(key, value);
        else
            throw ConfigError("unknown key '" + key + "'");
    }
    cfg.omega = build_domain("omega", dom[0]);
    cfg.omega_tilde = build_domain("omega_tilde", dom[1]);
    cfg.tolerances.eps_convexity = cfg.solve.eps_convexity;
    cfg.tolerances.eps_space = cfg.solve.eps_space;
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path.string());
    return parse_config(f);
}

void validate(const RunConfig& cfg) {
    cfg.solve.validate();
    if (cfg.n_rho < MappedGrid::kMinRho || cfg.n_phi < MappedGrid::kMinPhi || cfg.n_phi % 2 != 0)
        throw ConfigError("grid: need n_rho >= 4 and an even n_phi >= 8");
    if (cfg.steps < 1) throw ConfigError("homotopy.steps must be positive");
    if (cfg.t_min < 0.0 || cfg.t_min > 1.0) throw ConfigError("homotopy.t_min must lie in [0, 1]");
    if (cfg.max_bisections < 0) throw ConfigError("homotopy.max_bisections must be non-negative");
    if (cfg.max_step_newton < 1) throw ConfigError("homotopy.max_step_newton must be positive");
    for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
        if (!(cfg.schedule[k] > 0.0 && cfg.schedule[k] <= 1.0) ||
            (k > 0 && !(cfg.schedule[k] > cfg.schedule[k - 1])))
            throw ConfigError("homotopy.schedule must increase strictly inside (0, 1]");
    }
    if (!cfg.schedule.empty() && cfg.schedule.back() != 1.0)
        throw ConfigError("homotopy.schedule must end at 1");
    if (cfg.seed == SeedChoice::File) {
        if (cfg.seed_file.empty()) throw ConfigError("seed.strategy = file needs seed.file");
        if (cfg.homotopy) throw ConfigError("seed.strategy = file needs homotopy.enabled = false");
    }
    const auto& t = cfg.tolerances;
    if (!(t.mass_balance > 0 && t.flux_identity > 0 && t.residual > 0 && t.dual_consistency > 0 &&
          t.slack_factor >= 0))
        throw ConfigError("diagnostics tolerances must be positive");
    if (cfg.dual_refine < 1) throw ConfigError("dual.refine must be at least 1");
    if (cfg.model == ModelKind::Minkowski &&
        max_boundary_norm(cfg.omega_tilde) > 1.0 - cfg.solve.eps_space)
        throw ConfigError("omega_tilde must lie strictly inside the unit ball (Minkowski model)");
}

std::string to_config_string(const RunConfig& cfg) {
    std::ostringstream os;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
        return s;
    };
    os << "model = " << to_string(cfg.model) << "\n";
    write_domain(os, "omega", cfg.omega);
    write_domain(os, "omega_tilde", cfg.omega_tilde);
    os << "grid.n_rho = " << cfg.n_rho << "\n";
    os << "grid.n_phi = " << cfg.n_phi << "\n";
    os << "solve.tol_residual = " << num(cfg.solve.tol_residual) << "\n";
    os << "solve.max_newton = " << cfg.solve.max_newton << "\n";
    os << "solve.armijo_factor = " << num(cfg.solve.armijo_factor) << "\n";
    os << "solve.armijo_c = " << num(cfg.solve.armijo_c) << "\n";
    os << "solve.eps_convexity = " << num(cfg.solve.eps_convexity) << "\n";
    os << "solve.eps_space = " << num(cfg.solve.eps_space) << "\n";
    os << "solve.min_step = " << num(cfg.solve.min_step) << "\n";
    os << "homotopy.enabled = " << (cfg.homotopy ? "true" : "false") << "\n";
    os << "homotopy.steps = " << cfg.steps << "\n";
    os << "homotopy.t_min = " << num(cfg.t_min) << "\n";
    if (!cfg.schedule.empty()) os << "homotopy.schedule = " << list(cfg.schedule) << "\n";
    os << "homotopy.max_bisections = " << cfg.max_bisections << "\n";
    os << "homotopy.max_step_newton = " << cfg.max_step_newton << "\n";
    os << "seed.strategy = " << seed_name(cfg.seed) << "\n";
    if (!cfg.seed_file.empty()) os << "seed.file = " << cfg.seed_file << "\n";
    os << "output.dir = " << cfg.output_dir.string() << "\n";
    os << "diagnostics.mass_balance = " << num(cfg.tolerances.mass_balance) << "\n";
    os << "diagnostics.flux_identity = " << num(cfg.tolerances.flux_identity) << "\n";
    os << "diagnostics.obliqueness_min = " << num(cfg.tolerances.obliqueness_min) << "\n";
    os << "diagnostics.residual = " << num(cfg.tolerances.residual) << "\n";
    os << "diagnostics.dual_consistency = " << num(cfg.tolerances.dual_consistency) << "\n";
    os << "diagnostics.slack_factor = " << num(cfg.tolerances.slack_factor) << "\n";
    os << "dual.enabled = " << (cfg.dual ? "true" : "false") << "\n";
    os << "dual.refine = " << cfg.dual_refine << "\n";
    return os.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    auto solve_eq = [](const SolveOptions& x, const SolveOptions& y) {
        return x.tol_residual == y.tol_residual && x.max_newton == y.max_newton &&
               x.armijo_factor == y.armijo_factor && x.armijo_c == y.armijo_c &&
               x.eps_convexity == y.eps_convexity && x.eps_space == y.eps_space &&
               x.min_step == y.min_step;
    };
    auto tol_eq = [](const DiagnosticsTolerances& x, const DiagnosticsTolerances& y) {
        return x.mass_balance == y.mass_balance && x.flux_identity == y.flux_identity &&
               x.obliqueness_min == y.obliqueness_min && x.residual == y.residual &&
               x.dual_consistency == y.dual_consistency && x.slack_factor == y.slack_factor &&
               x.eps_convexity == y.eps_convexity && x.eps_space == y.eps_space;
    };
    return a.model == b.model && a.omega == b.omega && a.omega_tilde == b.omega_tilde &&
           a.n_rho == b.n_rho && a.n_phi == b.n_phi && solve_eq(a.solve, b.solve) &&
           a.homotopy == b.homotopy && a.steps == b.steps && a.t_min == b.t_min &&
           a.schedule == b.schedule && a.max_bisections == b.max_bisections &&
           a.max_step_newton == b.max_step_newton && a.seed == b.seed &&
           a.seed_file == b.seed_file && a.output_dir == b.output_dir &&
           tol_eq(a.tolerances, b.tolerances) && a.dual == b.dual &&
           a.dual_refine == b.dual_refine;
}

} // namespace cmc
