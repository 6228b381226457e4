#include "cmc/diagnostics.hpp"

#include "cmc/errors.hpp"
#include "cmc/newton.hpp"
#include "cmc/radial.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace cmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec2 sym_eigs(const Mat2& m) {
    const double tr = 0.5 * (m(0, 0) + m(1, 1));
    const double off = 0.5 * (m(0, 1) + m(1, 0));
    const double d = std::hypot(0.5 * (m(0, 0) - m(1, 1)), off);
    return Vec2(tr - d, tr + d);
}

// 1/v weight of the flux, NaN outside the light cone.
double inv_v(const Vec2& p, ModelKind model) {
    const double s = model == ModelKind::Minkowski ? 1.0 - p.squaredNorm() : 1.0 + p.squaredNorm();
    return s > 0.0 ? 1.0 / std::sqrt(s) : kNaN;
}

std::vector<double> boundary_flux_density(const ProblemSpec& spec, const NodalDerivatives& d) {
    const MappedGrid& g = *spec.grid;
    std::vector<double> f(static_cast<std::size_t>(g.n_phi()));
    for (int j = 0; j < g.n_phi(); ++j) {
        const int k = g.index(g.n_rho(), j);
        const Vec2 grad = spec.omega.eval(g.node(k)).grad;
        const Vec2 outward = -grad / grad.norm();
        const Vec2& p = d.du[static_cast<std::size_t>(k)];
        f[static_cast<std::size_t>(j)] = p.dot(outward) * inv_v(p, spec.model);
    }
    return f;
}

double nan_or(double v) { return std::isfinite(v) ? v : kNaN; }

double json_number(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? kNaN : v.get<double>();
}

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

LambdaBounds lambda_bounds(const ConvexDomain& omega, const ConvexDomain& omega_tilde, int n,
                           ModelKind model) {
    const Measures m = measures(omega);
    const double area_t = measures(omega_tilde).area;
    const double ymax = max_boundary_norm(omega_tilde);
    const double y2 = ymax * ymax;
    LambdaBounds b;
    b.lambda1 = n * std::pow(area_t / m.area, 1.0 / n);
    if (model == ModelKind::Minkowski) {
        b.lambda2 = m.perimeter / m.area * ymax / std::sqrt(1.0 - y2);
    } else {
        b.lambda2 = m.perimeter / m.area * ymax / std::sqrt(1.0 + y2);
        b.lambda1 /= std::pow(1.0 + y2, (n + 2.0) / (2.0 * n));
    }
    return b;
}

ObliquenessProfile obliqueness_profile(const ProblemSpec& spec, const SolutionField& field) {
    const MappedGrid& g = *spec.grid;
    const auto d = derivatives(g, field.u);
    ObliquenessProfile out;
    out.values.resize(static_cast<std::size_t>(g.n_phi()));
    out.min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.n_phi(); ++j) {
        const int k = g.index(g.n_rho(), j);
        const Vec2 nu = spec.omega.eval(g.node(k)).grad.normalized();
        const Vec2 beta = spec.omega_tilde.eval(d.du[static_cast<std::size_t>(k)]).grad;
        const double bn = beta.norm();
        const double v = bn > 0.0 ? beta.dot(nu) / bn : kNaN;
        out.values[static_cast<std::size_t>(j)] = v;
        out.min = std::isnan(v) ? v : std::min(out.min, v);
    }
    return out;
}

double mass_balance(const ProblemSpec& spec, const SolutionField& field) {
    const auto d = derivatives(*spec.grid, field.u);
    std::vector<double> det(d.d2u.size());
    for (std::size_t k = 0; k < det.size(); ++k) det[k] = d.d2u[k].determinant();
    const double target = measures(spec.omega_tilde).area;
    return std::abs(quadrature(*spec.grid, det) - target) / target;
}

double boundary_flux(const ProblemSpec& spec, const SolutionField& field) {
    const auto d = derivatives(*spec.grid, field.u);
    return boundary_quadrature(*spec.grid, boundary_flux_density(spec, d)) /
           measures(spec.omega).area;
}

double flux_identity(const ProblemSpec& spec, const SolutionField& field) {
    return nan_or(std::abs(field.c - boundary_flux(spec, field)) / std::abs(field.c));
}

double divergence_consistency(const ProblemSpec& spec, const SolutionField& field) {
    const MappedGrid& g = *spec.grid;
    const auto d = derivatives(g, field.u);
    std::vector<double> div(d.du.size());
    for (std::size_t k = 0; k < div.size(); ++k) {
        const Vec2& p = d.du[k];
        if (spec.model == ModelKind::Minkowski && p.squaredNorm() >= 1.0) return kNaN;
        div[k] = divergence_weights(p, spec.model, 0.0).cwiseProduct(d.d2u[k]).sum();
    }
    const double volume = quadrature(g, div);
    const double surface = boundary_quadrature(g, boundary_flux_density(spec, d));
    return nan_or(std::abs(surface - volume) / std::abs(volume));
}

HessianPinching hessian_pinching(const SolutionField& field) {
    const MappedGrid& g = *field.grid;
    const auto d = derivatives(g, field.u);
    HessianPinching p;
    p.min_eig = p.min_half_trace = std::numeric_limits<double>::infinity();
    p.max_eig = p.max_half_trace = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < g.size(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        p.grad_max = std::max(p.grad_max, d.du[ks].norm());
        if (!g.is_interior(k)) continue;
        const Vec2 e = sym_eigs(d.d2u[ks]);
        p.min_eig = std::min(p.min_eig, e[0]);
        p.max_eig = std::max(p.max_eig, e[1]);
        const double ht = 0.5 * d.d2u[ks].trace();
        p.min_half_trace = std::min(p.min_half_trace, ht);
        p.max_half_trace = std::max(p.max_half_trace, ht);
    }
    return p;
}

bool check_holds(double value, const std::string& relation, double bound) {
    if (std::isnan(value) || std::isnan(bound)) return false;
    if (relation == "<=") return value <= bound;
    if (relation == ">=") return value >= bound;
    if (relation == ">") return value > bound;
    return false;
}

bool DiagnosticsReport::all_pass() const {
    for (const auto& c : checks)
        if (c.evaluated && !c.pass) return false;
    return true;
}

const DiagnosticCheck* DiagnosticsReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::optional<double> exact_constant(const ProblemSpec& spec) {
    const bool dual = spec.op == OperatorKind::Dual;
    const ConvexDomain& dom = dual ? spec.omega_tilde : spec.omega;
    const ConvexDomain& tgt = dual ? spec.omega : spec.omega_tilde;
    auto plain_ball = [](const ConvexDomain& d) {
        return d.kind() == DomainKind::Ball && d.is_round();
    };
    if (!plain_ball(dom) || !plain_ball(tgt) || tgt.center().norm() != 0.0) return std::nullopt;
    try {
        const double c = radial_constant(2, dom.circumradius(), tgt.circumradius(), spec.model);
        return dual ? -c : c;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

DiagnosticsReport full_report(const ProblemSpec& spec, const SolutionField& field,
                              const SolutionField* dual, const DiagnosticsTolerances& tol,
                              bool with_singular_value) {
    DiagnosticsReport r;
    r.model = spec.model;
    r.c = field.c;
    const bool primal = spec.op == OperatorKind::Primal;

    auto add = [&](const std::string& name, double value, const std::string& rel, double bound,
                   bool evaluated = true) {
        DiagnosticCheck c{name, value, rel, bound, evaluated, true};
        c.pass = !evaluated || check_holds(value, rel, bound);
        r.checks.push_back(c);
    };

    try {
        const Eigen::VectorXd res = residual(spec, field);
        r.residual_inf = res.lpNorm<Eigen::Infinity>();
    } catch (const Error&) {
        r.residual_inf = kNaN;
    }
    add("residual", r.residual_inf / (1.0 + std::abs(field.c)), "<=", tol.residual);

    const auto pin = hessian_pinching(field);
    r.hessian_eig_min = pin.min_eig;
    r.hessian_eig_max = pin.max_eig;
    r.grad_max = pin.grad_max;
    add("convexity", r.hessian_eig_min, ">=", tol.eps_convexity);
    add("hessian_bounded", r.hessian_eig_max, "<=", std::numeric_limits<double>::max());
    add("spacelike", r.grad_max, "<=", 1.0 - tol.eps_space,
        primal && spec.model == ModelKind::Minkowski);

    r.obliqueness_min = obliqueness_profile(spec, field).min;
    add("obliqueness", r.obliqueness_min, ">=", tol.obliqueness_min);

    r.mass_balance_rel_err = nan_or(mass_balance(spec, field));
    add("mass_balance", r.mass_balance_rel_err, "<=", tol.mass_balance);

    if (primal) {
        const auto lb = lambda_bounds(spec.omega, spec.omega_tilde, 2, spec.model);
        r.lambda1 = lb.lambda1;
        r.lambda2 = lb.lambda2;
        r.flux_identity_rel_err = flux_identity(spec, field);
        r.lambda_slack = tol.slack_factor * r.flux_identity_rel_err * std::abs(field.c);
    } else {
        r.lambda1 = r.lambda2 = r.lambda_slack = r.flux_identity_rel_err = kNaN;
    }
    add("flux_identity", r.flux_identity_rel_err, "<=", tol.flux_identity, primal);
    add("lambda_lower", r.c, ">=", r.lambda1 - r.lambda_slack, primal);
    add("lambda_upper", r.c, "<=", r.lambda2 + r.lambda_slack, primal);

    if (with_singular_value) {
        try {
            r.jacobian_sigma_min = smallest_singular_value(jacobian(spec, field));
        } catch (const Error&) {
            r.jacobian_sigma_min = kNaN;
        }
    } else {
        r.jacobian_sigma_min = kNaN;
    }
    add("jacobian_nonsingular", r.jacobian_sigma_min, ">", 0.0, with_singular_value);

    double dual_bound = tol.dual_consistency;
    if (const auto exact = exact_constant(spec))
        dual_bound = std::max(2.0 * std::abs(field.c - *exact),
                              tol.residual * (1.0 + std::abs(field.c)));
    if (dual) r.dual_consistency = std::abs(dual->c + field.c);
    add("dual_consistency", r.dual_consistency.value_or(kNaN), "<=", dual_bound,
        r.dual_consistency.has_value());
    return r;
}

nlohmann::json to_json(const DiagnosticsReport& r) {
    nlohmann::json j;
    j["model"] = to_string(r.model);
    j["lambda1"] = number(r.lambda1);
    j["lambda2"] = number(r.lambda2);
    j["lambda_slack"] = number(r.lambda_slack);
    j["c"] = number(r.c);
    j["obliqueness_min"] = number(r.obliqueness_min);
    j["hessian_eig_range"] = {number(r.hessian_eig_min), number(r.hessian_eig_max)};
    j["grad_max"] = number(r.grad_max);
    j["mass_balance_rel_err"] = number(r.mass_balance_rel_err);
    j["flux_identity_rel_err"] = number(r.flux_identity_rel_err);
    j["dual_consistency"] = r.dual_consistency ? number(*r.dual_consistency) : nlohmann::json();
    j["residual_inf"] = number(r.residual_inf);
    j["jacobian_sigma_min"] = number(r.jacobian_sigma_min);
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"name", c.name},
                          {"value", number(c.value)},
                          {"relation", c.relation},
                          {"bound", number(c.bound)},
                          {"evaluated", c.evaluated},
                          {"pass", c.pass}});
    }
    j["checks"] = checks;
    j["all_pass"] = r.all_pass();
    return j;
}

DiagnosticsReport report_from_json(const nlohmann::json& j) {
    DiagnosticsReport r;
    const std::string model = j.at("model").get<std::string>();
    if (model == "minkowski")
        r.model = ModelKind::Minkowski;
    else if (model == "euclidean")
        r.model = ModelKind::Euclidean;
    else
        throw ConfigError("unknown model in report: " + model);
    r.lambda1 = json_number(j, "lambda1");
    r.lambda2 = json_number(j, "lambda2");
    r.lambda_slack = json_number(j, "lambda_slack");
    r.c = json_number(j, "c");
    r.obliqueness_min = json_number(j, "obliqueness_min");
    const auto& range = j.at("hessian_eig_range");
    r.hessian_eig_min = range.at(0).is_null() ? kNaN : range.at(0).get<double>();
    r.hessian_eig_max = range.at(1).is_null() ? kNaN : range.at(1).get<double>();
    r.grad_max = json_number(j, "grad_max");
    r.mass_balance_rel_err = json_number(j, "mass_balance_rel_err");
    r.flux_identity_rel_err = json_number(j, "flux_identity_rel_err");
    if (!j.at("dual_consistency").is_null())
        r.dual_consistency = j.at("dual_consistency").get<double>();
    r.residual_inf = json_number(j, "residual_inf");
    r.jacobian_sigma_min = json_number(j, "jacobian_sigma_min");
    for (const auto& c : j.at("checks")) {
        DiagnosticCheck d;
        d.name = c.at("name").get<std::string>();
        d.value = json_number(c, "value");
        d.relation = c.at("relation").get<std::string>();
        d.bound = json_number(c, "bound");
        d.evaluated = c.at("evaluated").get<bool>();
        d.pass = c.at("pass").get<bool>();
        r.checks.push_back(d);
    }
    return r;
}

void print_table(std::ostream& os, const DiagnosticsReport& r) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(9);
    os << "model " << to_string(r.model) << "  c = " << r.c << "  lambda1 = " << r.lambda1
       << "  lambda2 = " << r.lambda2 << "\n";
    os << std::left << std::setw(22) << "check" << std::setw(18) << "value" << std::setw(4) << ""
       << std::setw(18) << "bound"
       << "status\n";
    for (const auto& c : r.checks) {
        os << std::setw(22) << c.name << std::setw(18) << c.value << std::setw(4) << c.relation
           << std::setw(18) << c.bound
           << (!c.evaluated ? "not evaluated" : (c.pass ? "pass" : "FAIL")) << "\n";
    }
    os << (r.all_pass() ? "all checks pass" : "some checks FAIL") << "\n";
    os.flags(flags);
    os.precision(prec);
}

} // namespace cmc
