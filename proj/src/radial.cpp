#include "cmc/radial.hpp"

#include "cmc/errors.hpp"
#include "cmc/residual.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cmc {

double radial_constant(int n, double r0, double t0, ModelKind model) {
    if (n < 1) throw DomainError("dimension must be at least 1");
    if (!(r0 > 0.0)) throw DomainError("r0 must be positive");
    if (!(t0 >= 0.0)) throw DomainError("t0 must be non-negative");
    if (model == ModelKind::Minkowski) {
        if (!(t0 < 1.0)) throw DomainError("t0 must be < 1");
        return n * t0 / (std::sqrt(1.0 - t0 * t0) * r0);
    }
    return n * t0 / (std::sqrt(1.0 + t0 * t0) * r0);
}

RadialSolution make_radial(int n, double r0, double t0, ModelKind model) {
    RadialSolution s;
    s.n = n;
    s.r0 = r0;
    s.t0 = t0;
    s.model = model;
    s.c = radial_constant(n, r0, t0, model);
    return s;
}

RadialValues radial_profile(const RadialSolution& sol, double r) {
    const double slack = 1e-9 * sol.r0;
    if (!(r >= -slack && r <= sol.r0 + slack)) {
        std::ostringstream os;
        os << "radius " << r << " outside [0, " << sol.r0 << "]";
        throw DomainError(os.str());
    }
    r = std::clamp(r, 0.0, sol.r0);
    const double n = sol.n, c = sol.c;
    RadialValues v;
    if (c == 0.0) return v;
    if (sol.model == ModelKind::Minkowski) {
        const double q = std::sqrt(n * n + c * c * r * r);
        // (q - n) / c without cancellation
        v.u = c * r * r / (q + n);
        v.du = c * r / q;
        v.d2u = c * n * n / (q * q * q);
    } else {
        const double q = c * r / n;
        const double w = std::sqrt(1.0 - q * q);
        v.u = (n / c) * q * q / (1.0 + w);
        v.du = q / w;
        v.d2u = (c / n) / (w * w * w);
    }
    return v;
}

PointState radial_point_state(const RadialSolution& sol, const Vec2& x) {
    const double r = x.norm();
    const auto v = radial_profile(sol, r);
    PointState s;
    if (r == 0.0) {
        s.d2u = v.d2u * Mat2::Identity();
        return s;
    }
    const Vec2 e = x / r;
    s.du = v.du * e;
    s.d2u = v.d2u * e * e.transpose() + (v.du / r) * (Mat2::Identity() - e * e.transpose());
    return s;
}

double ode_crosscheck(const RadialSolution& sol, int steps) {
    if (steps < 1) throw DomainError("steps must be positive");
    const double c = sol.c;
    const int n = sol.n;
    auto f = [&](double r, double p) { return r == 0.0 ? c / n : c - (n - 1) * p / r; };
    const double h = sol.r0 / steps;
    double p = 0.0, worst = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double r = k * h;
        const double k1 = f(r, p);
        const double k2 = f(r + 0.5 * h, p + 0.5 * h * k1);
        const double k3 = f(r + 0.5 * h, p + 0.5 * h * k2);
        const double k4 = f(r + h, p + h * k3);
        p += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        worst = std::max(worst, std::abs(p - c * (r + h) / n));
    }
    return worst;
}

Eigen::VectorXd radial_nodal_values(const RadialSolution& sol, const MappedGrid& grid,
                                    const Vec2& centre, const Vec2& shift) {
    Eigen::VectorXd u(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        const Vec2 x = grid.node(k) - centre;
        u[k] = radial_profile(sol, x.norm()).u + shift.dot(x);
    }
    return u;
}

namespace {

// Legendre transform of the radial profile: the inverse of u' and
// U~(s) = r s - U(r) with r = (u')^{-1}(s).
double dual_radial_value(const RadialSolution& sol, double s) {
    if (s == 0.0 || sol.c == 0.0) return 0.0;
    const double n = sol.n, c = sol.c;
    const double r = sol.model == ModelKind::Minkowski
                         ? n * s / (c * std::sqrt(1.0 - s * s))
                         : n * (s / std::sqrt(1.0 + s * s)) / c;
    return r * s - radial_profile(sol, std::min(r, sol.r0)).u;
}

bool gradient_image_fits(const ProblemSpec& spec, double alpha, const Vec2& xp, const Vec2& yc) {
    const auto& g = *spec.grid;
    const double tol = spec.omega_tilde.boundary_tolerance();
    for (int k = 0; k < g.size(); ++k) {
        const Vec2 du = alpha * (g.node(k) - xp) + yc;
        if (spec.omega_tilde.eval(du).value < -tol) return false;
        if (spec.model == ModelKind::Minkowski && spec.op == OperatorKind::Primal &&
            !(du.norm() <= 1.0 - spec.eps_space))
            return false;
    }
    return true;
}

double average_operator(const ProblemSpec& spec, const Eigen::VectorXd& u) {
    const auto& g = *spec.grid;
    const auto d = derivatives(g, u);
    double num = 0.0, den = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        if (g.is_boundary(k)) continue;
        const auto ks = static_cast<std::size_t>(k);
        const double w = g.weights()[ks] > 0.0 ? g.weights()[ks] : 0.0;
        num += w * evaluate_operator(spec, g.node(k), {d.du[ks], d.d2u[ks]}, false).value;
        den += w;
    }
    return den > 0.0 ? num / den : 0.0;
}

} // namespace

SolutionField seed_field(const ProblemSpec& spec, SeedStrategy strategy) {
    if (!spec.grid) throw SeedFailure("problem has no grid");
    const auto& g = *spec.grid;
    const ConvexDomain& dom = spec.omega;
    const ConvexDomain& tgt = spec.omega_tilde;

    SolutionField f;
    f.grid = spec.grid;
    f.model = spec.model;
    f.role = spec.op == OperatorKind::Primal ? FieldRole::Primal : FieldRole::Dual;

    const bool round = dom.is_round() && tgt.is_round();
    if (strategy == SeedStrategy::Radial || (strategy == SeedStrategy::Auto && round)) {
        // Exact for ball pairs. Otherwise the profile of the ball pair
        // (circumscribed, inscribed) keeps the gradient image inside the target.
        const double rd = dom.circumradius();
        const double rt = tgt.inradius();
        f.u.resize(g.size());
        if (spec.op == OperatorKind::Primal) {
            const auto sol = make_radial(2, rd, rt, spec.model);
            f.u = radial_nodal_values(sol, g, dom.center(), tgt.center());
            f.c = sol.c;
        } else {
            // Grid over the image ball of radius rd, gradient image of radius rt.
            const auto sol = make_radial(2, rt, rd, spec.model);
            for (int k = 0; k < g.size(); ++k) {
                const Vec2 y = g.node(k) - dom.center();
                f.u[k] = dual_radial_value(sol, std::min(y.norm(), rd)) + tgt.center().dot(y);
            }
            f.c = -sol.c;
        }
        project_mean_zero(g, f.u);
        return f;
    }

    const Vec2 xp = dom.peak();
    const Vec2 yc = tgt.peak();
    double alpha = tgt.inradius() / dom.circumradius();
    while (!gradient_image_fits(spec, alpha, xp, yc)) {
        alpha *= 0.5;
        if (alpha < 1e-4) throw SeedFailure("no admissible quadratic seed with alpha >= 1e-4");
    }
    f.u.resize(g.size());
    for (int k = 0; k < g.size(); ++k) {
        const Vec2 x = g.node(k) - xp;
        f.u[k] = 0.5 * alpha * x.squaredNorm() + yc.dot(x);
    }
    f.c = average_operator(spec, f.u);
    project_mean_zero(g, f.u);
    return f;
}

} // namespace cmc
