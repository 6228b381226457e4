#include "cmc/newton.hpp"

#include "cmc/errors.hpp"
#include "cmc/radial.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cmc {

void SolveOptions::validate() const {
    if (!(tol_residual > 0.0)) throw ConfigError("tol_residual must be positive");
    if (max_newton < 1) throw ConfigError("max_newton must be positive");
    if (!(armijo_factor > 0.0 && armijo_factor < 1.0))
        throw ConfigError("armijo_factor must lie in (0, 1)");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("armijo_c must lie in (0, 1)");
    if (!(eps_convexity > 0.0)) throw ConfigError("eps_convexity must be positive");
    if (!(eps_space > 0.0 && eps_space < 1.0)) throw ConfigError("eps_space must lie in (0, 1)");
    if (!(min_step > 0.0)) throw ConfigError("min_step must be positive");
}

void write_progress(std::ostream& os, const IterationRecord& rec) {
    const auto flags = os.flags();
    const auto prec = os.precision(9);
    os << std::defaultfloat << "newton t=" << rec.t << " iter=" << rec.iter
       << " res=" << rec.residual_inf << " alpha=" << rec.alpha << " c=" << rec.c << '\n';
    os.precision(prec);
    os.flags(flags);
}

Admissibility admissibility(const ProblemSpec& spec, const NodalDerivatives& d,
                            const SolveOptions& opts) {
    Admissibility a;
    a.min_eig = min_interior_eigenvalue(*spec.grid, d);
    a.max_grad = max_gradient_norm(d);
    a.convex = a.min_eig >= opts.eps_convexity;
    a.spacelike = spec.model != ModelKind::Minkowski || spec.op != OperatorKind::Primal ||
                  a.max_grad <= 1.0 - opts.eps_space;
    return a;
}

Eigen::VectorXd newton_direction(const SparseCM& jacobian, const Eigen::VectorXd& residual) {
    const auto n = jacobian.rows();
    Eigen::VectorXd row_max = Eigen::VectorXd::Zero(n);
    for (int col = 0; col < jacobian.outerSize(); ++col)
        for (SparseCM::InnerIterator it(jacobian, col); it; ++it)
            row_max[it.row()] = std::max(row_max[it.row()], std::abs(it.value()));
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) scale[i] = row_max[i] > 0.0 ? 1.0 / row_max[i] : 1.0;
    SparseCM a = scale.asDiagonal() * jacobian;
    a.makeCompressed();
    Eigen::SparseLU<SparseCM, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw SingularHessian("Jacobian factorization failed: " + lu.lastErrorMessage());
    Eigen::VectorXd d = lu.solve(-(scale.asDiagonal() * residual).eval());
    if (lu.info() != Eigen::Success || !d.allFinite())
        throw SingularHessian("Jacobian solve failed");
    return d;
}

double smallest_singular_value(const SparseCM& jacobian, int iterations) {
    Eigen::SparseLU<SparseCM, Eigen::COLAMDOrdering<int>> lu;
    SparseCM a = jacobian;
    a.makeCompressed();
    lu.compute(a);
    if (lu.info() != Eigen::Success) return 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(a.cols()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd y = lu.solve(x);
        const Eigen::VectorXd z = lu.transpose().solve(y);
        const double nz = z.norm();
        if (!(nz > 0.0) || !std::isfinite(nz)) return 0.0;
        lambda = nz;  // converges to 1 / sigma_min^2
        x = z / nz;
    }
    return 1.0 / std::sqrt(lambda);
}

namespace {

double residual_scale(const SolutionField& f) { return 1.0 + std::abs(f.c); }

void throw_inadmissible(const Admissibility& a, const SolveOptions& opts, const char* what) {
    std::ostringstream os;
    if (!a.spacelike) {
        os << what << ": max |Du| = " << a.max_grad << " exceeds 1 - " << opts.eps_space;
        throw SpacelikeViolation(os.str(), -1, a.max_grad);
    }
    os << what << ": min Hessian eigenvalue " << a.min_eig << " below " << opts.eps_convexity;
    throw ConvexityLoss(os.str());
}

} // namespace

StepResult damped_step(const ProblemSpec& spec, const SolutionField& field,
                       const Eigen::VectorXd& current_residual, const Eigen::VectorXd& direction,
                       const SolveOptions& opts) {
    const Eigen::VectorXd z0 = pack(field);
    const double f0 = current_residual.norm();
    StepResult out;
    for (double alpha = 1.0; alpha >= opts.min_step; alpha *= opts.armijo_factor) {
        ++out.trials;
        SolutionField trial = field;
        unpack(z0 + alpha * direction, trial);
        if (!trial.u.allFinite() || !std::isfinite(trial.c)) continue;
        const auto d = derivatives(*spec.grid, trial.u);
        const auto guards = admissibility(spec, d, opts);
        if (!guards.ok()) continue;
        Eigen::VectorXd r;
        try {
            r = residual(spec, trial);
        } catch (const SpacelikeViolation&) {
            continue;
        } catch (const SingularHessian&) {
            continue;
        }
        if (r.norm() <= (1.0 - opts.armijo_c * alpha) * f0) {
            out.field = std::move(trial);
            out.alpha = alpha;
            out.residual = std::move(r);
            out.guards = guards;
            return out;
        }
    }
    throw StepRejection("line search shrank the step below the minimum");
}

NewtonResult newton_solve(const ProblemSpec& spec, const SolutionField& initial,
                          const SolveOptions& opts, double t_label) {
    opts.validate();
    if (!spec.grid || initial.u.size() != spec.grid->size())
        throw DomainError("initial field does not match the problem grid");

    NewtonResult res;
    res.field = initial;
    res.field.grid = spec.grid;
    res.field.model = spec.model;
    res.field.role = spec.op == OperatorKind::Primal ? FieldRole::Primal : FieldRole::Dual;
    project_mean_zero(*spec.grid, res.field.u);

    auto guards = admissibility(spec, derivatives(*spec.grid, res.field.u), opts);
    if (!guards.ok()) throw_inadmissible(guards, opts, "initial field");
    Linearization lin = linearize(spec, res.field);

    auto record = [&](int iter, double alpha) {
        IterationRecord rec;
        rec.t = t_label;
        rec.iter = iter;
        rec.residual_inf = lin.residual.lpNorm<Eigen::Infinity>();
        rec.alpha = alpha;
        rec.c = res.field.c;
        rec.min_eig = guards.min_eig;
        rec.max_grad = guards.max_grad;
        res.history.push_back(rec);
        if (opts.log) write_progress(*opts.log, rec);
        return rec.residual_inf;
    };

    double r_inf = record(0, 0.0);
    double best = r_inf;
    for (int iter = 1;; ++iter) {
        if (r_inf <= opts.tol_residual * residual_scale(res.field)) {
            res.iterations = iter - 1;
            res.residual_inf = r_inf;
            return res;
        }
        if (iter > opts.max_newton) break;
        StepResult step;
        try {
            const Eigen::VectorXd dir = newton_direction(lin.jacobian, lin.residual);
            step = damped_step(spec, res.field, lin.residual, dir, opts);
        } catch (const StepRejection& e) {
            throw NonConvergence(std::string("Newton stalled: ") + e.what(), best, t_label);
        } catch (const SingularHessian& e) {
            throw NonConvergence(std::string("Newton stalled: ") + e.what(), best, t_label);
        }
        res.field = std::move(step.field);
        guards = step.guards;
        lin = linearize(spec, res.field);
        r_inf = record(iter, step.alpha);
        best = std::min(best, r_inf);
    }
    std::ostringstream os;
    os << "Newton did not converge in " << opts.max_newton << " iterations (best residual "
       << best << ")";
    throw NonConvergence(os.str(), best, t_label);
}

// Continuation ---------------------------------------------------------------

double default_t_min(const ConvexDomain& omega, const ConvexDomain& omega_tilde, int n_rho) {
    // Level sets of the quadric shrink like sqrt(t); six rings at the full
    // domain's radial spacing must fit inside the smaller semi-axis.
    auto need = [&](const ConvexDomain& d) {
        const double ratio = 6.0 * d.circumradius() / (n_rho * d.inradius());
        return ratio * ratio;
    };
    return std::clamp(std::max(need(omega), need(omega_tilde)), kSublevelFloor, 1.0);
}

std::vector<double> uniform_schedule(double t_min, int steps) {
    if (!(t_min > 0.0 && t_min <= 1.0)) throw ConfigError("t_min must lie in (0, 1]");
    if (steps < 1) throw ConfigError("homotopy needs at least one step");
    if (steps == 1 || t_min == 1.0) return {1.0};
    std::vector<double> s(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) s[static_cast<std::size_t>(k)] = t_min + (1.0 - t_min) * k / (steps - 1);
    s.back() = 1.0;
    return s;
}

SolutionField transfer_field(const SolutionField& from, const ConvexDomain& from_target,
                             const ProblemSpec& to) {
    const MappedGrid& g0 = *from.grid;
    const MappedGrid& g1 = *to.grid;
    const ConvexDomain& d0 = g0.domain();
    const double s_dom = to.omega.circumradius() / d0.circumradius();
    const double s_tgt = to.omega_tilde.circumradius() / from_target.circumradius();

    Eigen::VectorXd w(g0.size());
    for (int k = 0; k < g0.size(); ++k)
        w[k] = from.u[k] - from_target.peak().dot(g0.node(k) - d0.peak());
    std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));

    SolutionField f;
    f.grid = to.grid;
    f.model = to.model;
    f.role = to.op == OperatorKind::Primal ? FieldRole::Primal : FieldRole::Dual;
    f.u.resize(g1.size());
    for (int k = 0; k < g1.size(); ++k) {
        const int i = g1.ring_of(k), j = g1.col_of(k);
        const double v = g0.interpolate_param(ws, g1.rho(i), g1.phi(j));
        f.u[k] = s_dom * s_tgt * v + to.omega_tilde.peak().dot(g1.node(k) - to.omega.peak());
    }
    project_mean_zero(g1, f.u);
    f.c = from.c * s_tgt / s_dom;
    return f;
}

namespace {

struct StepOutcome {
    ProblemSpec spec;
    NewtonResult result;
};

StepOutcome solve_at(const ConvexDomain& omega, const ConvexDomain& omega_tilde, ModelKind model,
                     const HomotopyOptions& opts, OperatorKind op, double t,
                     const SolutionField* previous, const ConvexDomain* previous_target) {
    StepOutcome out;
    out.spec = make_problem(sublevel_domain(omega, t), sublevel_domain(omega_tilde, t), model,
                            opts.n_rho, opts.n_phi, op, opts.solve.eps_space);
    const SeedStrategy anchor = opts.anchor_seed.value_or(
        op == OperatorKind::Primal ? SeedStrategy::Radial : SeedStrategy::Auto);
    const SolutionField guess = previous ? transfer_field(*previous, *previous_target, out.spec)
                                         : seed_field(out.spec, anchor);
    SolveOptions so = opts.solve;
    so.max_newton = opts.max_step_newton;
    out.result = newton_solve(out.spec, guess, so, t);
    return out;
}

} // namespace

HomotopyResult run_homotopy(const ConvexDomain& omega, const ConvexDomain& omega_tilde,
                            ModelKind model, const HomotopyOptions& opts, OperatorKind op) {
    opts.solve.validate();
    if (opts.max_bisections < 0) throw ConfigError("max_bisections must be non-negative");
    if (opts.max_step_newton < 1) throw ConfigError("max_step_newton must be positive");

    std::vector<double> schedule = opts.schedule;
    if (schedule.empty()) {
        if (omega.is_round() && omega_tilde.is_round()) {
            schedule = {1.0};
        } else {
            const double t_min =
                opts.t_min > 0.0 ? opts.t_min : default_t_min(omega, omega_tilde, opts.n_rho);
            schedule = uniform_schedule(t_min, opts.steps);
        }
    }
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (!(schedule[k] > 0.0 && schedule[k] <= 1.0))
            throw ConfigError("schedule values must lie in (0, 1]");
        if (k > 0 && !(schedule[k] > schedule[k - 1]))
            throw ConfigError("schedule must be strictly increasing");
    }
    if (schedule.back() != 1.0) throw ConfigError("schedule must end at t = 1");

    HomotopyResult hr;
    std::vector<std::pair<double, double>> c_hist;
    auto accept = [&](double t, StepOutcome&& step) {
        HomotopyState st;
        st.t = t;
        st.omega_t = step.spec.omega;
        st.omega_tilde_t = step.spec.omega_tilde;
        st.field = step.result.field;
        st.iterations = step.result.iterations;
        st.residual_inf = step.result.residual_inf;
        c_hist.emplace_back(t, st.field.c);
        st.c_history = c_hist;
        hr.iterations.insert(hr.iterations.end(), step.result.history.begin(),
                             step.result.history.end());
        hr.spec = step.spec;
        hr.field = step.result.field;
        hr.history.push_back(std::move(st));
    };

    accept(schedule.front(), solve_at(omega, omega_tilde, model, opts, op, schedule.front(),
                                      nullptr, nullptr));

    for (std::size_t k = 1; k < schedule.size(); ++k) {
        const double target = schedule[k];
        int depth = 0;
        while (hr.history.back().t < target) {
            const HomotopyState& last = hr.history.back();
            const double step_len = (target - schedule[k - 1]) / std::pow(2.0, depth);
            const double t = std::min(target, last.t + step_len);
            try {
                accept(t, solve_at(omega, omega_tilde, model, opts, op, t, &last.field,
                                   &last.omega_tilde_t));
            } catch (const Error& e) {
                if (++depth > opts.max_bisections) {
                    std::ostringstream os;
                    os << "homotopy failed at t = " << t << ": " << e.what();
                    const auto* nc = dynamic_cast<const NonConvergence*>(&e);
                    throw NonConvergence(os.str(), nc ? nc->best_residual() : INFINITY, t);
                }
            }
        }
    }
    return hr;
}

} // namespace cmc
