#include "doctest.h"

#include "cmc/diagnostics.hpp"
#include "cmc/errors.hpp"
#include "cmc/legendre.hpp"
#include "cmc/newton.hpp"
#include "cmc/radial.hpp"

#include <cmath>
#include <regex>
#include <sstream>

using namespace cmc;

namespace {

const ConvexDomain kUnit = ConvexDomain::ball(Vec2(0, 0), 1.0);
const ConvexDomain kHalf = ConvexDomain::ball(Vec2(0, 0), 0.5);
const ConvexDomain kEllipse = ConvexDomain::ellipse(Vec2(0, 0), 1.0, 0.8);
const ConvexDomain kSmall = ConvexDomain::ball(Vec2(0, 0), 0.4);

SolutionField quadratic(const ProblemSpec& spec, double alpha, double c) {
    SolutionField f;
    f.grid = spec.grid;
    f.model = spec.model;
    f.c = c;
    f.u.resize(spec.grid->size());
    for (int k = 0; k < spec.grid->size(); ++k) f.u[k] = 0.5 * alpha * spec.grid->node(k).squaredNorm();
    return f;
}

void check_guards(const std::vector<IterationRecord>& hist, const SolveOptions& opts, bool spacelike) {
    for (const auto& rec : hist) {
        INFO("t = " << rec.t << " iter " << rec.iter);
        CHECK(rec.min_eig >= opts.eps_convexity);
        if (spacelike) CHECK(rec.max_grad <= 1.0 - opts.eps_space);
    }
}

} // namespace

TEST_CASE("options validation") {
    SolveOptions o;
    CHECK_NOTHROW(o.validate());
    o.armijo_factor = 1.5;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = SolveOptions{};
    o.max_newton = 0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = SolveOptions{};
    o.tol_residual = -1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
}

TEST_CASE("radial Minkowski pair converges from the exact nodal profile") {
    const auto spec = make_problem(kUnit, kHalf, ModelKind::Minkowski, 16, 32);
    const SolveOptions opts;
    const auto res = newton_solve(spec, seed_field(spec, SeedStrategy::Radial), opts);
    CHECK(res.iterations <= 3);
    CHECK(res.residual_inf <= opts.tol_residual * (1 + std::abs(res.field.c)));
    CHECK(std::abs(res.field.c - 1.1547005) <= 1e-3);
    CHECK(std::abs(weighted_sum(*spec.grid, res.field.u)) <= 1e-12);
    check_guards(res.history, opts, true);
}

TEST_CASE("Euclidean unit pair") {
    const auto spec = make_problem(kUnit, kUnit, ModelKind::Euclidean, 32, 64);
    const auto res = newton_solve(spec, seed_field(spec), SolveOptions{});
    CHECK(std::abs(res.field.c - 1.4142136) <= 1e-3);
}

TEST_CASE("two seeds reach the same normalized solution") {
    SUBCASE("ball pair, radial and a plain quadratic") {
        const auto spec = make_problem(kUnit, kHalf, ModelKind::Minkowski, 16, 32);
        const auto a = newton_solve(spec, seed_field(spec, SeedStrategy::Radial), SolveOptions{});
        const auto b = newton_solve(spec, quadratic(spec, 0.45, 1.0), SolveOptions{});
        CHECK(b.iterations > a.iterations);
        CHECK(normalized_distance(*spec.grid, a.field.u, b.field.u) <= 1e-6);
        CHECK(std::abs(a.field.c - b.field.c) <= 1e-6);
    }
    SUBCASE("ellipse to ball, fitted radial and quadratic") {
        const auto spec = make_problem(kEllipse, kSmall, ModelKind::Minkowski, 16, 32);
        const auto a = newton_solve(spec, seed_field(spec, SeedStrategy::Radial), SolveOptions{});
        const auto b = newton_solve(spec, seed_field(spec, SeedStrategy::Quadratic), SolveOptions{});
        CHECK(normalized_distance(*spec.grid, a.field.u, b.field.u) <= 1e-6);
        CHECK(std::abs(a.field.c - b.field.c) <= 1e-6);
    }
}

TEST_CASE("every accepted iterate satisfies the guards") {
    const auto spec = make_problem(ConvexDomain::ellipse(Vec2(0.1, 0), 1.0, 0.8),
                                   ConvexDomain::ball(Vec2(0, 0.05), 0.4), ModelKind::Minkowski, 16, 32);
    const SolveOptions opts;
    const auto res = newton_solve(spec, seed_field(spec, SeedStrategy::Quadratic), opts);
    CHECK(res.history.size() == static_cast<std::size_t>(res.iterations + 1));
    check_guards(res.history, opts, true);
    for (std::size_t k = 1; k < res.history.size(); ++k) {
        CHECK(res.history[k].alpha > 0.0);
        CHECK(res.history[k].alpha <= 1.0);
    }
}

TEST_CASE("damped step shortens an oversized direction") {
    const auto spec = make_problem(kEllipse, kSmall, ModelKind::Minkowski, 12, 24);
    const SolveOptions opts;
    const auto f = seed_field(spec, SeedStrategy::Quadratic);
    const auto lin = linearize(spec, f);
    const Eigen::VectorXd dir = newton_direction(lin.jacobian, lin.residual);
    const auto full = damped_step(spec, f, lin.residual, dir, opts);
    const auto big = damped_step(spec, f, lin.residual, 100.0 * dir, opts);
    CHECK(big.alpha < 1.0);
    CHECK(big.trials > 1);
    CHECK(big.guards.ok());
    CHECK(big.residual.norm() < lin.residual.norm());
    CHECK(full.alpha > big.alpha);

    // The reversed Newton direction is an ascent direction of ||F||^2, so no
    // step length passes the Armijo test.
    CHECK_THROWS_AS(damped_step(spec, f, lin.residual, -dir, opts), StepRejection);
}

TEST_CASE("inadmissible start and exhausted budget") {
    const auto spec = make_problem(kEllipse, kSmall, ModelKind::Minkowski, 12, 24);
    CHECK_THROWS_AS(newton_solve(spec, quadratic(spec, -0.2, 0.0), SolveOptions{}), ConvexityLoss);
    CHECK_THROWS_AS(newton_solve(spec, quadratic(spec, 1.1, 0.0), SolveOptions{}), SpacelikeViolation);
    SolveOptions tight;
    tight.max_newton = 1;
    try {
        newton_solve(spec, seed_field(spec, SeedStrategy::Quadratic), tight, 0.75);
        FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
        CHECK(e.best_residual() > 0.0);
        CHECK(e.t() == 0.75);
    }
}

TEST_CASE("progress log format") {
    std::ostringstream os;
    const auto spec = make_problem(kUnit, kHalf, ModelKind::Minkowski, 8, 16);
    SolveOptions opts;
    opts.log = &os;
    const auto res = newton_solve(spec, quadratic(spec, 0.45, 1.0), opts, 0.5);
    std::istringstream is(os.str());
    const std::regex line(R"(newton t=\S+ iter=\d+ res=\S+ alpha=\S+ c=\S+)");
    std::string l;
    int n = 0;
    while (std::getline(is, l)) {
        CHECK(std::regex_match(l, line));
        CHECK(l.rfind("newton t=0.5 iter=" + std::to_string(n) + " ", 0) == 0);
        ++n;
    }
    CHECK(n == res.iterations + 1);
}

TEST_CASE("smallest singular value") {
    const auto spec = make_problem(kUnit, kHalf, ModelKind::Minkowski, 8, 16);
    const auto res = newton_solve(spec, seed_field(spec), SolveOptions{});
    const double s = smallest_singular_value(jacobian(spec, res.field));
    CHECK(s > 1e-6);
    // Oracle: dense SVD of the same matrix.
    const Eigen::MatrixXd dense(jacobian(spec, res.field));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
    CHECK(s == doctest::Approx(svd.singularValues().minCoeff()).epsilon(1e-6));

    SparseCM singular(3, 3);
    singular.insert(0, 0) = 1.0;
    singular.insert(1, 1) = 2.0;
    CHECK(smallest_singular_value(singular) == 0.0);
}

TEST_CASE("transfer of an exact quadratic between homothetic ball pairs") {
    const double lambda = 0.5, t = 0.3;
    const auto small = make_problem(sublevel_domain(kUnit, t), sublevel_domain(kHalf, t),
                                    ModelKind::Minkowski, 12, 24);
    const auto full = make_problem(kUnit, kHalf, ModelKind::Minkowski, 16, 32);
    auto from = quadratic(small, lambda, 0.8);
    const auto to = transfer_field(from, small.omega_tilde, full);
    auto expect = quadratic(full, lambda, 0.8);
    project_mean_zero(*full.grid, expect.u);
    CHECK((to.u - expect.u).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(to.c == doctest::Approx(0.8));
}

TEST_CASE("schedule helpers") {
    const auto s = uniform_schedule(0.25, 4);
    REQUIRE(s.size() == 4);
    CHECK(s.front() == 0.25);
    CHECK(s.back() == 1.0);
    for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k] - s[k - 1] == doctest::Approx(0.25));
    const double tm = default_t_min(kEllipse, kSmall, 32);
    CHECK(tm >= kSublevelFloor);
    CHECK(tm <= 1.0);
    // Coarser target grids need a larger anchor.
    CHECK(default_t_min(kEllipse, kSmall, 16) > tm);
}

TEST_CASE("homotopy on a ball pair is a single solve") {
    HomotopyOptions o;
    o.n_rho = 12;
    o.n_phi = 24;
    const auto hr = run_homotopy(kUnit, kHalf, ModelKind::Minkowski, o);
    REQUIRE(hr.history.size() == 1);
    CHECK(hr.history[0].t == 1.0);
    CHECK(std::abs(hr.field.c - 1.1547005) <= 5e-3);
}

TEST_CASE("homotopy rejects a bad schedule") {
    HomotopyOptions o;
    o.n_rho = 8;
    o.n_phi = 16;
    o.schedule = {0.5, 0.4, 1.0};
    CHECK_THROWS_AS(run_homotopy(kEllipse, kSmall, ModelKind::Minkowski, o), ConfigError);
    o.schedule = {0.5, 0.9};
    CHECK_THROWS_AS(run_homotopy(kEllipse, kSmall, ModelKind::Minkowski, o), ConfigError);
}

TEST_CASE("homotopy on Ellipse to Ball: step budget, guards and c bounds") {
    HomotopyOptions o;
    o.n_rho = 16;
    o.n_phi = 32;
    const auto hr = run_homotopy(kEllipse, kSmall, ModelKind::Minkowski, o);
    CHECK(hr.history.size() >= 2);
    CHECK(hr.history.back().t == 1.0);
    for (const auto& st : hr.history) {
        INFO("t = " << st.t);
        CHECK(st.iterations <= o.max_step_newton);
        ProblemSpec sp;
        sp.omega = st.omega_t;
        sp.omega_tilde = st.omega_tilde_t;
        sp.grid = st.field.grid;
        const auto lb = lambda_bounds(st.omega_t, st.omega_tilde_t);
        const double slack = 3.0 * flux_identity(sp, st.field) * std::abs(st.field.c);
        CHECK(st.field.c >= lb.lambda1 - slack);
        CHECK(st.field.c <= lb.lambda2 + slack);
    }
    check_guards(hr.iterations, o.solve, true);
    // c(t) history is carried along and ends at the final constant.
    CHECK(hr.history.back().c_history.size() == hr.history.size());
    CHECK(hr.history.back().c_history.back().second == hr.field.c);
}
