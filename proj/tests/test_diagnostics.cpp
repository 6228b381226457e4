#include "doctest.h"

#include "cmc/diagnostics.hpp"
#include "cmc/legendre.hpp"
#include "cmc/newton.hpp"
#include "cmc/radial.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace cmc;

namespace {

const ConvexDomain kUnit = ConvexDomain::ball(Vec2(0, 0), 1.0);
const ConvexDomain kHalf = ConvexDomain::ball(Vec2(0, 0), 0.5);

struct Solved {
    ProblemSpec spec;
    SolutionField field;
};

Solved solve(const ConvexDomain& a, const ConvexDomain& b, int n_rho,
             ModelKind model = ModelKind::Minkowski) {
    HomotopyOptions o;
    o.n_rho = n_rho;
    o.n_phi = 2 * n_rho;
    const auto hr = run_homotopy(a, b, model, o);
    return {hr.spec, hr.field};
}

SolutionField quadratic(const ProblemSpec& spec, double lambda, double c) {
    SolutionField f;
    f.grid = spec.grid;
    f.model = spec.model;
    f.c = c;
    f.u.resize(spec.grid->size());
    for (int k = 0; k < spec.grid->size(); ++k) f.u[k] = 0.5 * lambda * spec.grid->node(k).squaredNorm();
    project_mean_zero(*spec.grid, f.u);
    return f;
}

void check_consistent(const DiagnosticsReport& r) {
    bool all = true;
    for (const auto& c : r.checks) {
        INFO(c.name);
        if (c.evaluated) CHECK(c.pass == check_holds(c.value, c.relation, c.bound));
        else CHECK(c.pass);
        all = all && (!c.evaluated || c.pass);
    }
    CHECK(r.all_pass() == all);
}

ConvexDomain random_domain(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec2 c(0.2 * scale * (u(rng) - 0.5), 0.2 * scale * (u(rng) - 0.5));
    if (u(rng) < 0.5) return ConvexDomain::ball(c, scale * (0.3 + 0.5 * u(rng)));
    return ConvexDomain::ellipse(c, scale * (0.3 + 0.5 * u(rng)), scale * (0.3 + 0.5 * u(rng)));
}

} // namespace

TEST_CASE("lambda bounds: closed-form instances") {
    const auto b = lambda_bounds(kUnit, kHalf);
    CHECK(b.lambda1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b.lambda2 == doctest::Approx(2 * 0.5 / std::sqrt(0.75)).epsilon(1e-9));
    const auto e = lambda_bounds(kUnit, kUnit, 2, ModelKind::Euclidean);
    CHECK(e.lambda1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.lambda2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    double prev = b.lambda1;
    for (double r : {0.1, 0.01, 0.001}) {
        const double l1 = lambda_bounds(kUnit, ConvexDomain::ball(Vec2(0, 0), r)).lambda1;
        CHECK(l1 < prev);
        prev = l1;
    }
    CHECK(prev <= 2e-3);
}

TEST_CASE("lambda1 <= lambda2 on random pairs") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_domain(rng, 2.0);
        const auto b = random_domain(rng, 1.0);
        const auto mk = lambda_bounds(a, b, 2, ModelKind::Minkowski);
        const auto eu = lambda_bounds(a, b, 2, ModelKind::Euclidean);
        CHECK(mk.lambda1 <= mk.lambda2);
        CHECK(eu.lambda1 <= eu.lambda2);
    }
}

TEST_CASE("radial instance: every quantity against the closed form") {
    const auto s = solve(kUnit, kHalf, 32);
    const auto sol = make_radial(2, 1.0, 0.5, ModelKind::Minkowski);
    const auto r = full_report(s.spec, s.field);
    check_consistent(r);
    CHECK(r.all_pass());
    CHECK(std::abs(r.c - r.lambda2) <= 2e-3);
    CHECK(r.obliqueness_min == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.mass_balance_rel_err <= 0.02);
    CHECK(r.flux_identity_rel_err <= 0.01);
    CHECK(std::abs(r.grad_max - 0.5) <= s.spec.grid->grid_tolerance());
    CHECK(r.jacobian_sigma_min > 0.0);
    CHECK_FALSE(r.dual_consistency.has_value());
    CHECK_FALSE(r.find("dual_consistency")->evaluated);

    // Eigenvalues of D^2u are u'' = 4c / (4 + c^2 r^2)^{3/2} and
    // u'/r = c / (4 + c^2 r^2)^{1/2} >= u''; both decrease with r, so the
    // range over interior nodes is [u''(r_max), u''(0)].
    const double r_max = 1.0 - s.spec.grid->d_rho();
    const double lo = radial_profile(sol, r_max).d2u;
    const double hi = radial_profile(sol, 0.0).d2u;
    CHECK(r.hessian_eig_min == doctest::Approx(lo).epsilon(0.02));
    CHECK(r.hessian_eig_max == doctest::Approx(hi).epsilon(0.02));

    const auto pin = hessian_pinching(s.field);
    CHECK(pin.min_eig <= pin.min_half_trace);
    CHECK(pin.max_half_trace <= pin.max_eig);
}

TEST_CASE("quadratic with a scaled target: mass balance and divergence theorem") {
    const double lambda = 0.5;
    const auto spec = make_problem(kUnit, ConvexDomain::ball(Vec2(0, 0), lambda), ModelKind::Minkowski, 32, 64);
    const auto f = quadratic(spec, lambda, 1.0);
    CHECK(mass_balance(spec, f) <= 1e-3);
    CHECK(divergence_consistency(spec, f) <= 1e-2);
    const auto ob = obliqueness_profile(spec, f);
    CHECK(ob.min == doctest::Approx(1.0).epsilon(1e-9));

    const auto ellipse = make_problem(ConvexDomain::ellipse(Vec2(0, 0), 1.0, 0.7),
                                      ConvexDomain::ellipse(Vec2(0, 0), 0.5, 0.35), ModelKind::Euclidean,
                                      24, 48);
    CHECK(mass_balance(ellipse, quadratic(ellipse, lambda, 1.0)) <= 1e-3);
    CHECK(divergence_consistency(ellipse, quadratic(ellipse, 0.3, 1.0)) <= 1e-2);
}

TEST_CASE("mass balance and flux identity converge on the radial instance") {
    double pm = 0.0, pf = 0.0;
    for (int n : {8, 16, 32}) {
        const auto s = solve(kUnit, kHalf, n);
        const double m = mass_balance(s.spec, s.field);
        const double f = flux_identity(s.spec, s.field);
        INFO("n = " << n << " mass " << m << " flux " << f);
        if (pm > 0.0) {
            CHECK(std::log2(pm / m) >= 1.8);
            CHECK(std::log2(pf / f) >= 1.8);
        }
        pm = m;
        pf = f;
    }
}

TEST_CASE("Euclidean radial instance passes") {
    const auto s = solve(kUnit, kUnit, 24, ModelKind::Euclidean);
    const auto r = full_report(s.spec, s.field);
    check_consistent(r);
    CHECK(r.all_pass());
    CHECK_FALSE(r.find("spacelike")->evaluated);
    CHECK(std::abs(r.c - r.lambda2) <= 2e-3);
}

TEST_CASE("ellipse instances pass") {
    for (int which = 0; which < 2; ++which) {
        const ConvexDomain e = ConvexDomain::ellipse(Vec2(0, 0), which ? 0.6 : 1.0, which ? 0.5 : 0.8);
        const ConvexDomain b = which ? kUnit : ConvexDomain::ball(Vec2(0, 0), 0.4);
        const auto s = which ? solve(b, e, 24) : solve(e, b, 24);
        const auto r = full_report(s.spec, s.field);
        INFO("instance " << which);
        check_consistent(r);
        CHECK(r.all_pass());
        CHECK(r.obliqueness_min >= 0.05);
        CHECK(r.c >= r.lambda1 - r.lambda_slack);
        CHECK(r.c <= r.lambda2 + r.lambda_slack);
    }
}

TEST_CASE("negative controls") {
    const auto s = solve(kUnit, kHalf, 16);
    SUBCASE("noise") {
        std::mt19937 rng(23);
        std::normal_distribution<double> noise(0.0, 1e-2);
        SolutionField bad = s.field;
        for (int k = 0; k < bad.u.size(); ++k) bad.u[k] += noise(rng);
        const auto r = full_report(s.spec, bad);
        check_consistent(r);
        CHECK_FALSE(r.all_pass());
        CHECK_FALSE(r.find("residual")->pass);
    }
    SUBCASE("concave field") {
        const auto f = quadratic(s.spec, -0.3, 0.0);
        const auto ob = obliqueness_profile(s.spec, f);
        CHECK(ob.min <= 0.0);
        const auto r = full_report(s.spec, f);
        check_consistent(r);
        CHECK_FALSE(r.find("obliqueness")->pass);
        CHECK_FALSE(r.find("convexity")->pass);
    }
    SUBCASE("outside the light cone") {
        const auto f = quadratic(s.spec, 1.5, 1.0);
        DiagnosticsReport r;
        CHECK_NOTHROW(r = full_report(s.spec, f));
        check_consistent(r);
        CHECK_FALSE(r.find("spacelike")->pass);
        CHECK(std::isnan(r.residual_inf));
    }
}

TEST_CASE("dual consistency entry") {
    const auto s = solve(kUnit, kHalf, 16);
    HomotopyOptions o;
    o.n_rho = 32;
    o.n_phi = 64;
    const auto d = dual_solve(s.spec, o);
    const auto r = full_report(s.spec, s.field, &d.field);
    check_consistent(r);
    REQUIRE(r.dual_consistency.has_value());
    CHECK(*r.dual_consistency == std::abs(d.field.c + s.field.c));
    const double exact = radial_constant(2, 1.0, 0.5, ModelKind::Minkowski);
    CHECK(r.find("dual_consistency")->bound >= 2.0 * std::abs(s.field.c - exact));
    CHECK(r.find("dual_consistency")->pass);
    CHECK(exact_constant(s.spec).value() == exact);
    CHECK(exact_constant(d.spec).value() == -exact);
    CHECK_FALSE(exact_constant(make_problem(kUnit, ConvexDomain::ball(Vec2(0.1, 0), 0.3),
                                            ModelKind::Minkowski, 8, 16))
                    .has_value());
}

TEST_CASE("report serialization") {
    const auto s = solve(kUnit, kHalf, 12);
    const auto r = full_report(s.spec, s.field);
    const auto j = to_json(r);
    for (const char* key : {"lambda1", "lambda2", "c", "obliqueness_min", "hessian_eig_range", "grad_max",
                            "mass_balance_rel_err", "flux_identity_rel_err", "dual_consistency", "checks"})
        CHECK(j.contains(key));
    CHECK(j["dual_consistency"].is_null());
    CHECK(to_json(report_from_json(j)) == j);
    CHECK(to_json(report_from_json(nlohmann::json::parse(j.dump()))) == j);

    std::ostringstream os;
    print_table(os, r);
    const std::string t = os.str();
    CHECK(t.find("mass_balance") != std::string::npos);
    CHECK(t.find("not evaluated") != std::string::npos);
    CHECK(t.find("all checks pass") != std::string::npos);
}
