#pragma once

#include "cmc/curvature.hpp"
#include "cmc/grid.hpp"
#include "cmc/types.hpp"

namespace cmc {

struct ProblemSpec;

/// Radially symmetric solution on B(0, r0) with gradient image B(0, t0).
///
/// With p = u'/sqrt(1 -+ u'^2) the equation reduces to p' + (n-1) p / r = c,
/// whose regular solution is p = c r / n. The boundary condition u'(r0) = t0
/// then fixes c.
struct RadialSolution {
    int n = 2;
    double r0 = 1.0;
    double t0 = 0.5;
    ModelKind model = ModelKind::Minkowski;
    double c = 0.0;
};

/// Minkowski c = n t0 / (sqrt(1 - t0^2) r0), Euclidean c = n t0 / (sqrt(1 + t0^2) r0).
/// Throws DomainError on r0 <= 0, t0 <= 0, n < 1, or Minkowski t0 >= 1.
double radial_constant(int n, double r0, double t0, ModelKind model);

RadialSolution make_radial(int n, double r0, double t0, ModelKind model);

struct RadialValues {
    double u = 0.0;    ///< u(r) - u(0)
    double du = 0.0;   ///< u'(r)
    double d2u = 0.0;  ///< u''(r)
};

/// Closed-form profile; throws DomainError for r outside [0, r0].
RadialValues radial_profile(const RadialSolution& sol, double r);

/// Cartesian gradient and Hessian of the profile at offset x from the centre (n = 2).
PointState radial_point_state(const RadialSolution& sol, const Vec2& x);

/// Integrates p' = c - (n-1) p / r with classical RK4 from p(0) = 0 and
/// returns max |p - c r / n| over the steps.
double ode_crosscheck(const RadialSolution& sol, int steps);

/// Nodal values U(|x - centre|) + shift . (x - centre) on a grid, not normalized.
Eigen::VectorXd radial_nodal_values(const RadialSolution& sol, const MappedGrid& grid,
                                    const Vec2& centre, const Vec2& shift = Vec2::Zero());

enum class SeedStrategy { Auto, Radial, Quadratic };

/// Initial guess for a (primal or dual) problem. Ball pairs get the exact
/// radial profile translated in gradient space (Auto or Radial). Radial on
/// other pairs uses the profile of the circumscribed ball of the grid domain
/// and the inscribed ball of the target. Quadratic (the Auto choice for other
/// pairs) is 1/2 alpha |x - x_p|^2 + y_c . (x - x_p) with alpha halved until the
/// gradient image lies inside the target. Throws SeedFailure.
SolutionField seed_field(const ProblemSpec& spec, SeedStrategy strategy = SeedStrategy::Auto);

} // namespace cmc
