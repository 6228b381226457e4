#pragma once

#include "cmc/radial.hpp"
#include "cmc/residual.hpp"

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace cmc {

struct SolveOptions {
    double tol_residual = 1e-10;  ///< on ||F||_inf / (1 + |c|)
    int max_newton = 40;
    double armijo_factor = 0.5;
    double armijo_c = 1e-4;
    double eps_convexity = 1e-8;
    double eps_space = kDefaultEpsSpace;
    double min_step = 1e-12;
    /// Progress log sink; one line per Newton iteration. Not owned.
    std::ostream* log = nullptr;

    /// Throws ConfigError on non-positive values or a factor outside (0, 1).
    void validate() const;
};

/// One accepted Newton iterate (iter 0 is the initial field).
struct IterationRecord {
    double t = 1.0;
    int iter = 0;
    double residual_inf = 0.0;
    double alpha = 0.0;
    double c = 0.0;
    double min_eig = 0.0;
    double max_grad = 0.0;
};

/// Writes "newton t=<t> iter=<k> res=<||F||_inf> alpha=<step> c=<c>" with
/// nine significant digits.
void write_progress(std::ostream& os, const IterationRecord& rec);

/// Convexity and light-cone guards evaluated on nodal derivatives.
struct Admissibility {
    double min_eig = 0.0;   ///< smallest Hessian eigenvalue, interior nodes
    double max_grad = 0.0;  ///< largest |Du| over all nodes
    bool convex = false;
    bool spacelike = false;
    bool ok() const { return convex && spacelike; }
};

/// The light-cone guard only constrains primal Minkowski fields; dual fields
/// carry the node position in the gradient slot of the operator.
Admissibility admissibility(const ProblemSpec& spec, const NodalDerivatives& d,
                            const SolveOptions& opts);

struct NewtonResult {
    SolutionField field;
    int iterations = 0;
    double residual_inf = 0.0;
    std::vector<IterationRecord> history;
};

/// Damped Newton on the augmented system for (u, c). The returned field is
/// admissible, mean-zero and meets the residual tolerance.
/// Throws ConvexityLoss / SpacelikeViolation for an inadmissible initial
/// field, NonConvergence when the budget runs out or the line search fails.
NewtonResult newton_solve(const ProblemSpec& spec, const SolutionField& initial,
                          const SolveOptions& opts, double t_label = 1.0);

struct StepResult {
    SolutionField field;
    double alpha = 0.0;
    Eigen::VectorXd residual;
    Admissibility guards;
    int trials = 0;
};

/// Largest alpha in {1, 1/2, 1/4, ...} with Armijo decrease of ||F||_2 and an
/// admissible field. Throws StepRejection below opts.min_step.
StepResult damped_step(const ProblemSpec& spec, const SolutionField& field,
                       const Eigen::VectorXd& current_residual, const Eigen::VectorXd& direction,
                       const SolveOptions& opts);

/// Newton direction: solves J d = -F with row equilibration and a sparse LU.
/// Throws SingularHessian if the factorization fails.
Eigen::VectorXd newton_direction(const SparseCM& jacobian, const Eigen::VectorXd& residual);

/// Smallest singular value of the Jacobian estimated by inverse iteration on
/// J^T J (diagnostic only).
double smallest_singular_value(const SparseCM& jacobian, int iterations = 30);

// Continuation ---------------------------------------------------------------

struct HomotopyOptions {
    int n_rho = 32;
    int n_phi = 64;
    /// Increasing t values ending at 1; empty means uniform from t_min.
    std::vector<double> schedule;
    int steps = 12;
    double t_min = 0.0;  ///< 0 selects default_t_min
    int max_bisections = 4;
    int max_step_newton = 15;
    /// Seed of the first step; unset picks Radial for primal problems and
    /// Auto for dual ones (the fitted radial profile needs heavy damping there).
    std::optional<SeedStrategy> anchor_seed;
    SolveOptions solve;
};

struct HomotopyState {
    double t = 1.0;
    ConvexDomain omega_t = ConvexDomain::ball(Vec2::Zero(), 1.0);
    ConvexDomain omega_tilde_t = ConvexDomain::ball(Vec2::Zero(), 0.5);
    SolutionField field;
    int iterations = 0;
    double residual_inf = 0.0;
    std::vector<std::pair<double, double>> c_history;
};

struct HomotopyResult {
    SolutionField field;
    ProblemSpec spec;  ///< problem at t = 1
    std::vector<HomotopyState> history;
    std::vector<IterationRecord> iterations;
};

/// Smallest t for which both sub-level sets hold a 6 x 12 node grid at the
/// spacing of the target resolution, never below kSublevelFloor.
double default_t_min(const ConvexDomain& omega, const ConvexDomain& omega_tilde, int n_rho);

/// Uniform schedule of `steps` values from t_min to 1.
std::vector<double> uniform_schedule(double t_min, int steps);

/// Carries a field to the grid of another (sub-level) pair: the affine part
/// y_p . (x - x_p) is removed, the remainder interpolated in (rho, phi) and
/// scaled by the product of the two domain size ratios, the affine part of
/// the new pair restored and the mean removed. c scales by the ratio of
/// target to domain size change.
SolutionField transfer_field(const SolutionField& from, const ConvexDomain& from_target,
                             const ProblemSpec& to);

/// Continuation through the sub-level pairs (Omega_t, Omega~_t). Ball pairs
/// reduce to a single radial-seeded solve. Throws NonConvergence with the
/// failing t once bisection is exhausted.
HomotopyResult run_homotopy(const ConvexDomain& omega, const ConvexDomain& omega_tilde,
                            ModelKind model, const HomotopyOptions& opts,
                            OperatorKind op = OperatorKind::Primal);

} // namespace cmc
