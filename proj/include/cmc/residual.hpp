#pragma once

#include "cmc/curvature.hpp"
#include "cmc/domain.hpp"
#include "cmc/grid.hpp"
#include "cmc/types.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>

namespace cmc {

/// Primal: G(Du, D^2u) = c on the grid domain with h_target(Du) = 0 on its
/// boundary. Dual: -G(y, [D^2u]^{-1}) = c, the same system for the Legendre
/// transform with the node position y in the gradient slot.
enum class OperatorKind { Primal, Dual };

/// A discretized second boundary value problem.
///
/// `omega` is the domain carrying the grid and `omega_tilde` the prescribed
/// gradient image. For a dual problem these are the primal Omega-tilde and
/// Omega respectively.
struct ProblemSpec {
    ConvexDomain omega = ConvexDomain::ball(Vec2::Zero(), 1.0);
    ConvexDomain omega_tilde = ConvexDomain::ball(Vec2::Zero(), 0.5);
    ModelKind model = ModelKind::Minkowski;
    std::shared_ptr<const MappedGrid> grid;
    OperatorKind op = OperatorKind::Primal;
    double eps_space = kDefaultEpsSpace;
};

/// Builds and validates a problem. Throws DomainError if the Minkowski pair
/// violates the light-cone hypothesis (the primal target, or for a dual
/// problem the grid domain, must lie in |y| <= 1 - eps_space).
ProblemSpec make_problem(const ConvexDomain& omega, const ConvexDomain& omega_tilde,
                         ModelKind model, int n_rho, int n_phi,
                         OperatorKind op = OperatorKind::Primal,
                         double eps_space = kDefaultEpsSpace);

/// Same pair with the roles of the two domains exchanged and the operator
/// switched, on a fresh grid over the former target.
ProblemSpec reversed(const ProblemSpec& spec, int n_rho, int n_phi);

/// Largest |y| over densely sampled boundary points.
double max_boundary_norm(const ConvexDomain& domain);

/// Pointwise operator value and its derivatives in the gradient and Hessian
/// slots (Hessian slot entries taken as independent).
struct OperatorValue {
    double value = 0.0;
    Vec2 d_grad = Vec2::Zero();
    Mat2 d_hess = Mat2::Zero();
};

/// Throws SpacelikeViolation (Minkowski), SingularHessian (dual).
OperatorValue evaluate_operator(const ProblemSpec& spec, const Vec2& x, const PointState& s,
                                bool with_derivatives = true);

/// Unknown vector layout: nodal u followed by c.
Eigen::VectorXd pack(const SolutionField& field);
void unpack(const Eigen::VectorXd& z, SolutionField& field);

/// Entries: interior nodes G - c, boundary ring h_target(Du), last the
/// weighted sum of u. Throws SpacelikeViolation with the offending node.
Eigen::VectorXd residual(const ProblemSpec& spec, const SolutionField& field);

using SparseCM = Eigen::SparseMatrix<double>;

/// Analytic Jacobian of `residual` with respect to (u, c).
SparseCM jacobian(const ProblemSpec& spec, const SolutionField& field);

struct Linearization {
    Eigen::VectorXd residual;
    SparseCM jacobian;
    NodalDerivatives derivs;
};

/// Residual, Jacobian and nodal derivatives from one pass.
Linearization linearize(const ProblemSpec& spec, const SolutionField& field);

/// Debug dump: header "rows cols nnz" then one "row col value" line per entry.
void write_triplets(std::ostream& os, const SparseCM& m);
/// Residual dump: one "row value" line per entry.
void write_residual(std::ostream& os, const Eigen::VectorXd& r);

} // namespace cmc
