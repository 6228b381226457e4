#pragma once

#include "cmc/newton.hpp"
#include "cmc/residual.hpp"

#include <vector>

namespace cmc {

/// Potential on a grid over the gradient image, with the x = Du~(y) points
/// found during the transform (empty for a solved dual field).
struct DualField : SolutionField {
    std::vector<Vec2> preimage;
    double max_gap = 0.0;  ///< largest |Du(x) - y| left by the inversion
};

/// u~(y) = x . y - u(x) with Du(x) = y, for every node y of `dual_grid`.
/// Du and D^2u are interpolated from the field's nodal derivatives; each
/// inversion starts at the node whose gradient is nearest to y and runs
/// Newton for at most 30 iterations to |Du(x) - y| <= 1e-12. The additive
/// constant is inherited (no mean-zero projection); c~ is set to -c.
/// Throws InversionFailure carrying the remaining gap.
DualField legendre_transform(const SolutionField& field,
                             const std::shared_ptr<const MappedGrid>& dual_grid);

/// Per node G~(y, D^2u~) - c~ with G~(y, r) = -G(y, r^{-1}). Throws SingularHessian.
Eigen::VectorXd dual_residual(const SolutionField& dual, ModelKind model,
                              double eps_space = kDefaultEpsSpace);

/// Largest |G~ - c~| over interior dual nodes.
double max_dual_deviation(const SolutionField& dual, ModelKind model,
                          double eps_space = kDefaultEpsSpace);

/// Solves the exchanged problem (grid over Omega~, target Omega, operator
/// G~) with the same continuation machinery as the primal solve.
HomotopyResult dual_solve(const ProblemSpec& primal, const HomotopyOptions& opts);

/// max |Du~(Du(x)) - x| over interior primal nodes, with Du~ interpolated
/// on the dual grid.
double involution_error(const SolutionField& primal, const SolutionField& dual);

/// max |det D^2u(x) det D^2u~(Du(x)) - 1| over interior primal nodes.
double hessian_reciprocity_error(const SolutionField& primal, const SolutionField& dual);

/// L_inf distance of two potentials on the same grid after each has its
/// weighted mean removed.
double normalized_distance(const MappedGrid& grid, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b);

/// s_ij = (1/v) g^ij at the node position: the divergence-form weights of the
/// dual operator, with lambda_min(s) >= 1/v in the Minkowski model.
Mat2 dual_weights(const Vec2& y, ModelKind model, double eps_space = kDefaultEpsSpace);

} // namespace cmc
