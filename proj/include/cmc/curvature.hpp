#pragma once

#include "cmc/types.hpp"

#include <span>
#include <vector>

namespace cmc {

inline constexpr double kDefaultEpsSpace = 1e-6;

/// Gradient and Hessian of the potential at one point.
struct PointState {
    Vec2 du = Vec2::Zero();
    Mat2 d2u = Mat2::Zero();
};

/// Induced metric of the graph and its square roots.
///
/// Minkowski: v = sqrt(1-|p|^2), g = I - p p^T.
/// Euclidean: v = sqrt(1+|p|^2), g = I + p p^T.
struct MetricQuantities {
    double v = 1.0;
    Mat2 g_lower;  ///< g_ij
    Mat2 g_upper;  ///< g^ij
    Mat2 b_lower;  ///< b_ij, square root of g_ij
    Mat2 b_upper;  ///< b^ij, square root of g^ij
};

/// Throws SpacelikeViolation when the Minkowski state has |du| > 1 - eps_space.
MetricQuantities metric_quantities(const Vec2& du, ModelKind model,
                                   double eps_space = kDefaultEpsSpace);

/// a_ij = (1/v) b^ik u_kl b^lj; its eigenvalues are the principal curvatures.
Mat2 shape_matrix(const PointState& s, ModelKind model, double eps_space = kDefaultEpsSpace);

/// H = trace(a).
double mean_curvature(const PointState& s, ModelKind model, double eps_space = kDefaultEpsSpace);

/// Divergence-form weights s_ij with div(Du/v) = s_ij u_ij.
Mat2 divergence_weights(const Vec2& du, ModelKind model, double eps_space = kDefaultEpsSpace);

/// H through the divergence form, independent of the b-tensor route.
double mean_curvature_divergence_form(const PointState& s, ModelKind model,
                                      double eps_space = kDefaultEpsSpace);

/// Eigenvalues of a_ij, ascending.
Vec2 principal_curvatures(const PointState& s, ModelKind model,
                          double eps_space = kDefaultEpsSpace);

/// Derivatives of G(p, r) = F(a(p, r)) in the Hessian slot (g_ij, symmetric,
/// entries taken with r_ij and r_ji independent) and the gradient slot (g_i).
struct OperatorDerivatives {
    Mat2 g_ij;
    Vec2 g_i;
};

/// `f_kl` is dF/da_kl; the mean curvature operator uses the identity.
OperatorDerivatives operator_derivatives(const PointState& s, ModelKind model,
                                         const Mat2& f_kl = Mat2::Identity(),
                                         double eps_space = kDefaultEpsSpace);

/// Lower and upper factors with sigma1 * n <= trace(G_ij) <= sigma2 * n at a
/// given gradient, derived from the range of 1/v and the eigenvalues of b^ij.
struct TraceFactors {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};
TraceFactors trace_factors(const Vec2& du, ModelKind model, double eps_space = kDefaultEpsSpace);

/// Structural identities of F(kappa) = sum kappa_i on the positive cone.
struct FStructureReport {
    double f = 0.0;
    double euler_sum = 0.0;        ///< sum dF/dk_i * k_i
    double derivative_sum = 0.0;   ///< sum dF/dk_i
    double hessian_max_abs = 0.0;  ///< largest |d2F/dk_i dk_j|
    bool homogeneity_holds = false;
    bool derivative_sum_is_n = false;
    bool concave = false;
};
FStructureReport f_structure_check(std::span<const double> kappa);

} // namespace cmc
