#pragma once

#include "cmc/domain.hpp"
#include "cmc/types.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <span>
#include <vector>

namespace cmc {

using SparseRM = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Boundary-fitted polar grid over a ConvexDomain.
///
/// Nodes are x(rho_i, phi_j) = peak + rho_i r_b(phi_j) (cos phi_j, sin phi_j)
/// with rho_i = i / n_rho, i = 0..n_rho and phi_j = 2 pi j / n_phi. The pole
/// (i = 0) is one shared node with index 0; node (i, j) for i >= 1 has index
/// 1 + (i-1) n_phi + j. Ring n_rho lies on the boundary.
///
/// Cartesian derivatives are linear in the nodal values and are stored as
/// sparse operators: fourth-order differences in rho (central stencils
/// reflected through the pole, one-sided fourth-order ones near the boundary
/// ring), Fourier differentiation in phi, and the chain rule through the
/// discrete mapping metric. The pole uses a least-squares quadratic fit
/// over the first two rings.
class MappedGrid {
public:
    static constexpr int kMinRho = 4;
    static constexpr int kMinPhi = 8;

    /// Throws DomainError on bad resolutions, RootFindFailure if the boundary
    /// cannot be bracketed along some ray.
    static std::shared_ptr<const MappedGrid> build(const ConvexDomain& domain, int n_rho,
                                                   int n_phi);

    const ConvexDomain& domain() const { return domain_; }
    int n_rho() const { return n_rho_; }
    int n_phi() const { return n_phi_; }
    int size() const { return 1 + n_rho_ * n_phi_; }

    int index(int ring, int col) const {
        return ring == 0 ? 0 : 1 + (ring - 1) * n_phi_ + wrap(col);
    }
    int ring_of(int node) const { return node == 0 ? 0 : 1 + (node - 1) / n_phi_; }
    int col_of(int node) const { return node == 0 ? 0 : (node - 1) % n_phi_; }
    bool is_boundary(int node) const { return ring_of(node) == n_rho_; }
    bool is_interior(int node) const { return !is_boundary(node); }

    double rho(int ring) const { return static_cast<double>(ring) / n_rho_; }
    double phi(int col) const;
    double d_rho() const { return 1.0 / n_rho_; }
    double d_phi() const;

    const Vec2& node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }
    std::span<const Vec2> nodes() const { return nodes_; }
    /// Distance from the peak to the boundary along column j.
    double boundary_radius(int col) const { return r_b_[static_cast<std::size_t>(wrap(col))]; }

    /// Area quadrature weights (trapezoid in rho, periodic trapezoid in phi).
    std::span<const double> weights() const { return weights_; }
    /// Arc-length weights |x_phi| dphi of the boundary ring, indexed by column.
    std::span<const double> arc_weights() const { return arc_weights_; }
    /// Determinant of the discrete mapping Jacobian (zero at the pole).
    std::span<const double> jacobian_det() const { return jac_det_; }

    const SparseRM& dx() const { return dx_; }
    const SparseRM& dy() const { return dy_; }
    const SparseRM& dxx() const { return dxx_; }
    const SparseRM& dxy() const { return dxy_; }
    const SparseRM& dyy() const { return dyy_; }

    /// Largest radial node spacing.
    double spacing() const;
    /// Reference truncation scale spacing()^2 used by the tolerances.
    double grid_tolerance() const { return spacing() * spacing(); }

    /// Parameter coordinates (rho, phi) of a physical point.
    Vec2 parameter_coords(const Vec2& x) const;
    /// Boundary radius along an arbitrary direction (root of h on the ray).
    double ray_radius(double angle) const;

    /// Tensor-product cubic Lagrange interpolation of nodal values in
    /// (rho, phi). Points slightly outside the boundary are extrapolated.
    double interpolate(std::span<const double> values, const Vec2& x) const;
    /// Same, evaluated at parameter coordinates directly.
    double interpolate_param(std::span<const double> values, double rho, double phi) const;

private:
    MappedGrid(const ConvexDomain& domain, int n_rho, int n_phi);
    void build_geometry();
    void build_operators();

    int wrap(int col) const { return ((col % n_phi_) + n_phi_) % n_phi_; }

    ConvexDomain domain_;
    int n_rho_;
    int n_phi_;
    std::vector<double> r_b_;
    std::vector<Vec2> nodes_;
    std::vector<double> weights_;
    std::vector<double> arc_weights_;
    std::vector<double> jac_det_;
    SparseRM dx_, dy_, dxx_, dxy_, dyy_;
};

/// Cartesian derivatives at every node.
struct NodalDerivatives {
    std::vector<Vec2> du;
    std::vector<Mat2> d2u;
};

NodalDerivatives derivatives(const MappedGrid& grid, const Eigen::VectorXd& u);

/// Area integral of nodal values.
double quadrature(const MappedGrid& grid, std::span<const double> integrand);
/// Boundary integral of values given per boundary column (size n_phi).
double boundary_quadrature(const MappedGrid& grid, std::span<const double> integrand);

/// Discrete weighted sum sum_i w_i u_i.
double weighted_sum(const MappedGrid& grid, const Eigen::VectorXd& u);
/// Subtract the weighted mean so that weighted_sum(u) = 0.
void project_mean_zero(const MappedGrid& grid, Eigen::VectorXd& u);

/// Spectral differentiation matrices on an even periodic grid.
Eigen::MatrixXd fourier_d1(int n);
Eigen::MatrixXd fourier_d2(int n);

enum class FieldRole { Primal, Dual };

/// Nodal potential and the constant of the equation on a grid.
struct SolutionField {
    std::shared_ptr<const MappedGrid> grid;
    Eigen::VectorXd u;
    double c = 0.0;
    ModelKind model = ModelKind::Minkowski;
    FieldRole role = FieldRole::Primal;
};

/// Smallest Hessian eigenvalue over interior nodes.
double min_interior_eigenvalue(const MappedGrid& grid, const NodalDerivatives& d);
/// Largest |Du| over all nodes.
double max_gradient_norm(const NodalDerivatives& d);

} // namespace cmc
