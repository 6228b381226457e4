#include "cmc/residual.hpp"

#include "cmc/errors.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

namespace cmc {

namespace {

void check_light_cone(const ConvexDomain& d, double eps_space, const char* role) {
    const double m = max_boundary_norm(d);
    if (!(m <= 1.0 - eps_space)) {
        std::ostringstream os;
        os << role << " must lie strictly inside the unit ball (max |y| = " << m << ")";
        throw DomainError(os.str());
    }
}

} // namespace

double max_boundary_norm(const ConvexDomain& domain) {
    constexpr int kSamples = 2048;
    double m = 0.0;
    for (int k = 0; k < kSamples; ++k)
        m = std::max(m, domain.boundary_point(2.0 * std::numbers::pi * k / kSamples).norm());
    return m;
}

ProblemSpec make_problem(const ConvexDomain& omega, const ConvexDomain& omega_tilde,
                         ModelKind model, int n_rho, int n_phi, OperatorKind op,
                         double eps_space) {
    if (!(eps_space > 0.0 && eps_space < 1.0)) throw DomainError("eps_space must lie in (0, 1)");
    if (model == ModelKind::Minkowski) {
        if (op == OperatorKind::Primal)
            check_light_cone(omega_tilde, eps_space, "target domain");
        else
            check_light_cone(omega, eps_space, "dual grid domain");
    }
    ProblemSpec spec;
    spec.omega = omega;
    spec.omega_tilde = omega_tilde;
    spec.model = model;
    spec.grid = MappedGrid::build(omega, n_rho, n_phi);
    spec.op = op;
    spec.eps_space = eps_space;
    return spec;
}

ProblemSpec reversed(const ProblemSpec& spec, int n_rho, int n_phi) {
    const OperatorKind op =
        spec.op == OperatorKind::Primal ? OperatorKind::Dual : OperatorKind::Primal;
    return make_problem(spec.omega_tilde, spec.omega, spec.model, n_rho, n_phi, op,
                        spec.eps_space);
}

OperatorValue evaluate_operator(const ProblemSpec& spec, const Vec2& x, const PointState& s,
                                bool with_derivatives) {
    OperatorValue out;
    if (spec.op == OperatorKind::Primal) {
        out.value = mean_curvature(s, spec.model, spec.eps_space);
        if (with_derivatives) {
            const auto d = operator_derivatives(s, spec.model, Mat2::Identity(), spec.eps_space);
            out.d_grad = d.g_i;
            out.d_hess = d.g_ij;
        }
        return out;
    }
    const double det = s.d2u.determinant();
    const double scale = s.d2u.squaredNorm();
    if (!(std::abs(det) > 1e-14 * scale) || !std::isfinite(det))
        throw SingularHessian("dual Hessian is numerically singular");
    Mat2 m = s.d2u.inverse();
    m = 0.5 * (m + m.transpose());
    const PointState inv{x, m};
    out.value = -mean_curvature(inv, spec.model, spec.eps_space);
    if (with_derivatives) {
        // d(-G(y, r^{-1})) = G_ij (M dr M)_ij
        const auto d = operator_derivatives(inv, spec.model, Mat2::Identity(), spec.eps_space);
        out.d_hess = m * d.g_ij * m;
    }
    return out;
}

Eigen::VectorXd pack(const SolutionField& field) {
    Eigen::VectorXd z(field.u.size() + 1);
    z.head(field.u.size()) = field.u;
    z[field.u.size()] = field.c;
    return z;
}

void unpack(const Eigen::VectorXd& z, SolutionField& field) {
    const auto n = z.size() - 1;
    field.u = z.head(n);
    field.c = z[n];
}

namespace {

struct RowCoefficients {
    Eigen::VectorXd cx, cy, cxx, cxy, cyy;
};

Eigen::VectorXd assemble(const ProblemSpec& spec, const SolutionField& field,
                         const NodalDerivatives& d, RowCoefficients* coef) {
    const MappedGrid& g = *spec.grid;
    const int n = g.size();
    Eigen::VectorXd r(n + 1);
    if (coef) {
        coef->cx.setZero(n);
        coef->cy.setZero(n);
        coef->cxx.setZero(n);
        coef->cxy.setZero(n);
        coef->cyy.setZero(n);
    }
    for (int k = 0; k < n; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const PointState s{d.du[ks], d.d2u[ks]};
        if (g.is_boundary(k)) {
            if (spec.model == ModelKind::Minkowski && spec.op == OperatorKind::Primal &&
                !(s.du.norm() <= 1.0 - spec.eps_space)) {
                std::ostringstream os;
                os << "spacelike guard violated at node " << k << " (|Du| = " << s.du.norm() << ")";
                throw SpacelikeViolation(os.str(), k, s.du.norm());
            }
            const auto hv = spec.omega_tilde.eval(s.du);
            r[k] = hv.value;
            if (coef) {
                coef->cx[k] = hv.grad.x();
                coef->cy[k] = hv.grad.y();
            }
            continue;
        }
        OperatorValue ov;
        try {
            ov = evaluate_operator(spec, g.node(k), s, coef != nullptr);
        } catch (const SpacelikeViolation& e) {
            std::ostringstream os;
            os << "spacelike guard violated at node " << k << " (|Du| = " << e.grad_norm() << ")";
            throw SpacelikeViolation(os.str(), k, e.grad_norm());
        }
        r[k] = ov.value - field.c;
        if (coef) {
            coef->cx[k] = ov.d_grad.x();
            coef->cy[k] = ov.d_grad.y();
            coef->cxx[k] = ov.d_hess(0, 0);
            coef->cxy[k] = ov.d_hess(0, 1) + ov.d_hess(1, 0);
            coef->cyy[k] = ov.d_hess(1, 1);
        }
    }
    r[n] = weighted_sum(g, field.u);
    return r;
}

void check_field(const ProblemSpec& spec, const SolutionField& field) {
    if (!spec.grid) throw DomainError("problem has no grid");
    if (field.u.size() != spec.grid->size())
        throw DomainError("field size does not match the problem grid");
}

} // namespace

Eigen::VectorXd residual(const ProblemSpec& spec, const SolutionField& field) {
    check_field(spec, field);
    const auto d = derivatives(*spec.grid, field.u);
    return assemble(spec, field, d, nullptr);
}

Linearization linearize(const ProblemSpec& spec, const SolutionField& field) {
    check_field(spec, field);
    const MappedGrid& g = *spec.grid;
    Linearization lin;
    lin.derivs = derivatives(g, field.u);
    RowCoefficients c;
    lin.residual = assemble(spec, field, lin.derivs, &c);

    const SparseRM a = SparseRM(c.cx.asDiagonal() * g.dx()) + SparseRM(c.cy.asDiagonal() * g.dy()) +
                       SparseRM(c.cxx.asDiagonal() * g.dxx()) +
                       SparseRM(c.cxy.asDiagonal() * g.dxy()) +
                       SparseRM(c.cyy.asDiagonal() * g.dyy());
    const int n = g.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * static_cast<std::size_t>(n));
    for (int row = 0; row < n; ++row)
        for (SparseRM::InnerIterator it(a, row); it; ++it)
            trip.emplace_back(row, static_cast<int>(it.col()), it.value());
    for (int k = 0; k < n; ++k) {
        if (g.is_interior(k)) trip.emplace_back(k, n, -1.0);
        const double w = g.weights()[static_cast<std::size_t>(k)];
        if (w != 0.0) trip.emplace_back(n, k, w);
    }
    lin.jacobian.resize(n + 1, n + 1);
    lin.jacobian.setFromTriplets(trip.begin(), trip.end());
    lin.jacobian.makeCompressed();
    return lin;
}

SparseCM jacobian(const ProblemSpec& spec, const SolutionField& field) {
    return linearize(spec, field).jacobian;
}

void write_triplets(std::ostream& os, const SparseCM& m) {
    const auto old = os.precision(17);
    os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    for (int col = 0; col < m.outerSize(); ++col)
        for (SparseCM::InnerIterator it(m, col); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    os.precision(old);
}

void write_residual(std::ostream& os, const Eigen::VectorXd& r) {
    const auto old = os.precision(17);
    for (Eigen::Index k = 0; k < r.size(); ++k) os << k << ' ' << r[k] << '\n';
    os.precision(old);
}

} // namespace cmc
