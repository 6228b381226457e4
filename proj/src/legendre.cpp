#include "cmc/legendre.hpp"

#include "cmc/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace cmc {

namespace {

// Cubic interpolation of a field and its nodal derivatives at arbitrary points.
class FieldInterpolant {
public:
    FieldInterpolant(const MappedGrid& grid, const Eigen::VectorXd& u) : grid_(grid) {
        const auto d = derivatives(grid, u);
        const auto n = static_cast<std::size_t>(grid.size());
        for (auto& c : comp_) c.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            comp_[0][k] = u[static_cast<Eigen::Index>(k)];
            comp_[1][k] = d.du[k].x();
            comp_[2][k] = d.du[k].y();
            comp_[3][k] = d.d2u[k](0, 0);
            comp_[4][k] = d.d2u[k](0, 1);
            comp_[5][k] = d.d2u[k](1, 1);
        }
        du_ = d.du;
    }

    struct Sample {
        double u;
        Vec2 du;
        Mat2 d2u;
    };

    Sample at(const Vec2& x) const {
        const Vec2 p = grid_.parameter_coords(x);
        std::array<double, 6> v{};
        for (std::size_t c = 0; c < 6; ++c) v[c] = grid_.interpolate_param(comp_[c], p.x(), p.y());
        Sample s;
        s.u = v[0];
        s.du = Vec2(v[1], v[2]);
        s.d2u << v[3], v[4], v[4], v[5];
        return s;
    }

    const std::vector<Vec2>& nodal_gradients() const { return du_; }

private:
    const MappedGrid& grid_;
    std::array<std::vector<double>, 6> comp_;
    std::vector<Vec2> du_;
};

} // namespace

DualField legendre_transform(const SolutionField& field,
                             const std::shared_ptr<const MappedGrid>& dual_grid) {
    if (!field.grid || !dual_grid) throw DomainError("legendre_transform needs both grids");
    const MappedGrid& g = *field.grid;
    const FieldInterpolant interp(g, field.u);
    const auto& grads = interp.nodal_gradients();

    DualField out;
    out.grid = dual_grid;
    out.model = field.model;
    out.role = field.role == FieldRole::Primal ? FieldRole::Dual : FieldRole::Primal;
    out.c = -field.c;
    out.u.resize(dual_grid->size());
    out.preimage.resize(static_cast<std::size_t>(dual_grid->size()));

    constexpr int kMaxIter = 30;
    constexpr double kTol = 1e-12;
    for (int k = 0; k < dual_grid->size(); ++k) {
        const Vec2 y = dual_grid->node(k);
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int m = 0; m < g.size(); ++m) {
            const double dist = (grads[static_cast<std::size_t>(m)] - y).squaredNorm();
            if (dist < best_d) {
                best_d = dist;
                best = m;
            }
        }
        Vec2 x = g.node(best);
        auto s = interp.at(x);
        double gap = (s.du - y).norm();
        for (int it = 0; it < kMaxIter && gap > kTol; ++it) {
            const double det = s.d2u.determinant();
            if (!(det > 0.0)) break;
            x -= s.d2u.inverse() * (s.du - y);
            s = interp.at(x);
            gap = (s.du - y).norm();
        }
        if (!(gap <= kTol)) {
            std::ostringstream os;
            os << "gradient inversion failed at dual node " << k << " (y = " << y.transpose()
               << ", gap " << gap << ")";
            throw InversionFailure(os.str(), gap);
        }
        out.max_gap = std::max(out.max_gap, gap);
        out.preimage[static_cast<std::size_t>(k)] = x;
        out.u[k] = x.dot(y) - s.u;
    }
    return out;
}

Eigen::VectorXd dual_residual(const SolutionField& dual, ModelKind model, double eps_space) {
    ProblemSpec spec;
    spec.model = model;
    spec.grid = dual.grid;
    spec.op = OperatorKind::Dual;
    spec.eps_space = eps_space;
    const auto d = derivatives(*dual.grid, dual.u);
    Eigen::VectorXd r(dual.grid->size());
    for (int k = 0; k < dual.grid->size(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        r[k] = evaluate_operator(spec, dual.grid->node(k), {d.du[ks], d.d2u[ks]}, false).value -
               dual.c;
    }
    return r;
}

double max_dual_deviation(const SolutionField& dual, ModelKind model, double eps_space) {
    const Eigen::VectorXd r = dual_residual(dual, model, eps_space);
    double m = 0.0;
    for (int k = 0; k < dual.grid->size(); ++k)
        if (dual.grid->is_interior(k)) m = std::max(m, std::abs(r[k]));
    return m;
}

HomotopyResult dual_solve(const ProblemSpec& primal, const HomotopyOptions& opts) {
    const OperatorKind op =
        primal.op == OperatorKind::Primal ? OperatorKind::Dual : OperatorKind::Primal;
    return run_homotopy(primal.omega_tilde, primal.omega, primal.model, opts, op);
}

double involution_error(const SolutionField& primal, const SolutionField& dual) {
    const MappedGrid& g = *primal.grid;
    const auto d = derivatives(g, primal.u);
    const FieldInterpolant di(*dual.grid, dual.u);
    double err = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        if (!g.is_interior(k)) continue;
        const Vec2 x = g.node(k);
        err = std::max(err, (di.at(d.du[static_cast<std::size_t>(k)]).du - x).norm());
    }
    return err;
}

double hessian_reciprocity_error(const SolutionField& primal, const SolutionField& dual) {
    const MappedGrid& g = *primal.grid;
    const auto d = derivatives(g, primal.u);
    const FieldInterpolant di(*dual.grid, dual.u);
    double err = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        if (!g.is_interior(k)) continue;
        const auto ks = static_cast<std::size_t>(k);
        const double prod = d.d2u[ks].determinant() * di.at(d.du[ks]).d2u.determinant();
        err = std::max(err, std::abs(prod - 1.0));
    }
    return err;
}

double normalized_distance(const MappedGrid& grid, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
    Eigen::VectorXd x = a, y = b;
    project_mean_zero(grid, x);
    project_mean_zero(grid, y);
    return (x - y).lpNorm<Eigen::Infinity>();
}

Mat2 dual_weights(const Vec2& y, ModelKind model, double eps_space) {
    return divergence_weights(y, model, eps_space);
}

} // namespace cmc
