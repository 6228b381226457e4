#include "cmc/grid.hpp"

#include "cmc/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace cmc {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Lagrange weights of the 4 nodes at offsets 0..3 evaluated at s.
std::array<double, 4> lagrange4(double s) {
    std::array<double, 4> w{};
    for (int a = 0; a < 4; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            num *= s - b;
            den *= a - b;
        }
        w[static_cast<std::size_t>(a)] = num / den;
    }
    return w;
}

// Finite-difference weights on integer offsets (unit spacing) for the given
// derivative order, exact for polynomials of degree offsets.size() - 1.
Eigen::VectorXd fd_weights(const std::vector<int>& offsets, int order) {
    const auto m = static_cast<Eigen::Index>(offsets.size());
    Eigen::MatrixXd v(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index p = 0; p < m; ++p)
        for (Eigen::Index k = 0; k < m; ++k)
            v(p, k) = std::pow(static_cast<double>(offsets[static_cast<std::size_t>(k)]),
                               static_cast<double>(p));
    double fact = 1.0;
    for (int q = 2; q <= order; ++q) fact *= q;
    rhs[order] = fact;
    Eigen::VectorXd w = v.fullPivLu().solve(rhs);
    for (Eigen::Index k = 0; k < m; ++k)
        if (std::abs(w[k]) < 1e-13) w[k] = 0.0;
    return w;
}

double min_eig(const Mat2& m) {
    const double tr = 0.5 * (m(0, 0) + m(1, 1));
    const double df = 0.5 * (m(0, 0) - m(1, 1));
    return tr - std::sqrt(df * df + m(0, 1) * m(0, 1));
}

} // namespace

Eigen::MatrixXd fourier_d1(int n) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const double h = 2.0 * std::numbers::pi / n;
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            const int m = j - k;
            const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
            d(j, k) = 0.5 * sgn / std::tan(0.5 * m * h);
        }
    }
    return d;
}

Eigen::MatrixXd fourier_d2(int n) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const double h = 2.0 * std::numbers::pi / n;
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (j == k) {
                d(j, k) = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
                continue;
            }
            const int m = j - k;
            const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
            const double s = std::sin(0.5 * m * h);
            d(j, k) = -0.5 * sgn / (s * s);
        }
    }
    return d;
}

MappedGrid::MappedGrid(const ConvexDomain& domain, int n_rho, int n_phi)
    : domain_(domain), n_rho_(n_rho), n_phi_(n_phi) {}

std::shared_ptr<const MappedGrid> MappedGrid::build(const ConvexDomain& domain, int n_rho,
                                                    int n_phi) {
    if (n_rho < kMinRho)
        throw DomainError("n_rho must be at least " + std::to_string(kMinRho));
    if (n_phi < kMinPhi || n_phi % 2 != 0)
        throw DomainError("n_phi must be even and at least " + std::to_string(kMinPhi));
    std::shared_ptr<MappedGrid> g(new MappedGrid(domain, n_rho, n_phi));
    g->build_geometry();
    g->build_operators();
    return g;
}

double MappedGrid::phi(int col) const { return d_phi() * wrap(col); }

double MappedGrid::d_phi() const { return 2.0 * std::numbers::pi / n_phi_; }

double MappedGrid::ray_radius(double angle) const {
    const Vec2 e(std::cos(angle), std::sin(angle));
    const Vec2 p = domain_.peak();
    auto f = [&](double r) { return domain_.eval(p + r * e).value; };
    if (!(f(0.0) > 0.0)) throw RootFindFailure("defining function is not positive at its peak");
    double lo = 0.0, hi = 1.0;
    int doublings = 0;
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 64)
            throw RootFindFailure("cannot bracket the boundary along angle " +
                                  std::to_string(angle));
    }
    if (f(hi) == 0.0) return hi;
    std::uintmax_t max_iter = 200;
    auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
    if (max_iter >= 200) throw RootFindFailure("boundary root finding did not converge");
    return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

void MappedGrid::build_geometry() {
    r_b_.resize(static_cast<std::size_t>(n_phi_));
    for (int j = 0; j < n_phi_; ++j) r_b_[static_cast<std::size_t>(j)] = ray_radius(phi(j));

    nodes_.assign(static_cast<std::size_t>(size()), domain_.peak());
    weights_.assign(static_cast<std::size_t>(size()), 0.0);
    const double dr = d_rho(), dp = d_phi();
    for (int i = 1; i <= n_rho_; ++i) {
        for (int j = 0; j < n_phi_; ++j) {
            const double r = rho(i) * boundary_radius(j);
            const int k = index(i, j);
            nodes_[static_cast<std::size_t>(k)] =
                domain_.peak() + r * Vec2(std::cos(phi(j)), std::sin(phi(j)));
            const double rb = boundary_radius(j);
            const double half = (i == n_rho_) ? 0.5 : 1.0;
            weights_[static_cast<std::size_t>(k)] = half * rho(i) * rb * rb * dr * dp;
        }
    }
}

void MappedGrid::build_operators() {
    const int n = size();
    const double dr = d_rho();
    const Eigen::MatrixXd d1 = fourier_d1(n_phi_);
    const Eigen::MatrixXd d2 = fourier_d2(n_phi_);

    // Rho stencils of node (i, j): list of (node, weight). Fourth-order
    // central differences, reflected through the pole (ring -k of column j is
    // ring k of the opposite column); the last two rings use off-centred
    // fourth-order stencils.
    using Stencil = std::vector<std::pair<int, double>>;
    const int half_turn = n_phi_ / 2;
    auto at = [&](int i, int j) { return i >= 0 ? index(i, j) : index(-i, j + half_turn); };
    auto stencil = [&](int i, int j, int order) -> Stencil {
        const int hi = std::min(2, n_rho_ - i);
        const int lo = hi == 2 ? -2 : hi - (order == 1 ? 4 : 5);
        std::vector<int> offsets;
        for (int o = lo; o <= hi; ++o) offsets.push_back(o);
        const Eigen::VectorXd w = fd_weights(offsets, order);
        const double s = std::pow(dr, -order);
        Stencil st;
        for (std::size_t k = 0; k < offsets.size(); ++k)
            if (w[static_cast<Eigen::Index>(k)] != 0.0)
                st.emplace_back(at(i + offsets[k], j), s * w[static_cast<Eigen::Index>(k)]);
        return st;
    };
    auto rho_first = [&](int i, int j) { return stencil(i, j, 1); };
    auto rho_second = [&](int i, int j) { return stencil(i, j, 2); };

    Triplets t_r, t_rr, t_p, t_pp, t_rp;
    for (int i = 1; i <= n_rho_; ++i) {
        for (int j = 0; j < n_phi_; ++j) {
            const int row = index(i, j);
            for (auto [c, w] : rho_first(i, j)) t_r.emplace_back(row, c, w);
            for (auto [c, w] : rho_second(i, j)) t_rr.emplace_back(row, c, w);
            for (int k = 0; k < n_phi_; ++k) {
                const double w1 = d1(j, k), w2 = d2(j, k);
                if (w1 != 0.0) t_p.emplace_back(row, index(i, k), w1);
                t_pp.emplace_back(row, index(i, k), w2);
                if (w1 != 0.0)
                    for (auto [c, w] : rho_first(i, k)) t_rp.emplace_back(row, c, w1 * w);
            }
        }
    }
    auto make = [n](const Triplets& t) {
        SparseRM m(n, n);
        m.setFromTriplets(t.begin(), t.end());
        return m;
    };
    const SparseRM d_r = make(t_r), d_rr = make(t_rr), d_p = make(t_p), d_pp = make(t_pp),
                   d_rp = make(t_rp);

    // Discrete metric: the same stencils applied to the node coordinates, so
    // affine functions are differentiated exactly.
    Eigen::VectorXd x1(n), x2(n);
    for (int k = 0; k < n; ++k) {
        x1[k] = node(k).x();
        x2[k] = node(k).y();
    }
    const Eigen::VectorXd x1r = d_r * x1, x2r = d_r * x2, x1p = d_p * x1, x2p = d_p * x2;
    const Eigen::VectorXd x1rr = d_rr * x1, x2rr = d_rr * x2, x1pp = d_pp * x1, x2pp = d_pp * x2;
    const Eigen::VectorXd x1rp = d_rp * x1, x2rp = d_rp * x2;

    Eigen::VectorXd i00 = Eigen::VectorXd::Zero(n), i01 = i00, i10 = i00, i11 = i00;
    jac_det_.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) {
        Mat2 jm;
        jm << x1r[k], x1p[k], x2r[k], x2p[k];
        const double det = jm.determinant();
        jac_det_[static_cast<std::size_t>(k)] = det;
        const Mat2 inv = jm.inverse();
        i00[k] = inv(0, 0);
        i01[k] = inv(0, 1);
        i10[k] = inv(1, 0);
        i11[k] = inv(1, 1);
    }

    // grad u = J^{-T} (u_rho, u_phi)
    SparseRM gx = SparseRM(i00.asDiagonal() * d_r) + SparseRM(i10.asDiagonal() * d_p);
    SparseRM gy = SparseRM(i01.asDiagonal() * d_r) + SparseRM(i11.asDiagonal() * d_p);

    // U_cd = u_{cd} - sum_k (grad u)_k x_{k,cd}
    const SparseRM u_rr =
        d_rr - SparseRM(x1rr.asDiagonal() * gx) - SparseRM(x2rr.asDiagonal() * gy);
    const SparseRM u_rp =
        d_rp - SparseRM(x1rp.asDiagonal() * gx) - SparseRM(x2rp.asDiagonal() * gy);
    const SparseRM u_pp =
        d_pp - SparseRM(x1pp.asDiagonal() * gx) - SparseRM(x2pp.asDiagonal() * gy);

    // H = J^{-T} U J^{-1}
    auto hess = [&](const Eigen::VectorXd& ca, const Eigen::VectorXd& cb,
                    const Eigen::VectorXd& da, const Eigen::VectorXd& db) {
        // ca = Jinv(0,a), da = Jinv(1,a), cb = Jinv(0,b), db = Jinv(1,b)
        const Eigen::VectorXd w_rr = ca.cwiseProduct(cb);
        const Eigen::VectorXd w_rp = ca.cwiseProduct(db) + da.cwiseProduct(cb);
        const Eigen::VectorXd w_pp = da.cwiseProduct(db);
        return SparseRM(SparseRM(w_rr.asDiagonal() * u_rr) + SparseRM(w_rp.asDiagonal() * u_rp) +
                        SparseRM(w_pp.asDiagonal() * u_pp));
    };
    SparseRM hxx = hess(i00, i00, i10, i10);
    SparseRM hxy = hess(i00, i01, i10, i11);
    SparseRM hyy = hess(i01, i01, i11, i11);

    // Pole: least-squares quadratic over the pole and the first two rings.
    std::vector<int> samples{0};
    for (int i = 1; i <= 2; ++i)
        for (int j = 0; j < n_phi_; ++j) samples.push_back(index(i, j));
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(samples.size()), 6);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const Vec2 d = node(samples[s]) - domain_.peak();
        basis.row(static_cast<Eigen::Index>(s)) << 1.0, d.x(), d.y(), 0.5 * d.x() * d.x(),
            d.x() * d.y(), 0.5 * d.y() * d.y();
    }
    const Eigen::MatrixXd pinv = basis.completeOrthogonalDecomposition().pseudoInverse();
    auto pole_row = [&](int coef) {
        Triplets t;
        for (std::size_t s = 0; s < samples.size(); ++s)
            t.emplace_back(0, samples[s], pinv(coef, static_cast<Eigen::Index>(s)));
        return make(t);
    };
    dx_ = gx + pole_row(1);
    dy_ = gy + pole_row(2);
    dxx_ = hxx + pole_row(3);
    dxy_ = hxy + pole_row(4);
    dyy_ = hyy + pole_row(5);
    for (SparseRM* m : {&dx_, &dy_, &dxx_, &dxy_, &dyy_}) m->makeCompressed();

    arc_weights_.assign(static_cast<std::size_t>(n_phi_), 0.0);
    for (int j = 0; j < n_phi_; ++j) {
        const int k = index(n_rho_, j);
        arc_weights_[static_cast<std::size_t>(j)] = std::hypot(x1p[k], x2p[k]) * d_phi();
    }
}

double MappedGrid::spacing() const {
    double rmax = 0.0;
    for (double r : r_b_) rmax = std::max(rmax, r);
    return rmax * d_rho();
}

Vec2 MappedGrid::parameter_coords(const Vec2& x) const {
    const Vec2 d = x - domain_.peak();
    const double r = d.norm();
    if (r == 0.0) return Vec2::Zero();
    double ang = std::atan2(d.y(), d.x());
    if (ang < 0.0) ang += 2.0 * std::numbers::pi;
    return Vec2(r / ray_radius(ang), ang);
}

double MappedGrid::interpolate(std::span<const double> values, const Vec2& x) const {
    const Vec2 rp = parameter_coords(x);
    return interpolate_param(values, rp.x(), rp.y());
}

double MappedGrid::interpolate_param(std::span<const double> values, double rho_val,
                                     double phi_val) const {
    const double s = rho_val * n_rho_;
    int i0 = static_cast<int>(std::floor(s)) - 1;
    i0 = std::clamp(i0, 0, n_rho_ - 3);
    const auto wr = lagrange4(s - i0);

    const double q = phi_val / d_phi();
    const int j0 = static_cast<int>(std::floor(q)) - 1;
    const auto wp = lagrange4(q - j0);

    double out = 0.0;
    for (int a = 0; a < 4; ++a) {
        const int i = i0 + a;
        double ring_val = 0.0;
        if (i == 0) {
            ring_val = values[0];
        } else {
            for (int b = 0; b < 4; ++b)
                ring_val += wp[static_cast<std::size_t>(b)] *
                            values[static_cast<std::size_t>(index(i, j0 + b))];
        }
        out += wr[static_cast<std::size_t>(a)] * ring_val;
    }
    return out;
}

NodalDerivatives derivatives(const MappedGrid& grid, const Eigen::VectorXd& values) {
    // Operators annihilate constants; removing the pole value keeps the
    // large near-pole stencil weights from amplifying roundoff.
    const Eigen::VectorXd u = values.array() - values[0];
    const Eigen::VectorXd ux = grid.dx() * u, uy = grid.dy() * u;
    const Eigen::VectorXd uxx = grid.dxx() * u, uxy = grid.dxy() * u, uyy = grid.dyy() * u;
    NodalDerivatives d;
    const auto n = static_cast<std::size_t>(grid.size());
    d.du.resize(n);
    d.d2u.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto e = static_cast<Eigen::Index>(k);
        d.du[k] = Vec2(ux[e], uy[e]);
        d.d2u[k] << uxx[e], uxy[e], uxy[e], uyy[e];
    }
    return d;
}

double quadrature(const MappedGrid& grid, std::span<const double> integrand) {
    const auto w = grid.weights();
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * integrand[k];
    return s;
}

double boundary_quadrature(const MappedGrid& grid, std::span<const double> integrand) {
    const auto w = grid.arc_weights();
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * integrand[j];
    return s;
}

double weighted_sum(const MappedGrid& grid, const Eigen::VectorXd& u) {
    return quadrature(grid, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
}

void project_mean_zero(const MappedGrid& grid, Eigen::VectorXd& u) {
    double area = 0.0;
    for (double w : grid.weights()) area += w;
    const double mean = weighted_sum(grid, u) / area;
    u.array() -= mean;
}

double min_interior_eigenvalue(const MappedGrid& grid, const NodalDerivatives& d) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid.size(); ++k)
        if (grid.is_interior(k)) m = std::min(m, min_eig(d.d2u[static_cast<std::size_t>(k)]));
    return m;
}

double max_gradient_norm(const NodalDerivatives& d) {
    double m = 0.0;
    for (const Vec2& g : d.du) m = std::max(m, g.norm());
    return m;
}

} // namespace cmc
