#include "cmc/curvature.hpp"

#include "cmc/errors.hpp"

#include <cmath>
#include <sstream>

namespace cmc {

namespace {

// +1 for the Lorentzian metric, -1 for the Euclidean one.
double metric_sign(ModelKind model) { return model == ModelKind::Minkowski ? 1.0 : -1.0; }

void check_spacelike(const Vec2& du, ModelKind model, double eps_space) {
    if (model != ModelKind::Minkowski) return;
    const double n = du.norm();
    if (!(n <= 1.0 - eps_space)) {
        std::ostringstream msg;
        msg << "spacelike guard violated: |Du| = " << n << " > 1 - " << eps_space;
        throw SpacelikeViolation(msg.str(), -1, n);
    }
}

} // namespace

MetricQuantities metric_quantities(const Vec2& du, ModelKind model, double eps_space) {
    check_spacelike(du, model, eps_space);
    const double sg = metric_sign(model);
    const Mat2 ppt = du * du.transpose();
    const Mat2 id = Mat2::Identity();
    MetricQuantities m;
    m.v = std::sqrt(1.0 - sg * du.squaredNorm());
    m.g_lower = id - sg * ppt;
    m.g_upper = id + sg * ppt / (m.v * m.v);
    m.b_upper = id + sg * ppt / (m.v * (1.0 + m.v));
    m.b_lower = id - sg * ppt / (1.0 + m.v);
    return m;
}

Mat2 shape_matrix(const PointState& s, ModelKind model, double eps_space) {
    const MetricQuantities m = metric_quantities(s.du, model, eps_space);
    Mat2 a = m.b_upper * s.d2u * m.b_upper / m.v;
    // Symmetrize away rounding asymmetry.
    return 0.5 * (a + a.transpose());
}

double mean_curvature(const PointState& s, ModelKind model, double eps_space) {
    return shape_matrix(s, model, eps_space).trace();
}

Mat2 divergence_weights(const Vec2& du, ModelKind model, double eps_space) {
    check_spacelike(du, model, eps_space);
    const double sg = metric_sign(model);
    const double v2 = 1.0 - sg * du.squaredNorm();
    const double v = std::sqrt(v2);
    return (Mat2::Identity() + sg * du * du.transpose() / v2) / v;
}

double mean_curvature_divergence_form(const PointState& s, ModelKind model, double eps_space) {
    return divergence_weights(s.du, model, eps_space).cwiseProduct(s.d2u).sum();
}

Vec2 principal_curvatures(const PointState& s, ModelKind model, double eps_space) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(shape_matrix(s, model, eps_space),
                                           Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

OperatorDerivatives operator_derivatives(const PointState& s, ModelKind model, const Mat2& f_kl,
                                         double eps_space) {
    const MetricQuantities m = metric_quantities(s.du, model, eps_space);
    const double sg = metric_sign(model);
    const Mat2 a = m.b_upper * s.d2u * m.b_upper / m.v;
    OperatorDerivatives d;
    d.g_ij = m.b_upper * f_kl * m.b_upper / m.v;
    const double f_dot_a = f_kl.cwiseProduct(a).sum();
    d.g_i = sg * (s.du * f_dot_a / (m.v * m.v) + 2.0 / m.v * (m.b_upper * f_kl * a * s.du));
    return d;
}

TraceFactors trace_factors(const Vec2& du, ModelKind model, double eps_space) {
    const MetricQuantities m = metric_quantities(du, model, eps_space);
    Eigen::SelfAdjointEigenSolver<Mat2> es(m.b_upper, Eigen::EigenvaluesOnly);
    const Vec2 lam = es.eigenvalues();
    return {lam.minCoeff() * lam.minCoeff() / m.v, lam.maxCoeff() * lam.maxCoeff() / m.v};
}

FStructureReport f_structure_check(std::span<const double> kappa) {
    const auto n = kappa.size();
    std::vector<double> k(kappa.begin(), kappa.end());
    auto f = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double xi : x) s += xi;
        return s;
    };

    // Derivatives by central differences; exact up to rounding for linear F.
    const double step = 1e-3;
    std::vector<double> grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto kp = k, km = k;
        kp[i] += step;
        km[i] -= step;
        grad[i] = (f(kp) - f(km)) / (2.0 * step);
    }
    double hmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            auto kpp = k, kpm = k, kmp = k, kmm = k;
            kpp[i] += step, kpp[j] += step;
            kpm[i] += step, kpm[j] -= step;
            kmp[i] -= step, kmp[j] += step;
            kmm[i] -= step, kmm[j] -= step;
            const double hij = (f(kpp) - f(kpm) - f(kmp) + f(kmm)) / (4.0 * step * step);
            hmax = std::max(hmax, std::abs(hij));
        }
    }

    FStructureReport r;
    r.f = f(k);
    for (std::size_t i = 0; i < n; ++i) {
        r.euler_sum += grad[i] * k[i];
        r.derivative_sum += grad[i];
    }
    const double tol = 1e-9 * (1.0 + std::abs(r.f));
    r.hessian_max_abs = hmax;
    r.homogeneity_holds = std::abs(r.euler_sum - r.f) <= tol;
    r.derivative_sum_is_n = std::abs(r.derivative_sum - static_cast<double>(n)) <= 1e-9;
    r.concave = hmax <= 1e-6;
    return r;
}

} // namespace cmc
