#include "cmc/domain.hpp"

#include "cmc/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace cmc {

ConvexDomain::ConvexDomain(DomainKind kind, const Vec2& center, double a, double b,
                           double scale, double offset)
    : kind_(kind), center_(center), a_(a), b_(b), scale_(scale), offset_(offset) {}

ConvexDomain ConvexDomain::ball(const Vec2& center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw DomainError("ball radius must be positive, got " + std::to_string(radius));
    return ConvexDomain(DomainKind::Ball, center, radius, radius, radius, 0.0);
}

ConvexDomain ConvexDomain::ellipse(const Vec2& center, double semi_x, double semi_y) {
    if (!(semi_x > 0.0) || !(semi_y > 0.0) || !std::isfinite(semi_x) || !std::isfinite(semi_y))
        throw DomainError("ellipse semi-axes must be positive");
    return ConvexDomain(DomainKind::Ellipse, center, semi_x, semi_y, std::max(semi_x, semi_y),
                        0.0);
}

DefiningValue ConvexDomain::eval(const Vec2& x) const {
    const Vec2 d = x - center_;
    const double ia2 = 1.0 / (a_ * a_);
    const double ib2 = 1.0 / (b_ * b_);
    DefiningValue out;
    out.value = 0.5 * scale_ * (1.0 - d.x() * d.x() * ia2 - d.y() * d.y() * ib2) - offset_;
    out.grad = Vec2(-scale_ * d.x() * ia2, -scale_ * d.y() * ib2);
    out.hess << -scale_ * ia2, 0.0, 0.0, -scale_ * ib2;
    return out;
}

double ConvexDomain::theta() const {
    const double m = std::max(a_, b_);
    return scale_ / (m * m);
}

Vec2 ConvexDomain::level_semi_axes() const {
    const double k = std::sqrt(1.0 - 2.0 * offset_ / scale_);
    return Vec2(a_ * k, b_ * k);
}

double ConvexDomain::boundary_gradient_bound() const {
    // On {h = 0}, |Dh| ranges over s*k*[1/max, 1/min] with k the level shrink.
    const double k = std::sqrt(1.0 - 2.0 * offset_ / scale_);
    const double lo = scale_ * k / std::max(a_, b_);
    const double hi = scale_ * k / std::min(a_, b_);
    return std::min(lo, 1.0 / hi);
}

Vec2 ConvexDomain::boundary_point(double s) const {
    const Vec2 ax = level_semi_axes();
    return center_ + Vec2(ax.x() * std::cos(s), ax.y() * std::sin(s));
}

DefiningValue eval_defining(const ConvexDomain& domain, const Vec2& x) { return domain.eval(x); }

Vec2 inward_normal(const ConvexDomain& domain, const Vec2& x) {
    const DefiningValue dv = domain.eval(x);
    if (std::abs(dv.value) > domain.boundary_tolerance())
        throw NotOnBoundary("point is not on the boundary: |h| = " +
                            std::to_string(std::abs(dv.value)));
    return dv.grad.normalized();
}

ConvexDomain sublevel_domain(const ConvexDomain& domain, double t) {
    if (!(t > 0.0) || t > 1.0)
        throw DomainError("sublevel parameter must lie in (0, 1], got " + std::to_string(t));
    if (t == 1.0) return domain;
    if (t < kSublevelFloor)
        throw DegenerateSublevel("sublevel parameter " + std::to_string(t) +
                                 " is below the floor " + std::to_string(kSublevelFloor));
    const double offset = domain.offset_ + (1.0 - t) * domain.h_max();
    return ConvexDomain(DomainKind::Sublevel, domain.center_, domain.a_, domain.b_,
                        domain.scale_, offset);
}

double ellipse_perimeter(double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    auto speed = [a, b](double s) {
        return std::hypot(a * std::sin(s), b * std::cos(s));
    };
    // Quarter arc by symmetry.
    const double quarter =
        gauss_kronrod<double, 61>::integrate(speed, 0.0, 0.5 * std::numbers::pi, 15, 1e-15);
    return 4.0 * quarter;
}

Measures measures(const ConvexDomain& domain) {
    const Vec2 ax = domain.level_semi_axes();
    Measures m;
    m.area = std::numbers::pi * ax.x() * ax.y();
    m.perimeter = (ax.x() == ax.y()) ? 2.0 * std::numbers::pi * ax.x()
                                     : ellipse_perimeter(ax.x(), ax.y());
    return m;
}

} // namespace cmc
