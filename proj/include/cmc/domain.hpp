#pragma once

#include "cmc/types.hpp"

namespace cmc {

enum class DomainKind { Ball, Ellipse, Sublevel };

/// Value, gradient and Hessian of a defining function at one point.
struct DefiningValue {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
};

/// A uniformly convex planar domain {h > 0} described by a concave quadratic
/// defining function
///
///     h(x) = s/2 * (1 - ((x1-c1)/a)^2 - ((x2-c2)/b)^2) - offset.
///
/// Balls use a = b = s = R, which gives h = (R^2 - |x-c|^2) / (2R), |Dh| = 1 on
/// the boundary and D^2h = -I/R. Ellipses use s = max(a, b), so boundary |Dh|
/// lies in [1, max/min]. Sublevel domains keep the parent's quadric and shift
/// the level by a positive offset.
class ConvexDomain {
public:
    static ConvexDomain ball(const Vec2& center, double radius);
    static ConvexDomain ellipse(const Vec2& center, double semi_x, double semi_y);

    DomainKind kind() const { return kind_; }
    const Vec2& center() const { return center_; }
    /// Semi-axes of the parent quadric (not of the zero level set).
    double quadric_a() const { return a_; }
    double quadric_b() const { return b_; }
    double scale() const { return scale_; }
    double offset() const { return offset_; }

    DefiningValue eval(const Vec2& x) const;

    /// Uniform concavity constant: D^2h <= -theta I everywhere.
    double theta() const;
    double h_max() const { return 0.5 * scale_ - offset_; }
    const Vec2& peak() const { return center_; }

    /// Semi-axes of the zero level set {h = 0}.
    Vec2 level_semi_axes() const;
    double inradius() const { return level_semi_axes().minCoeff(); }
    double circumradius() const { return level_semi_axes().maxCoeff(); }
    double diameter() const { return 2.0 * circumradius(); }
    /// |h(x)| <= boundary_tolerance() counts as "on the boundary".
    double boundary_tolerance() const { return 1e-9 * diameter(); }
    /// Lower bound delta with delta <= |Dh| <= 1/delta on the boundary.
    double boundary_gradient_bound() const;
    /// Boundary point at parametric angle s (x = c + (A cos s, B sin s)).
    Vec2 boundary_point(double s) const;

    bool is_round() const { return a_ == b_; }

    bool operator==(const ConvexDomain&) const = default;

private:
    ConvexDomain(DomainKind kind, const Vec2& center, double a, double b, double scale,
                 double offset);

    DomainKind kind_;
    Vec2 center_;
    double a_;
    double b_;
    double scale_;
    double offset_;

    friend ConvexDomain sublevel_domain(const ConvexDomain&, double);
};

DefiningValue eval_defining(const ConvexDomain& domain, const Vec2& x);

/// Unit inward normal Dh/|Dh| at a boundary point. Throws NotOnBoundary.
Vec2 inward_normal(const ConvexDomain& domain, const Vec2& x);

/// Smallest admissible sub-level parameter. Below it the level set would be
/// narrower than two cells of a default 32-ring grid.
inline constexpr double kSublevelFloor = 1.0 / 256.0;

/// {x : h(x) >= (1-t) h_max} with defining function h - (1-t) h_max.
/// Returns the domain unchanged at t = 1.
ConvexDomain sublevel_domain(const ConvexDomain& domain, double t);

struct Measures {
    double area = 0.0;
    double perimeter = 0.0;
};

Measures measures(const ConvexDomain& domain);

/// Arc length of an ellipse by adaptive Gauss-Kronrod quadrature.
double ellipse_perimeter(double a, double b);

} // namespace cmc
