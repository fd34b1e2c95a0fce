#include "csplat/ellipse.hpp"

#include "csplat/error.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace csplat {

EllipseAxes ellipse_axes(const Eigen::Vector2d& center, const Eigen::Matrix2d& form_level9) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (form_level9 + form_level9.transpose()));
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "ellipse form not positive definite");
    }
    // SelfAdjointEigenSolver orders eigenvalues ascending; the smaller
    // eigenvalue gives the longer axis (semi = 3 / sqrt(lambda)).
    EllipseAxes out;
    out.center = center;
    out.axes.col(0) = eig.eigenvectors().col(0);
    out.axes.col(1) = eig.eigenvectors().col(1);
    out.semi[0] = 3.0 / std::sqrt(eig.eigenvalues()[0]);
    out.semi[1] = 3.0 / std::sqrt(eig.eigenvalues()[1]);
    return out;
}

Eigen::Vector2d ellipse_point(const EllipseAxes& e, double theta) {
    return e.center + e.axes.col(0) * (e.semi[0] * std::cos(theta)) +
           e.axes.col(1) * (e.semi[1] * std::sin(theta));
}

namespace {

// Nearest-point distance for an axis-aligned ellipse (u/a)^2 + (v/b)^2 = 1,
// a >= b > 0, query point (u, v) with u, v >= 0. Bisection on
// F(t) = (a u / (t + a^2))^2 + (b v / (t + b^2))^2 - 1 over t in (-b^2, inf).
double quadrant_distance(double a, double b, double u, double v) {
    if (v == 0.0) {
        if (u * a < a * a - b * b) {
            // foot of the perpendicular lies off the major axis
            const double xc = a * a * u / (a * a - b * b);
            const double yc = b * std::sqrt(std::max(0.0, 1.0 - (xc / a) * (xc / a)));
            return std::hypot(xc - u, yc);
        }
        return std::abs(u - a);
    }
    if (u == 0.0 && a == b) {
        return std::abs(std::hypot(u, v) - a);
    }
    auto f = [&](double t) {
        const double ra = a * u / (t + a * a);
        const double rb = b * v / (t + b * b);
        return ra * ra + rb * rb - 1.0;
    };
    double lo = -b * b + b * v;
    double hi = -b * b + std::hypot(a * u, b * v);
    // F -> +inf as t -> -b^2 from above; walk the bracket down if roundoff
    // left F(lo) slightly negative.
    for (int guard = 0; guard < 60 && f(lo) < 0.0; ++guard) {
        lo = -b * b + 0.5 * (lo + b * b);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double t = 0.5 * (lo + hi);
    const double xc = a * a * u / (t + a * a);
    const double yc = b * b * v / (t + b * b);
    return std::hypot(xc - u, yc - v);
}

} // namespace

double point_to_ellipse_distance(const EllipseAxes& e, const Eigen::Vector2d& p) {
    const Eigen::Vector2d local = e.axes.transpose() * (p - e.center);
    return quadrant_distance(e.semi[0], e.semi[1], std::abs(local[0]), std::abs(local[1]));
}

double ellipse_hausdorff(const EllipseAxes& a, const EllipseAxes& b, int samples) {
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double theta = 2.0 * M_PI * i / samples;
        worst = std::max(worst, point_to_ellipse_distance(b, ellipse_point(a, theta)));
        worst = std::max(worst, point_to_ellipse_distance(a, ellipse_point(b, theta)));
    }
    return worst;
}

} // namespace csplat
