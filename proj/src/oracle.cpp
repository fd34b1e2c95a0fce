#include "csplat/oracle.hpp"

#include "csplat/error.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace csplat {

RayQuadratic ray_quadratic(const Eigen::Matrix3d& a_unit, const Eigen::Vector3d& center,
                           const Eigen::Vector3d& eye, const Eigen::Vector3d& dir) {
    const Eigen::Vector3d delta = eye - center;
    RayQuadratic rq;
    rq.a = dir.dot(a_unit * dir);
    rq.b = 2.0 * delta.dot(a_unit * dir);
    rq.c = delta.dot(a_unit * delta) - 1.0;
    return rq;
}

double tangency_residual(const RayQuadratic& rq) {
    return 0.25 * rq.b * rq.b - rq.a * rq.c;
}

std::vector<Eigen::Vector2d> silhouette_by_search(const Eigen::Matrix3d& a_level9,
                                                  const Eigen::Vector3d& center,
                                                  const Eigen::Vector3d& eye, int k) {
    const Eigen::Matrix3d a_unit = a_level9 / 9.0;

    const Eigen::Vector3d delta = eye - center;
    if (delta.dot(a_unit * delta) - 1.0 <= 0.0) {
        throw Error(ErrorKind::OracleBracketing, "eye inside the ellipsoid, no tangent rays exist");
    }

    // Frame around the central ray.
    Eigen::Vector3d axis = (center - eye).normalized();
    Eigen::Vector3d seed = std::abs(axis.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
    Eigen::Vector3d u = axis.cross(seed).normalized();
    Eigen::Vector3d v = axis.cross(u);

    auto residual_at = [&](double azimuth, double elevation) {
        Eigen::Vector3d side = std::cos(azimuth) * u + std::sin(azimuth) * v;
        Eigen::Vector3d dir = std::cos(elevation) * axis + std::sin(elevation) * side;
        return tangency_residual(ray_quadratic(a_unit, center, eye, dir));
    };
    auto direction_at = [&](double azimuth, double elevation) {
        Eigen::Vector3d side = std::cos(azimuth) * u + std::sin(azimuth) * v;
        return (std::cos(elevation) * axis + std::sin(elevation) * side).eval();
    };

    std::vector<Eigen::Vector2d> points;
    points.reserve(k);
    for (int i = 0; i < k; ++i) {
        const double azimuth = 2.0 * M_PI * i / k;
        if (!(residual_at(azimuth, 0.0) > 0.0)) {
            throw Error(ErrorKind::OracleBracketing, "central ray misses the ellipsoid");
        }
        // Scan outward for an elevation where the ray misses, then bisect
        // the root-count transition. Monotone for a convex body.
        double lo = 0.0;
        double hi = 0.0;
        const int scan_steps = 256;
        for (int s = 1; s <= scan_steps; ++s) {
            double e = M_PI * s / scan_steps;
            if (residual_at(azimuth, e) < 0.0) {
                hi = e;
                break;
            }
            lo = e;
        }
        if (hi == 0.0) {
            throw Error(ErrorKind::OracleBracketing, "no miss elevation found along azimuth");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            double mid = 0.5 * (lo + hi);
            if (residual_at(azimuth, mid) >= 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Eigen::Vector3d dir = direction_at(azimuth, 0.5 * (lo + hi));
        if (!(dir.z() > 1e-12)) {
            throw Error(ErrorKind::OracleBracketing,
                        "tangent direction does not pierce z = 1; non-ellipse geometry");
        }
        double t = (1.0 - eye.z()) / dir.z();
        if (!(t > 0.0)) {
            throw Error(ErrorKind::OracleBracketing, "tangent ray meets z = 1 behind the eye");
        }
        Eigen::Vector3d hit = eye + t * dir;
        points.emplace_back(hit.x(), hit.y());
    }
    return points;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, double step) {
    Eigen::VectorXd grad(x0.size());
    for (int i = 0; i < x0.size(); ++i) {
        const double h = step * std::max(std::abs(x0[i]), 1.0);
        Eigen::VectorXd hi = x0;
        Eigen::VectorXd lo = x0;
        hi[i] += h;
        lo[i] -= h;
        const double f_hi = f(hi);
        const double f_lo = f(lo);
        if (!std::isfinite(f_hi) || !std::isfinite(f_lo)) {
            throw Error(ErrorKind::InvalidParameter, "non-finite function value in fd_gradient");
        }
        grad[i] = (f_hi - f_lo) / (2.0 * h);
    }
    return grad;
}

} // namespace csplat
