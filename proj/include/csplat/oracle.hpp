#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace csplat {

/// Coefficients of the unit-level ray-ellipsoid quadratic
/// a t^2 + b t + c = 0 along l(t) = e + t d.
struct RayQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// a = d^T A d, b = 2 delta^T A d, c = delta^T A delta - 1, delta = e - center.
/// A must already be at the unit level (the "= 1" ellipsoid form).
RayQuadratic ray_quadratic(const Eigen::Matrix3d& a_unit, const Eigen::Vector3d& center,
                           const Eigen::Vector3d& eye, const Eigen::Vector3d& dir);

/// Discriminant form (b/2)^2 - a c: zero iff the ray is tangent,
/// positive iff the line meets the ellipsoid twice, negative iff it misses.
double tangency_residual(const RayQuadratic& rq);

/// Brute-force silhouette on the z = 1 plane: for k azimuths around the ray
/// through the center, bisect the elevation between "two roots" and
/// "no roots" to 1e-12 and intersect the tangent direction with z = 1.
/// a_level9 is the "= 9" ellipsoid form (Sigma_c^{-1}); it is rescaled to the
/// unit level internally. The eye must be outside the ellipsoid and the
/// ellipsoid strictly in front of z = 0; otherwise throws oracle-bracketing.
std::vector<Eigen::Vector2d> silhouette_by_search(const Eigen::Matrix3d& a_level9,
                                                  const Eigen::Vector3d& center,
                                                  const Eigen::Vector3d& eye, int k);

/// Central finite differences with per-coordinate relative step
/// h_i = step * max(|x_i|, 1).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, double step);

} // namespace csplat
