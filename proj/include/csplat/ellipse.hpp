#pragma once

#include <Eigen/Core>

namespace csplat {

/// Principal-axis form of an ellipse given as (v - center)^T form (v - center) = 9.
struct EllipseAxes {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    Eigen::Matrix2d axes = Eigen::Matrix2d::Identity(); // columns: unit axis directions
    Eigen::Vector2d semi = Eigen::Vector2d::Ones();     // semi-axis lengths, semi[0] >= semi[1]
};

EllipseAxes ellipse_axes(const Eigen::Vector2d& center, const Eigen::Matrix2d& form_level9);

/// Boundary point at parameter angle theta.
Eigen::Vector2d ellipse_point(const EllipseAxes& e, double theta);

/// Exact distance from a point to the ellipse boundary (inside or outside),
/// via bisection of the standard nearest-point equation in the axis frame.
double point_to_ellipse_distance(const EllipseAxes& e, const Eigen::Vector2d& p);

/// Symmetric Hausdorff distance between two ellipse boundaries: boundary
/// samples of one against the exact distance to the other, both directions.
double ellipse_hausdorff(const EllipseAxes& a, const EllipseAxes& b, int samples = 256);

} // namespace csplat
