#pragma once

#include "csplat/types.hpp"

#include <Eigen/Core>

namespace csplat {

/// Symmetric quadratic form of the cone with apex at the camera origin whose
/// rulings are tangent to the 3-sigma ellipsoid: x^T q x = 0.
struct ConeMatrix {
    Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
};

enum class ConicKind { Ellipse, Parabola, Hyperbola, Degenerate };

const char* to_string(ConicKind kind);

/// Restriction of the cone to the z = 1 plane:
///   v^T q2 v + 2 q1 . v + q33 = 0 for v = (x, y).
/// For an ellipse, center and form are filled so that
/// (v - center)^T form (v - center) = 9 on the silhouette, with form SPD.
struct UnitPlaneConic {
    ConicKind kind = ConicKind::Degenerate;
    Eigen::Matrix2d q2 = Eigen::Matrix2d::Zero();
    Eigen::Vector2d q1 = Eigen::Vector2d::Zero();
    double q33 = 0.0;
    Eigen::Vector2d center = Eigen::Vector2d::Zero(); // v0, ellipse only
    Eigen::Matrix2d form = Eigen::Matrix2d::Zero();   // M, ellipse only
};

/// A = Sigma_c^{-1} via Cholesky solve, symmetrized. Throws ill-conditioned
/// when the eigenvalue spread exceeds 1e12 or Sigma_c is not SPD.
Eigen::Matrix3d ellipsoid_form(const Eigen::Matrix3d& sigma_c);

/// Q = A p p^T A - (p^T A p - 9) A. Requires the camera origin strictly
/// outside the 3-sigma ellipsoid (p^T A p > 9); throws camera-inside.
ConeMatrix cone_matrix(const Eigen::Matrix3d& a, const Eigen::Vector3d& p_c);

/// Classifies the z = 1 section and, for ellipses, completes the square to
/// recover (v0, M). The whole conic is sign-normalized so M is SPD; the cone
/// equation is homogeneous so the global sign carries no information.
UnitPlaneConic conic_on_unit_plane(const ConeMatrix& cone);

/// Maps the unit-plane ellipse to pixels: p_img = (fx v0.x + w/2, fy v0.y + h/2),
/// Sigma_img^{-1} = F^{-T} M F^{-1} with F = diag(fx, fy).
Splat2D to_image_plane(const Eigen::Vector2d& v0, const Eigen::Matrix2d& m, double depth,
                       const Camera& cam);

/// Full ellipsoid-based projection. Throws camera-inside / non-ellipse-conic
/// when called on inputs the prefilter should have rejected.
Splat2D project_conic(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c, const Camera& cam);

} // namespace csplat
