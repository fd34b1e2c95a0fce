#pragma once

#include "csplat/types.hpp"

#include <Eigen/Core>

namespace csplat {

enum class RejectReason { None, CameraInside, BehindPlane, OutOfFrustum };

const char* to_string(RejectReason reason);

struct FilterVerdict {
    bool keep = true;
    RejectReason reason = RejectReason::None;
};

/// True iff the camera origin lies inside or on the 3-sigma ellipsoid:
/// p_c^T A p_c <= 9 (inclusive).
bool camera_inside(const Eigen::Matrix3d& a, const Eigen::Vector3d& p_c);

/// Lowest z over the 3-sigma ellipsoid surface. Closed form of the
/// stationarity system (surface gradient parallel to the z axis):
/// z_min = p_c.z - 3 sqrt(Sigma_c[2][2]).
double min_depth(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c);

/// True (cull) iff the axis-aligned box of the 3-sigma ellipse, half-extents
/// 3 sqrt(diag(Sigma_img)), misses the image rectangle dilated by margin_px.
/// Conservative: touching counts as inside.
bool frustum_cull(const Splat2D& splat, const Camera& cam, double margin_px);

inline constexpr double kDefaultFrustumMarginPx = 16.0;

/// Composition, first failure wins: camera-inside, then surface at or below
/// the near plane (z_min <= near_eps, default exactly 0), then frustum.
FilterVerdict prefilter(const Gaussian3D& g, const Camera& cam,
                        double margin_px = kDefaultFrustumMarginPx, double near_eps = 0.0);

/// Same checks for a Gaussian already transformed to camera space.
FilterVerdict prefilter_camera_space(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c,
                                     const Camera& cam, double margin_px = kDefaultFrustumMarginPx,
                                     double near_eps = 0.0);

} // namespace csplat
