#pragma once

#include "csplat/types.hpp"

#include <Eigen/Core>

namespace csplat {

/// Jacobian of the pinhole map (x,y,z) -> (fx x/z, fy y/z) at p_c:
///   [[fx/z, 0, -fx x/z^2], [0, fy/z, -fy y/z^2]].
/// Throws behind-camera for z <= 0.
Eigen::Matrix<double, 2, 3> affine_jacobian(const Eigen::Vector3d& p_c, const Camera& cam);

/// Classic local-affine projection: Sigma2d = J Sigma_c J^T, center is the
/// pinhole projection of p_c shifted to the pixel origin. The returned
/// inv_cov is Sigma2d^{-1} (the 3-sigma silhouette then satisfies form = 9).
Splat2D project_affine(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c, const Camera& cam);

/// Pinhole projection of a camera-space point to pixels.
Eigen::Vector2d pinhole_project(const Eigen::Vector3d& p_c, const Camera& cam);

} // namespace csplat
