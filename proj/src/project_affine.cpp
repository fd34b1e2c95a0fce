#include "csplat/project_affine.hpp"

#include "csplat/error.hpp"

#include <cmath>

namespace csplat {

Eigen::Matrix<double, 2, 3> affine_jacobian(const Eigen::Vector3d& p_c, const Camera& cam) {
    const double z = p_c.z();
    if (!(z > 0.0)) {
        throw Error(ErrorKind::BehindCamera, "affine_jacobian requires z > 0");
    }
    const double inv_z = 1.0 / z;
    const double inv_z2 = inv_z * inv_z;
    Eigen::Matrix<double, 2, 3> j;
    j << cam.fx * inv_z, 0.0, -cam.fx * p_c.x() * inv_z2,
         0.0, cam.fy * inv_z, -cam.fy * p_c.y() * inv_z2;
    return j;
}

Eigen::Vector2d pinhole_project(const Eigen::Vector3d& p_c, const Camera& cam) {
    if (!(p_c.z() > 0.0)) {
        throw Error(ErrorKind::BehindCamera, "pinhole projection requires z > 0");
    }
    return {cam.fx * p_c.x() / p_c.z() + 0.5 * cam.width,
            cam.fy * p_c.y() / p_c.z() + 0.5 * cam.height};
}

Splat2D project_affine(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c, const Camera& cam) {
    Eigen::Matrix<double, 2, 3> j = affine_jacobian(p_c, cam);
    Eigen::Matrix2d sigma2d = j * sigma_c * j.transpose();

    const double det = sigma2d(0, 0) * sigma2d(1, 1) - sigma2d(0, 1) * sigma2d(1, 0);
    const double scale = sigma2d.cwiseAbs().maxCoeff();
    if (!(det > 1e-14 * scale * scale) || !std::isfinite(det)) {
        throw Error(ErrorKind::DegenerateSplat, "numerically singular projected covariance");
    }

    Splat2D splat;
    splat.center = pinhole_project(p_c, cam);
    splat.inv_cov << sigma2d(1, 1) / det, -sigma2d(0, 1) / det,
                     -sigma2d(1, 0) / det, sigma2d(0, 0) / det;
    splat.depth = p_c.z();
    return splat;
}

} // namespace csplat
