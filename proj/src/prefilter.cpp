#include "csplat/prefilter.hpp"

#include "csplat/core.hpp"
#include "csplat/project_conic.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace csplat {

const char* to_string(RejectReason reason) {
    switch (reason) {
    case RejectReason::None: return "none";
    case RejectReason::CameraInside: return "camera-inside";
    case RejectReason::BehindPlane: return "behind-plane";
    case RejectReason::OutOfFrustum: return "out-of-frustum";
    }
    return "unknown";
}

bool camera_inside(const Eigen::Matrix3d& a, const Eigen::Vector3d& p_c) {
    return p_c.dot(a * p_c) <= 9.0;
}

double min_depth(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c) {
    return p_c.z() - 3.0 * std::sqrt(sigma_c(2, 2));
}

bool frustum_cull(const Splat2D& splat, const Camera& cam, double margin_px) {
    Eigen::Matrix2d sigma_img = splat.inv_cov.inverse();
    const double ex = 3.0 * std::sqrt(std::max(sigma_img(0, 0), 0.0));
    const double ey = 3.0 * std::sqrt(std::max(sigma_img(1, 1), 0.0));
    return splat.center.x() + ex < -margin_px || splat.center.x() - ex > cam.width + margin_px ||
           splat.center.y() + ey < -margin_px || splat.center.y() - ey > cam.height + margin_px;
}

FilterVerdict prefilter_camera_space(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c,
                                     const Camera& cam, double margin_px, double near_eps) {
    Eigen::Matrix3d a = ellipsoid_form(sigma_c);
    if (camera_inside(a, p_c)) {
        return {false, RejectReason::CameraInside};
    }
    if (min_depth(sigma_c, p_c) <= near_eps) {
        return {false, RejectReason::BehindPlane};
    }
    // Both projection paths must see identical survivor sets, so the frustum
    // test always uses the exact (conic) footprint.
    ConeMatrix cone = cone_matrix(a, p_c);
    UnitPlaneConic conic = conic_on_unit_plane(cone);
    if (conic.kind != ConicKind::Ellipse) {
        return {false, RejectReason::BehindPlane};
    }
    Splat2D splat = to_image_plane(conic.center, conic.form, p_c.z(), cam);
    if (frustum_cull(splat, cam, margin_px)) {
        return {false, RejectReason::OutOfFrustum};
    }
    return {true, RejectReason::None};
}

FilterVerdict prefilter(const Gaussian3D& g, const Camera& cam, double margin_px, double near_eps) {
    Eigen::Matrix3d sigma = build_covariance(g.rotation, g.log_scales);
    auto [sigma_c, p_c] = to_camera(sigma, g.position, cam);
    return prefilter_camera_space(sigma_c, p_c, cam, margin_px, near_eps);
}

} // namespace csplat
