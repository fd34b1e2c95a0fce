#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

namespace csplat {

/// One scene primitive. Scales are kept in the log domain and opacity as a
/// logit so every field is an unconstrained optimization variable; the
/// activations (exp, sigmoid, quaternion normalization) happen at use sites.
struct Gaussian3D {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector4d rotation = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0); // quaternion (w,x,y,z), normalized on use
    Eigen::Vector3d log_scales = Eigen::Vector3d::Zero();
    double opacity_logit = 0.0;
    std::vector<Eigen::Vector3d> sh_coeffs{Eigen::Vector3d::Zero()}; // rgb per basis function, degree 0..3

    double opacity() const { return 1.0 / (1.0 + std::exp(-opacity_logit)); }
    Eigen::Vector3d scales() const { return log_scales.array().exp(); }
};

/// Pinhole camera: intrinsics in pixels plus a rigid world-to-camera
/// transform p_c = R p + t. Camera space looks down +z; the image plane
/// is z = 1 scaled by (fx, fy) and shifted to the pixel origin.
struct Camera {
    double fx = 1.0;
    double fy = 1.0;
    int width = 1;
    int height = 1;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d to_camera_point(const Eigen::Vector3d& p_world) const {
        return rotation * p_world + translation;
    }
    Eigen::Vector3d center_world() const { return -rotation.transpose() * translation; }
};

/// Linear RGB image, row-major, channels in [0,1] after rendering.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels; // 3 * width * height, rgb interleaved

    static Image filled(int w, int h, const Eigen::Vector3d& rgb) {
        Image img;
        img.width = w;
        img.height = h;
        img.pixels.resize(static_cast<size_t>(w) * h * 3);
        for (int i = 0; i < w * h; ++i) {
            img.pixels[3 * i + 0] = rgb.x();
            img.pixels[3 * i + 1] = rgb.y();
            img.pixels[3 * i + 2] = rgb.z();
        }
        return img;
    }

    double* at(int x, int y) { return &pixels[3 * (static_cast<size_t>(y) * width + x)]; }
    const double* at(int x, int y) const { return &pixels[3 * (static_cast<size_t>(y) * width + x)]; }

    Eigen::Vector3d rgb(int x, int y) const {
        const double* p = at(x, y);
        return {p[0], p[1], p[2]};
    }
};

/// Projected primitive. inv_cov is the inverse 2D covariance in 1/px^2;
/// the 3-sigma silhouette satisfies (x - center)^T inv_cov (x - center) = 9.
struct Splat2D {
    Eigen::Vector2d center = Eigen::Vector2d::Zero(); // pixels
    Eigen::Matrix2d inv_cov = Eigen::Matrix2d::Identity();
    double depth = 0.0; // camera-space z of the source center, sort key
    int source_index = 0;
};

enum class ProjectionMode { Affine, Conic };

inline const char* to_string(ProjectionMode mode) {
    return mode == ProjectionMode::Affine ? "affine" : "conic";
}

} // namespace csplat
