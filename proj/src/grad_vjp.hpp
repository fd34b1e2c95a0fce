#pragma once

// Hand-derived vector-Jacobian products for every differentiable layer of the
// forward pass. Conventions: matrix gradients treat all entries as
// independent; upstream gradients accumulate with +=. Each routine is checked
// against finite differences in the test suite.

#include "csplat/types.hpp"

#include <Eigen/Core>

namespace csplat::vjp {

/// Y = X^{-1}: given dL/dY, returns dL/dX = -Y^T G Y^T.
template <typename Mat>
Mat inverse_vjp(const Mat& y, const Mat& g) {
    return -(y.transpose() * g * y.transpose());
}

// ---- conic projection chain ------------------------------------------------

struct ConicForward {
    Eigen::Matrix3d a;      // Sigma_c^{-1}, symmetrized
    Eigen::Vector3d p_c;
    Eigen::Vector3d ap;     // A p_c
    double level = 0.0;     // p_c^T A p_c
    Eigen::Matrix3d q;      // cone matrix, symmetrized
    double sign = 1.0;      // flip making the restricted block SPD
    Eigen::Matrix2d q2;     // flipped blocks of the z=1 restriction
    Eigen::Vector2d q1;
    double q33 = 0.0;
    Eigen::Matrix2d q2_inv;
    Eigen::Vector2d v0;
    double c0 = 0.0;
    Eigen::Matrix2d m;      // (v - v0)^T m (v - v0) = 9
};

/// Recomputes the admissible conic chain (camera outside, ellipse section).
ConicForward conic_forward(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c);

/// Accumulates dL/d(sigma_c), dL/d(p_c) from gradients on (v0, m).
void conic_backward(const ConicForward& f, const Eigen::Vector2d& d_v0, const Eigen::Matrix2d& d_m,
                    Eigen::Matrix3d& d_sigma_c, Eigen::Vector3d& d_p_c);

// ---- affine projection chain -----------------------------------------------

/// Accumulates dL/d(sigma_c), dL/d(p_c) from gradients on the affine splat
/// (center in pixels, inverse 2D covariance).
void affine_backward(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c, const Camera& cam,
                     const Eigen::Vector2d& d_center, const Eigen::Matrix2d& d_inv_cov,
                     Eigen::Matrix3d& d_sigma_c, Eigen::Vector3d& d_p_c);

/// Image-plane map VJP for the conic path: (v0, M) -> (center px, inv_cov).
void image_plane_backward(const Camera& cam, const Eigen::Vector2d& d_center,
                          const Eigen::Matrix2d& d_inv_cov, Eigen::Vector2d& d_v0,
                          Eigen::Matrix2d& d_m);

// ---- world-space parameter chain -------------------------------------------

/// Sigma_c = R Sigma R^T, p_c = R p + t.
void to_camera_backward(const Camera& cam, const Eigen::Matrix3d& d_sigma_c,
                        const Eigen::Vector3d& d_p_c, Eigen::Matrix3d& d_sigma,
                        Eigen::Vector3d& d_p_world);

/// Sigma = R(q/|q|) diag(exp(2 s)) R^T; quaternion gradient flows through the
/// normalization so raw (unnormalized) storage is differentiable.
void build_covariance_backward(const Eigen::Vector4d& rotation, const Eigen::Vector3d& log_scales,
                               const Eigen::Matrix3d& d_sigma, Eigen::Vector4d& d_rotation,
                               Eigen::Vector3d& d_log_scales);

/// d = v / |v|.
Eigen::Vector3d normalize_backward(const Eigen::Vector3d& v, const Eigen::Vector3d& d_unit);

} // namespace csplat::vjp
