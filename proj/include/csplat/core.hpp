#pragma once

#include "csplat/types.hpp"

#include <Eigen/Core>
#include <span>

namespace csplat {

inline constexpr int kMaxShCoeffs = 16;

/// Number of real SH basis functions for degrees 0..3: (degree+1)^2.
int sh_coeff_count(int degree);

/// Normalizes q and converts to a rotation matrix. Quaternion order (w,x,y,z).
/// Throws invalid-parameter on zero-length or non-finite input.
Eigen::Matrix3d rotation_from_quaternion(const Eigen::Vector4d& q);

/// Hamilton product of (w,x,y,z) quaternions.
Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b);

/// Sigma = R diag(exp(2 s)) R^T. Symmetric positive definite for finite inputs.
Eigen::Matrix3d build_covariance(const Eigen::Vector4d& rotation, const Eigen::Vector3d& log_scales);

/// Rigid transform into camera space: Sigma_c = R_w Sigma R_w^T, p_c = R_w p + t_w.
std::pair<Eigen::Matrix3d, Eigen::Vector3d> to_camera(const Eigen::Matrix3d& sigma,
                                                      const Eigen::Vector3d& p,
                                                      const Camera& cam);

/// Real SH basis values for a unit direction, bands 0..degree.
void sh_basis(const Eigen::Vector3d& dir, int degree, double* basis);

/// d(basis_i)/d(dir) for the same ordering; grad is (count x 3) row-major.
void sh_basis_gradient(const Eigen::Vector3d& dir, int degree, double* grad);

/// View-dependent color: basis . coeffs + 0.5, clamped at 0 per channel.
/// view_dir must be unit length; degree must not exceed the stored bands.
Eigen::Vector3d eval_sh(std::span<const Eigen::Vector3d> sh_coeffs,
                        const Eigen::Vector3d& view_dir,
                        int degree);

} // namespace csplat
