#include "csplat/core.hpp"

#include "csplat/error.hpp"

#include <cmath>

namespace csplat {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::BehindCamera: return "behind-camera";
    case ErrorKind::DegenerateSplat: return "degenerate-splat";
    case ErrorKind::CameraInside: return "camera-inside";
    case ErrorKind::NonEllipseConic: return "non-ellipse-conic";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::RenderNonFinite: return "render-non-finite";
    case ErrorKind::OracleBracketing: return "oracle-bracketing";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::IoError: return "io-error";
    }
    return "unknown";
}

int sh_coeff_count(int degree) {
    return (degree + 1) * (degree + 1);
}

Eigen::Matrix3d rotation_from_quaternion(const Eigen::Vector4d& q) {
    if (!q.allFinite()) {
        throw Error(ErrorKind::InvalidParameter, "non-finite quaternion");
    }
    double n = q.norm();
    if (n < 1e-300) {
        throw Error(ErrorKind::InvalidParameter, "zero-length quaternion");
    }
    const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    Eigen::Matrix3d r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
         2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
         2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Eigen::Matrix3d build_covariance(const Eigen::Vector4d& rotation, const Eigen::Vector3d& log_scales) {
    if (!log_scales.allFinite()) {
        throw Error(ErrorKind::InvalidParameter, "non-finite log scales");
    }
    Eigen::Matrix3d r = rotation_from_quaternion(rotation);
    Eigen::Vector3d var = (2.0 * log_scales).array().exp();
    return r * var.asDiagonal() * r.transpose();
}

std::pair<Eigen::Matrix3d, Eigen::Vector3d> to_camera(const Eigen::Matrix3d& sigma,
                                                      const Eigen::Vector3d& p,
                                                      const Camera& cam) {
    Eigen::Matrix3d sigma_c = cam.rotation * sigma * cam.rotation.transpose();
    return {sigma_c, cam.to_camera_point(p)};
}

namespace {

// Real SH constants in the ordering used by 3DGS point clouds.
constexpr double kSh0 = 0.28209479177387814;
constexpr double kSh1 = 0.4886025119029199;
constexpr double kSh2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                            -1.0925484305920792, 0.5462742152960396};
constexpr double kSh3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                            0.3731763325901154, -0.4570457994644658, 1.445305721320277,
                            -0.5900435899266435};

} // namespace

void sh_basis(const Eigen::Vector3d& dir, int degree, double* basis) {
    const double x = dir.x(), y = dir.y(), z = dir.z();
    basis[0] = kSh0;
    if (degree < 1) return;
    basis[1] = -kSh1 * y;
    basis[2] = kSh1 * z;
    basis[3] = -kSh1 * x;
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    basis[4] = kSh2[0] * x * y;
    basis[5] = kSh2[1] * y * z;
    basis[6] = kSh2[2] * (2.0 * zz - xx - yy);
    basis[7] = kSh2[3] * x * z;
    basis[8] = kSh2[4] * (xx - yy);
    if (degree < 3) return;
    basis[9] = kSh3[0] * y * (3.0 * xx - yy);
    basis[10] = kSh3[1] * x * y * z;
    basis[11] = kSh3[2] * y * (4.0 * zz - xx - yy);
    basis[12] = kSh3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    basis[13] = kSh3[4] * x * (4.0 * zz - xx - yy);
    basis[14] = kSh3[5] * z * (xx - yy);
    basis[15] = kSh3[6] * x * (xx - 3.0 * yy);
}

void sh_basis_gradient(const Eigen::Vector3d& dir, int degree, double* grad) {
    const double x = dir.x(), y = dir.y(), z = dir.z();
    auto row = [grad](int i) { return grad + 3 * i; };
    auto set = [&](int i, double gx, double gy, double gz) {
        row(i)[0] = gx;
        row(i)[1] = gy;
        row(i)[2] = gz;
    };
    set(0, 0.0, 0.0, 0.0);
    if (degree < 1) return;
    set(1, 0.0, -kSh1, 0.0);
    set(2, 0.0, 0.0, kSh1);
    set(3, -kSh1, 0.0, 0.0);
    if (degree < 2) return;
    set(4, kSh2[0] * y, kSh2[0] * x, 0.0);
    set(5, 0.0, kSh2[1] * z, kSh2[1] * y);
    set(6, -2.0 * kSh2[2] * x, -2.0 * kSh2[2] * y, 4.0 * kSh2[2] * z);
    set(7, kSh2[3] * z, 0.0, kSh2[3] * x);
    set(8, 2.0 * kSh2[4] * x, -2.0 * kSh2[4] * y, 0.0);
    if (degree < 3) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    set(9, kSh3[0] * 6.0 * x * y, kSh3[0] * (3.0 * xx - 3.0 * yy), 0.0);
    set(10, kSh3[1] * y * z, kSh3[1] * x * z, kSh3[1] * x * y);
    set(11, -2.0 * kSh3[2] * x * y, kSh3[2] * (4.0 * zz - xx - 3.0 * yy), kSh3[2] * 8.0 * y * z);
    set(12, -6.0 * kSh3[3] * x * z, -6.0 * kSh3[3] * y * z, kSh3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy));
    set(13, kSh3[4] * (4.0 * zz - 3.0 * xx - yy), -2.0 * kSh3[4] * x * y, kSh3[4] * 8.0 * x * z);
    set(14, 2.0 * kSh3[5] * x * z, -2.0 * kSh3[5] * y * z, kSh3[5] * (xx - yy));
    set(15, kSh3[6] * (3.0 * xx - 3.0 * yy), -6.0 * kSh3[6] * x * y, 0.0);
}

Eigen::Vector3d eval_sh(std::span<const Eigen::Vector3d> sh_coeffs,
                        const Eigen::Vector3d& view_dir,
                        int degree) {
    const int count = sh_coeff_count(degree);
    if (degree < 0 || degree > 3 || count > static_cast<int>(sh_coeffs.size())) {
        throw Error(ErrorKind::InvalidParameter, "SH degree exceeds stored coefficients");
    }
    double basis[kMaxShCoeffs];
    sh_basis(view_dir, degree, basis);
    Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);
    for (int i = 0; i < count; ++i) {
        color += basis[i] * sh_coeffs[i];
    }
    return color.cwiseMax(0.0);
}

} // namespace csplat
