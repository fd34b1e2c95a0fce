#include "grad_vjp.hpp"

#include "csplat/core.hpp"
#include "csplat/error.hpp"
#include "csplat/project_affine.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace csplat::vjp {

ConicForward conic_forward(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c) {
    ConicForward f;
    Eigen::LLT<Eigen::Matrix3d> llt(sigma_c);
    Eigen::Matrix3d a_raw = llt.solve(Eigen::Matrix3d::Identity());
    f.a = 0.5 * (a_raw + a_raw.transpose());
    f.p_c = p_c;
    f.ap = f.a * p_c;
    f.level = p_c.dot(f.ap);
    if (!(f.level > 9.0)) {
        throw Error(ErrorKind::CameraInside, "conic_forward on camera-inside Gaussian");
    }
    Eigen::Matrix3d q_raw = f.ap * f.ap.transpose() - (f.level - 9.0) * f.a;
    f.q = 0.5 * (q_raw + q_raw.transpose());

    Eigen::Matrix2d q2_0 = f.q.topLeftCorner<2, 2>();
    f.sign = q2_0(0, 0) > 0.0 ? 1.0 : -1.0;
    f.q2 = f.sign * q2_0;
    f.q1 = f.sign * f.q.topRightCorner<2, 1>();
    f.q33 = f.sign * f.q(2, 2);
    f.q2_inv = f.q2.inverse();
    f.v0 = -f.q2_inv * f.q1;
    f.c0 = f.q33 + f.q1.dot(f.v0);
    if (!(f.c0 < 0.0)) {
        throw Error(ErrorKind::NonEllipseConic, "conic_forward on non-ellipse section");
    }
    f.m = (9.0 / -f.c0) * f.q2;
    return f;
}

void conic_backward(const ConicForward& f, const Eigen::Vector2d& d_v0, const Eigen::Matrix2d& d_m,
                    Eigen::Matrix3d& d_sigma_c, Eigen::Vector3d& d_p_c) {
    // m = (9 / -c0) q2
    Eigen::Matrix2d g_q2 = (9.0 / -f.c0) * d_m;
    double g_c0 = (9.0 / (f.c0 * f.c0)) * d_m.cwiseProduct(f.q2).sum();

    // c0 = q33 - q1^T q2^{-1} q1
    double g_q33 = g_c0;
    Eigen::Vector2d g_q1 = g_c0 * 2.0 * f.v0;
    g_q2 += g_c0 * f.v0 * f.v0.transpose();

    // v0 = -q2^{-1} q1
    Eigen::Vector2d qi_g = f.q2_inv.transpose() * d_v0;
    g_q1 += -qi_g;
    g_q2 += -qi_g * f.v0.transpose();

    // undo the sign flip and re-pack the 3x3 gradient
    Eigen::Matrix3d g_q = Eigen::Matrix3d::Zero();
    g_q.topLeftCorner<2, 2>() = f.sign * g_q2;
    g_q.topRightCorner<2, 1>() = f.sign * g_q1;
    g_q(2, 2) = f.sign * g_q33;

    // q = (q_raw + q_raw^T) / 2
    Eigen::Matrix3d g = 0.5 * (g_q + g_q.transpose());

    // q_raw = (A p)(A p)^T - (level - 9) A, level = p^T A p.
    // With P = p p^T and <.,.> the entrywise contraction:
    //   g_A = G A P + P A G - <G, A> P - (level - 9) G
    //   g_p = A (G + G^T) (A p) - 2 <G, A> (A p)
    const Eigen::Matrix3d& a = f.a;
    const double g_dot_a = g.cwiseProduct(a).sum();
    Eigen::Matrix3d pp = f.p_c * f.p_c.transpose();
    Eigen::Matrix3d g_a = g * a * pp + pp * a * g - g_dot_a * pp - (f.level - 9.0) * g;
    Eigen::Vector3d g_p = a * (g + g.transpose()) * f.ap - 2.0 * g_dot_a * f.ap;

    // a = (a_raw + a_raw^T) / 2, a_raw = sigma_c^{-1}
    Eigen::Matrix3d g_araw = 0.5 * (g_a + g_a.transpose());
    d_sigma_c += inverse_vjp(a, g_araw);
    d_p_c += g_p;
}

void image_plane_backward(const Camera& cam, const Eigen::Vector2d& d_center,
                          const Eigen::Matrix2d& d_inv_cov, Eigen::Vector2d& d_v0,
                          Eigen::Matrix2d& d_m) {
    d_v0 += Eigen::Vector2d(cam.fx * d_center.x(), cam.fy * d_center.y());
    const double fvals[2] = {cam.fx, cam.fy};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            d_m(i, j) += d_inv_cov(i, j) / (fvals[i] * fvals[j]);
        }
    }
}

void affine_backward(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c, const Camera& cam,
                     const Eigen::Vector2d& d_center, const Eigen::Matrix2d& d_inv_cov,
                     Eigen::Matrix3d& d_sigma_c, Eigen::Vector3d& d_p_c) {
    Eigen::Matrix<double, 2, 3> j = affine_jacobian(p_c, cam);
    Eigen::Matrix2d sigma2d = j * sigma_c * j.transpose();
    Eigen::Matrix2d inv = sigma2d.inverse();

    // inv_cov = sigma2d^{-1}
    Eigen::Matrix2d g_sigma2d = inverse_vjp(inv, d_inv_cov);

    // sigma2d = J sigma_c J^T
    d_sigma_c += j.transpose() * g_sigma2d * j;

    // J depends on p_c
    const double x = p_c.x(), y = p_c.y(), z = p_c.z();
    const double fx = cam.fx, fy = cam.fy;
    const double z2 = z * z, z3 = z2 * z;
    Eigen::Matrix<double, 2, 3> dj[3];
    dj[0] << 0, 0, -fx / z2, 0, 0, 0;                            // d/dx
    dj[1] << 0, 0, 0, 0, 0, -fy / z2;                            // d/dy
    dj[2] << -fx / z2, 0, 2.0 * fx * x / z3, 0, -fy / z2, 2.0 * fy * y / z3; // d/dz
    for (int k = 0; k < 3; ++k) {
        Eigen::Matrix2d dsig = dj[k] * sigma_c * j.transpose() + j * sigma_c * dj[k].transpose();
        d_p_c[k] += g_sigma2d.cwiseProduct(dsig).sum();
    }

    // center = pinhole(p_c): jacobian equals J
    d_p_c += j.transpose() * d_center;
}

void to_camera_backward(const Camera& cam, const Eigen::Matrix3d& d_sigma_c,
                        const Eigen::Vector3d& d_p_c, Eigen::Matrix3d& d_sigma,
                        Eigen::Vector3d& d_p_world) {
    d_sigma += cam.rotation.transpose() * d_sigma_c * cam.rotation;
    d_p_world += cam.rotation.transpose() * d_p_c;
}

void build_covariance_backward(const Eigen::Vector4d& rotation, const Eigen::Vector3d& log_scales,
                               const Eigen::Matrix3d& d_sigma, Eigen::Vector4d& d_rotation,
                               Eigen::Vector3d& d_log_scales) {
    const double norm = rotation.norm();
    const Eigen::Vector4d qn = rotation / norm;
    const double w = qn[0], x = qn[1], y = qn[2], z = qn[3];
    Eigen::Matrix3d r = rotation_from_quaternion(rotation);
    Eigen::Vector3d var = (2.0 * log_scales).array().exp();

    // Sigma = R D R^T
    Eigen::Matrix3d g_r = d_sigma * r * var.asDiagonal() + d_sigma.transpose() * r * var.asDiagonal();
    Eigen::Matrix3d rt_g_r = r.transpose() * d_sigma * r;
    for (int i = 0; i < 3; ++i) {
        d_log_scales[i] += rt_g_r(i, i) * 2.0 * var[i];
    }

    // dR / d(normalized quaternion)
    Eigen::Matrix3d dr[4];
    dr[0] << 0, -2 * z, 2 * y,
             2 * z, 0, -2 * x,
             -2 * y, 2 * x, 0;
    dr[1] << 0, 2 * y, 2 * z,
             2 * y, -4 * x, -2 * w,
             2 * z, 2 * w, -4 * x;
    dr[2] << -4 * y, 2 * x, 2 * w,
             2 * x, 0, 2 * z,
             -2 * w, 2 * z, -4 * y;
    dr[3] << -4 * z, -2 * w, 2 * x,
             2 * w, -4 * z, 2 * y,
             2 * x, 2 * y, 0;
    Eigen::Vector4d g_qn;
    for (int k = 0; k < 4; ++k) {
        g_qn[k] = g_r.cwiseProduct(dr[k]).sum();
    }

    // q_hat = q / |q|
    d_rotation += (g_qn - qn * qn.dot(g_qn)) / norm;
}

Eigen::Vector3d normalize_backward(const Eigen::Vector3d& v, const Eigen::Vector3d& d_unit) {
    const double n = v.norm();
    const Eigen::Vector3d u = v / n;
    return (d_unit - u * u.dot(d_unit)) / n;
}

} // namespace csplat::vjp
