#include "csplat/project_conic.hpp"

#include "csplat/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace csplat {

const char* to_string(ConicKind kind) {
    switch (kind) {
    case ConicKind::Ellipse: return "ellipse";
    case ConicKind::Parabola: return "parabola";
    case ConicKind::Hyperbola: return "hyperbola";
    case ConicKind::Degenerate: return "degenerate";
    }
    return "unknown";
}

Eigen::Matrix3d ellipsoid_form(const Eigen::Matrix3d& sigma_c) {
    if (!sigma_c.allFinite()) {
        throw Error(ErrorKind::InvalidParameter, "non-finite covariance");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sigma_c);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
        throw Error(ErrorKind::IllConditioned, "covariance not positive definite");
    }
    if (hi / lo > 1e12) {
        throw Error(ErrorKind::IllConditioned, "covariance condition number above 1e12");
    }
    Eigen::LLT<Eigen::Matrix3d> llt(sigma_c);
    Eigen::Matrix3d a = llt.solve(Eigen::Matrix3d::Identity());
    return 0.5 * (a + a.transpose());
}

ConeMatrix cone_matrix(const Eigen::Matrix3d& a, const Eigen::Vector3d& p_c) {
    const Eigen::Vector3d ap = a * p_c;
    const double level = p_c.dot(ap);
    if (!(level > 9.0)) {
        throw Error(ErrorKind::CameraInside, "camera origin inside or on the 3-sigma ellipsoid");
    }
    Eigen::Matrix3d q = ap * ap.transpose() - (level - 9.0) * a;
    ConeMatrix cone;
    cone.q = 0.5 * (q + q.transpose());
    return cone;
}

UnitPlaneConic conic_on_unit_plane(const ConeMatrix& cone) {
    UnitPlaneConic out;
    out.q2 = cone.q.topLeftCorner<2, 2>();
    out.q1 = cone.q.topRightCorner<2, 1>();
    out.q33 = cone.q(2, 2);

    const double det = out.q2(0, 0) * out.q2(1, 1) - out.q2(0, 1) * out.q2(1, 0);
    const double norm2 = out.q2.squaredNorm(); // Frobenius
    if (std::abs(det) <= 1e-12 * norm2) {
        out.kind = ConicKind::Parabola;
        return out;
    }
    if (det < 0.0) {
        out.kind = ConicKind::Hyperbola;
        return out;
    }

    // Definite block: flip the whole conic if needed so q2 is SPD.
    const double sign = out.q2(0, 0) > 0.0 ? 1.0 : -1.0;
    Eigen::Matrix2d q2 = sign * out.q2;
    Eigen::Vector2d q1 = sign * out.q1;
    double q33 = sign * out.q33;

    Eigen::Vector2d v0 = -q2.inverse() * q1;
    double c0 = q33 + q1.dot(v0); // q33 - q1^T q2^{-1} q1
    if (!(c0 < 0.0)) {
        // Point or empty conic; a real ellipse needs negative interior value
        // once q2 is positive definite.
        out.kind = ConicKind::Degenerate;
        return out;
    }

    out.kind = ConicKind::Ellipse;
    out.center = v0;
    out.form = (9.0 / -c0) * q2;
    return out;
}

Splat2D to_image_plane(const Eigen::Vector2d& v0, const Eigen::Matrix2d& m, double depth,
                       const Camera& cam) {
    Splat2D splat;
    splat.center = {cam.fx * v0.x() + 0.5 * cam.width, cam.fy * v0.y() + 0.5 * cam.height};
    splat.inv_cov << m(0, 0) / (cam.fx * cam.fx), m(0, 1) / (cam.fx * cam.fy),
                     m(1, 0) / (cam.fy * cam.fx), m(1, 1) / (cam.fy * cam.fy);
    splat.depth = depth;
    return splat;
}

Splat2D project_conic(const Eigen::Matrix3d& sigma_c, const Eigen::Vector3d& p_c, const Camera& cam) {
    Eigen::Matrix3d a = ellipsoid_form(sigma_c);
    ConeMatrix cone = cone_matrix(a, p_c);
    UnitPlaneConic conic = conic_on_unit_plane(cone);
    if (conic.kind != ConicKind::Ellipse) {
        throw Error(ErrorKind::NonEllipseConic,
                    std::string("projection is a ") + to_string(conic.kind) +
                        "; the prefilter should have rejected this Gaussian");
    }
    return to_image_plane(conic.center, conic.form, p_c.z(), cam);
}

} // namespace csplat
