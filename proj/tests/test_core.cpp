#include "csplat/core.hpp"
#include "csplat/error.hpp"
#include "csplat/rng.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace csplat;

TEST(BuildCovariance, IdentityCase) {
    Eigen::Matrix3d sigma = build_covariance({1, 0, 0, 0}, Eigen::Vector3d::Zero());
    EXPECT_LT((sigma - Eigen::Matrix3d::Identity()).norm(), 1e-15);
}

TEST(BuildCovariance, AxisAlignedScaling) {
    Eigen::Matrix3d sigma = build_covariance({1, 0, 0, 0}, {std::log(2.0), 0, 0});
    Eigen::Matrix3d expected = Eigen::Vector3d(4, 1, 1).asDiagonal();
    EXPECT_LT((sigma - expected).norm(), 1e-12);
}

TEST(BuildCovariance, EigenvaluesMatchScales) {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Vector4d q = rng.unit_quaternion();
        Eigen::Vector3d s{rng.uniform(-2, 1), rng.uniform(-2, 1), rng.uniform(-2, 1)};
        Eigen::Matrix3d sigma = build_covariance(q, s);

        // independent symmetric eigensolver oracle
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sigma);
        Eigen::Vector3d expected = (2.0 * s).array().exp();
        std::sort(expected.data(), expected.data() + 3);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(eig.eigenvalues()[i], expected[i], 1e-10 * expected[i]);
        }
    }
}

TEST(BuildCovariance, SpdForFiniteInputs) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Matrix3d sigma =
            build_covariance(rng.unit_quaternion(),
                             {rng.uniform(-4, 2), rng.uniform(-4, 2), rng.uniform(-4, 2)});
        Eigen::LLT<Eigen::Matrix3d> llt(sigma);
        EXPECT_EQ(llt.info(), Eigen::Success);
    }
}

TEST(BuildCovariance, ConjugationInvariance) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Vector4d q = rng.unit_quaternion();
        Eigen::Vector4d r = rng.unit_quaternion();
        Eigen::Vector3d s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Eigen::Matrix3d lhs = build_covariance(quat_multiply(q, r), s);
        Eigen::Matrix3d rot = rotation_from_quaternion(q);
        Eigen::Matrix3d rhs = rot * build_covariance(r, s) * rot.transpose();
        EXPECT_LT((lhs - rhs).norm(), 1e-12 * rhs.norm());
    }
}

TEST(BuildCovariance, RejectsBadInputs) {
    EXPECT_THROW(build_covariance({0, 0, 0, 0}, Eigen::Vector3d::Zero()), Error);
    EXPECT_THROW(build_covariance({1, 0, 0, 0}, Eigen::Vector3d::Constant(std::nan(""))), Error);
}

TEST(ToCamera, IdentityAndTranslation) {
    Camera cam;
    Eigen::Matrix3d sigma = Eigen::Vector3d(1, 2, 3).asDiagonal();
    Eigen::Vector3d p(0.5, -0.25, 4.0);
    auto [sc, pc] = to_camera(sigma, p, cam);
    EXPECT_LT((sc - sigma).norm(), 1e-15);
    EXPECT_LT((pc - p).norm(), 1e-15);

    cam.translation = {0, 0, 5};
    auto [sc2, pc2] = to_camera(sigma, p, cam);
    EXPECT_LT((sc2 - sigma).norm(), 1e-15);
    EXPECT_LT((pc2 - (p + Eigen::Vector3d(0, 0, 5))).norm(), 1e-15);
}

TEST(ToCamera, RotationConjugates) {
    Camera cam;
    cam.rotation << 0, -1, 0, 1, 0, 0, 0, 0, 1; // 90 degrees about z
    Eigen::Matrix3d sigma;
    sigma << 2, 0.3, 0.1, 0.3, 1, 0.2, 0.1, 0.2, 0.5;
    auto [sc, pc] = to_camera(sigma, {1, 0, 0}, cam);
    Eigen::Matrix3d expected = cam.rotation * sigma * cam.rotation.transpose();
    EXPECT_LT((sc - expected).norm(), 1e-14);
    EXPECT_LT((pc - Eigen::Vector3d(0, 1, 0)).norm(), 1e-14);
}

TEST(ToCamera, PreservesEigenvalues) {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::Matrix3d sigma = build_covariance(
            rng.unit_quaternion(), {rng.uniform(-2, 1), rng.uniform(-2, 1), rng.uniform(-2, 1)});
        Camera cam;
        cam.rotation = rotation_from_quaternion(rng.unit_quaternion());
        cam.translation = rng.normal3();
        auto [sc, pc] = to_camera(sigma, rng.normal3(), cam);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> before(sigma);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> after(sc);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(after.eigenvalues()[i], before.eigenvalues()[i],
                        1e-10 * before.eigenvalues()[i]);
        }
    }
}

TEST(EvalSh, ConstantBand) {
    std::vector<Eigen::Vector3d> coeffs{Eigen::Vector3d::Constant(1.0 / 0.28209479)};
    Eigen::Vector3d rgb = eval_sh({coeffs.data(), coeffs.size()}, {0, 0, 1}, 0);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(rgb[k], 1.5, 1e-6);
}

TEST(EvalSh, OffsetOnly) {
    std::vector<Eigen::Vector3d> coeffs{Eigen::Vector3d::Zero()};
    Eigen::Vector3d rgb = eval_sh({coeffs.data(), coeffs.size()}, {0, 0, 1}, 0);
    for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(rgb[k], 0.5);
}

TEST(EvalSh, Band1FlipsWithDirection) {
    // single nonzero band-1 coefficient against the tabulated basis value
    std::vector<Eigen::Vector3d> coeffs(4, Eigen::Vector3d::Zero());
    coeffs[2] = {0.25, 0.0, 0.0}; // z-linear basis function
    const double c1 = 0.4886025119029199;
    Eigen::Vector3d up = eval_sh({coeffs.data(), coeffs.size()}, {0, 0, 1}, 1);
    Eigen::Vector3d down = eval_sh({coeffs.data(), coeffs.size()}, {0, 0, -1}, 1);
    EXPECT_NEAR(up[0], 0.5 + c1 * 0.25, 1e-12);
    EXPECT_NEAR(down[0], 0.5 - c1 * 0.25, 1e-12);
}

TEST(EvalSh, DegreeBeyondStorageRejected) {
    std::vector<Eigen::Vector3d> coeffs{Eigen::Vector3d::Zero()};
    EXPECT_THROW(eval_sh({coeffs.data(), coeffs.size()}, {0, 0, 1}, 1), Error);
}

TEST(EvalSh, BasisMatchesTabulatedValues) {
    // spot-check degree 2 and 3 rows against direct evaluation of the real
    // SH polynomials at a non-axis direction
    Eigen::Vector3d d = Eigen::Vector3d(0.3, -0.5, 0.81).normalized();
    double basis[kMaxShCoeffs];
    sh_basis(d, 3, basis);
    const double x = d.x(), y = d.y(), z = d.z();
    EXPECT_NEAR(basis[4], 1.0925484305920792 * x * y, 1e-15);
    EXPECT_NEAR(basis[6], 0.31539156525252005 * (2 * z * z - x * x - y * y), 1e-15);
    EXPECT_NEAR(basis[12], 0.3731763325901154 * z * (2 * z * z - 3 * x * x - 3 * y * y), 1e-15);
    EXPECT_NEAR(basis[15], -0.5900435899266435 * x * (x * x - 3 * y * y), 1e-15);
}

TEST(Gaussian3D, ActivationHelpers) {
    Gaussian3D g;
    EXPECT_DOUBLE_EQ(g.opacity(), 0.5);
    g.opacity_logit = 30.0;
    EXPECT_LT(g.opacity(), 1.0);
    EXPECT_GT(g.opacity(), 0.0);
    g.log_scales = {std::log(0.5), 0.0, std::log(2.0)};
    EXPECT_NEAR(g.scales()[0], 0.5, 1e-15);
    EXPECT_NEAR(g.scales()[2], 2.0, 1e-15);
}
