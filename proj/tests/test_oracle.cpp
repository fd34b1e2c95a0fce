#include "csplat/core.hpp"
#include "csplat/error.hpp"
#include "csplat/oracle.hpp"
#include "csplat/prefilter.hpp"
#include "csplat/project_conic.hpp"
#include "csplat/rng.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace csplat;

TEST(RayQuadratic, UnitSphereIntersection) {
    RayQuadratic rq = ray_quadratic(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                                    {0, 0, -2}, {0, 0, 1});
    EXPECT_DOUBLE_EQ(rq.a, 1.0);
    EXPECT_DOUBLE_EQ(rq.b, -4.0);
    EXPECT_DOUBLE_EQ(rq.c, 3.0);
    // roots t = 1 and t = 3
    const double disc = rq.b * rq.b - 4.0 * rq.a * rq.c;
    EXPECT_NEAR((-rq.b - std::sqrt(disc)) / (2.0 * rq.a), 1.0, 1e-12);
    EXPECT_NEAR((-rq.b + std::sqrt(disc)) / (2.0 * rq.a), 3.0, 1e-12);
}

TEST(RayQuadratic, ThirtyDegreeTangent) {
    // from (0,0,-2) the tangent rays to the unit sphere sit at asin(1/2)
    const double angle = std::asin(0.5);
    Eigen::Vector3d d{std::sin(angle), 0.0, std::cos(angle)};
    RayQuadratic rq = ray_quadratic(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                                    {0, 0, -2}, d);
    EXPECT_NEAR(tangency_residual(rq), 0.0, 1e-12);
}

TEST(RayQuadratic, RootsMatchBisectionSurfaceHits) {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::Matrix3d sigma = build_covariance(
            rng.unit_quaternion(), {rng.uniform(-1, 0.5), rng.uniform(-1, 0.5), rng.uniform(-1, 0.5)});
        Eigen::Matrix3d a_unit = ellipsoid_form(sigma); // treat as unit-level form directly
        Eigen::Vector3d center = rng.normal3();
        Eigen::Vector3d eye = center + 6.0 * rng.unit_vector();
        Eigen::Vector3d dir = (center - eye).normalized();

        RayQuadratic rq = ray_quadratic(a_unit, center, eye, dir);
        const double disc = tangency_residual(rq);
        ASSERT_GT(disc, 0.0);
        const double t0 = (-rq.b / 2.0 - std::sqrt(disc)) / rq.a;

        // independent bisection on the level function along the ray; the
        // center itself (level -1) always sits between the two roots
        auto level = [&](double t) {
            Eigen::Vector3d x = eye + t * dir - center;
            return x.dot(a_unit * x) - 1.0;
        };
        double blo = 0.0, bhi = (center - eye).norm();
        ASSERT_GT(level(blo), 0.0);
        ASSERT_LT(level(bhi), 0.0);
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (blo + bhi);
            (level(mid) > 0.0 ? blo : bhi) = mid;
        }
        EXPECT_NEAR(t0, 0.5 * (blo + bhi), 1e-8 * std::max(1.0, t0));
    }
}

TEST(TangencyResidual, Signs) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
    // through the center: two roots
    EXPECT_GT(tangency_residual(ray_quadratic(a, Eigen::Vector3d::Zero(), {0, 0, -2}, {0, 0, 1})),
              0.0);
    // clean miss
    EXPECT_LT(tangency_residual(ray_quadratic(a, Eigen::Vector3d::Zero(), {0, 0, -2}, {0, 1, 0})),
              0.0);
}

TEST(SilhouetteBySearch, SphereClosedForm) {
    // sigma = 0.5 sphere at (0,0,5): silhouette radius on z=1 is 3/sqrt(91)
    Eigen::Matrix3d a_level9 = 4.0 * Eigen::Matrix3d::Identity();
    auto points = silhouette_by_search(a_level9, {0, 0, 5}, Eigen::Vector3d::Zero(), 32);
    ASSERT_EQ(points.size(), 32u);
    const double expected = 3.0 / std::sqrt(91.0);
    for (const auto& p : points) {
        EXPECT_NEAR(p.norm(), expected, 1e-9);
        EXPECT_NEAR(p.norm(), 0.314485, 1e-6);
    }
}

TEST(SilhouetteBySearch, AxisAlignedSymmetry) {
    Eigen::Matrix3d sigma = Eigen::Vector3d(0.09, 0.01, 0.04).asDiagonal();
    Eigen::Matrix3d a = ellipsoid_form(sigma);
    auto points = silhouette_by_search(a, {0, 0, 6}, Eigen::Vector3d::Zero(), 512);
    double max_x = 0, max_y = 0, min_x = 0, min_y = 0;
    for (const auto& p : points) {
        max_x = std::max(max_x, p.x());
        min_x = std::min(min_x, p.x());
        max_y = std::max(max_y, p.y());
        min_y = std::min(min_y, p.y());
    }
    EXPECT_NEAR(max_x, -min_x, 1e-6);
    EXPECT_NEAR(max_y, -min_y, 1e-6);
}

TEST(SilhouetteBySearch, MatchesProjectConic) {
    Rng rng(19);
    Camera cam;
    cam.fx = cam.fy = 1.0;
    cam.width = cam.height = 0; // image plane == z=1 plane
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::Matrix3d sigma = build_covariance(
            rng.unit_quaternion(), {rng.uniform(-3, 0), rng.uniform(-3, 0), rng.uniform(-3, 0)});
        double z = rng.uniform(2.0, 10.0);
        Eigen::Vector3d p{rng.uniform(-0.4, 0.4) * z, rng.uniform(-0.4, 0.4) * z, z};
        if (!prefilter_camera_space(sigma, p, cam, 1e9).keep) continue;

        Splat2D s = project_conic(sigma, p, cam);
        Eigen::Matrix3d a = ellipsoid_form(sigma);
        auto points = silhouette_by_search(a, p, Eigen::Vector3d::Zero(), 64);
        for (const auto& v : points) {
            Eigen::Vector2d d = v - s.center;
            const double form = d.dot(s.inv_cov * d);
            // on the ellipse the form equals 9; translate to a distance bound
            EXPECT_NEAR(form, 9.0, 1e-6);
        }
    }
}

TEST(SilhouetteBySearch, EyeInsideFails) {
    EXPECT_THROW(
        silhouette_by_search(Eigen::Matrix3d::Identity(), {0, 0, 0.5}, Eigen::Vector3d::Zero(), 8),
        Error);
}

TEST(SilhouetteBySearch, BehindPlaneBracketingFails) {
    Rng rng(43);
    int tested = 0;
    for (int trial = 0; trial < 4000 && tested < 40; ++trial) {
        Eigen::Matrix3d sigma = build_covariance(
            rng.unit_quaternion(), {rng.uniform(-1.5, 0.5), rng.uniform(-1.5, 0.5), rng.uniform(-1.5, 0.5)});
        const double sz = std::sqrt(sigma(2, 2));
        // decisive dip: z_min between -3 sz and -0.6 sz
        Eigen::Vector3d p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                          rng.uniform(0.0, 2.4) * sz};
        Eigen::Matrix3d a = ellipsoid_form(sigma);
        if (camera_inside(a, p)) continue;
        ASSERT_LT(min_depth(sigma, p), 0.0);
        ++tested;
        EXPECT_THROW(silhouette_by_search(a, p, Eigen::Vector3d::Zero(), 64), Error);
    }
    EXPECT_GE(tested, 40);
}

TEST(FdGradient, Quadratic) {
    auto f = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
    Eigen::VectorXd x0(1);
    x0 << 3.0;
    EXPECT_NEAR(fd_gradient(f, x0, 1e-4)[0], 6.0, 1e-8);
}

TEST(FdGradient, LinearIsExact) {
    auto f = [](const Eigen::VectorXd& x) { return 2.0 * x[0] - 7.0 * x[1]; };
    Eigen::VectorXd x0(2);
    x0 << 0.3, -1.2;
    Eigen::VectorXd g = fd_gradient(f, x0, 1e-5);
    EXPECT_NEAR(g[0], 2.0, 1e-10);
    EXPECT_NEAR(g[1], -7.0, 1e-10);
}

TEST(FdGradient, NonFiniteRejected) {
    auto f = [](const Eigen::VectorXd& x) { return std::sqrt(x[0]); }; // nan for x < 0
    Eigen::VectorXd x0(1);
    x0 << 1e-9;
    EXPECT_THROW(fd_gradient(f, x0, 1e-4), Error);
}
