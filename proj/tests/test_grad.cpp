#include "csplat/core.hpp"
#include "csplat/error.hpp"
#include "csplat/grad_opt.hpp"
#include "csplat/oracle.hpp"
#include "csplat/prefilter.hpp"
#include "csplat/project_affine.hpp"
#include "csplat/project_conic.hpp"
#include "csplat/raster.hpp"
#include "csplat/rng.hpp"
#include "csplat/ssim.hpp"
#include "csplat/synth.hpp"
#include "csplat/threading.hpp"
#include "grad_vjp.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace csplat;

namespace {

Camera small_camera() {
    Camera cam;
    cam.fx = cam.fy = 60.0;
    cam.width = cam.height = 64;
    return cam;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// Independent direct-loop SSIM, zero padding, 11x11 Gaussian window sigma 1.5.
double reference_ssim(const Image& a, const Image& b) {
    const int w = a.width, h = a.height;
    double taps[11];
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        double d = i - 5;
        taps[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;

    double total = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double m1 = 0, m2 = 0, e11 = 0, e22 = 0, e12 = 0;
                for (int dy = -5; dy <= 5; ++dy) {
                    for (int dx = -5; dx <= 5; ++dx) {
                        int xx = x + dx, yy = y + dy;
                        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                        double wgt = taps[dx + 5] * taps[dy + 5];
                        double va = a.at(xx, yy)[ch];
                        double vb = b.at(xx, yy)[ch];
                        m1 += wgt * va;
                        m2 += wgt * vb;
                        e11 += wgt * va * va;
                        e22 += wgt * vb * vb;
                        e12 += wgt * va * vb;
                    }
                }
                const double c1 = 1e-4, c2 = 9e-4;
                double sx = e11 - m1 * m1, sy = e22 - m2 * m2, sxy = e12 - m1 * m2;
                total += ((2 * m1 * m2 + c1) * (2 * sxy + c2)) /
                         ((m1 * m1 + m2 * m2 + c1) * (sx + sy + c2));
            }
        }
    }
    return total / (3.0 * w * h);
}

struct GradTestConfig {
    std::vector<Gaussian3D> scene; // single Gaussian
    Camera cam;
    Image ref;
    RenderOptions opts;
    int sh_degree = 0;
};

int param_count(const Gaussian3D& g) { return 11 + 3 * static_cast<int>(g.sh_coeffs.size()); }

Eigen::VectorXd pack(const Gaussian3D& g) {
    Eigen::VectorXd x(param_count(g));
    x.segment<3>(0) = g.position;
    x.segment<4>(3) = g.rotation;
    x.segment<3>(7) = g.log_scales;
    x[10] = g.opacity_logit;
    for (size_t c = 0; c < g.sh_coeffs.size(); ++c) x.segment<3>(11 + 3 * c) = g.sh_coeffs[c];
    return x;
}

Gaussian3D unpack(const Eigen::VectorXd& x, const Gaussian3D& proto) {
    Gaussian3D g = proto;
    g.position = x.segment<3>(0);
    g.rotation = x.segment<4>(3);
    g.log_scales = x.segment<3>(7);
    g.opacity_logit = x[10];
    for (size_t c = 0; c < g.sh_coeffs.size(); ++c) g.sh_coeffs[c] = x.segment<3>(11 + 3 * c);
    return g;
}

Eigen::VectorXd pack_gradients(const ParamGradients& grads, int index, int count) {
    Eigen::VectorXd x(count);
    x.segment<3>(0) = grads.d_position[index];
    x.segment<4>(3) = grads.d_rotation[index];
    x.segment<3>(7) = grads.d_log_scales[index];
    x[10] = grads.d_opacity_logit[index];
    for (size_t c = 0; c < grads.d_sh[index].size(); ++c) {
        x.segment<3>(11 + 3 * c) = grads.d_sh[index][c];
    }
    return x;
}

double nearest_integer_distance(double v) { return std::abs(v - std::round(v)); }

// Configurations must sit away from every discontinuity of the piecewise
// forward: the prefilter boundaries, the SH clamp, and the pixel-discrete
// bounding box edges.
bool config_is_clean(const GradTestConfig& cfg, ProjectionMode mode) {
    const Gaussian3D& g = cfg.scene[0];
    Eigen::Matrix3d sigma = build_covariance(g.rotation, g.log_scales);
    auto [sigma_c, p_c] = to_camera(sigma, g.position, cfg.cam);
    Eigen::Matrix3d a;
    try {
        a = ellipsoid_form(sigma_c);
    } catch (const Error&) {
        return false;
    }
    if (p_c.dot(a * p_c) < 9.0 + 2.0) return false;
    if (min_depth(sigma_c, p_c) < 0.1) return false;
    if (!prefilter_camera_space(sigma_c, p_c, cfg.cam).keep) return false;

    Splat2D splat;
    try {
        splat = mode == ProjectionMode::Affine ? project_affine(sigma_c, p_c, cfg.cam)
                                               : project_conic(sigma_c, p_c, cfg.cam);
    } catch (const Error&) {
        return false;
    }
    Eigen::Matrix2d dilated =
        splat.inv_cov.inverse() + cfg.opts.dilation_s * Eigen::Matrix2d::Identity();
    const double ex = 3.0 * std::sqrt(dilated(0, 0));
    const double ey = 3.0 * std::sqrt(dilated(1, 1));
    // raw bbox strictly interior, edges clear of pixel-index thresholds
    const double edges[4] = {splat.center.x() - ex - 0.5, splat.center.x() + ex - 0.5,
                             splat.center.y() - ey - 0.5, splat.center.y() + ey - 0.5};
    for (double e : edges) {
        if (nearest_integer_distance(e) < 0.08) return false;
    }
    if (edges[0] < 1.0 || edges[1] > cfg.cam.width - 2.0) return false;
    if (edges[2] < 1.0 || edges[3] > cfg.cam.height - 2.0) return false;
    if (ex < 1.5 || ey < 1.5) return false;

    // SH clamp margin per channel
    Eigen::Vector3d dir = (g.position - cfg.cam.center_world()).normalized();
    double basis[kMaxShCoeffs];
    sh_basis(dir, cfg.sh_degree, basis);
    Eigen::Vector3d pre = Eigen::Vector3d::Constant(0.5);
    for (int c = 0; c < sh_coeff_count(cfg.sh_degree); ++c) pre += basis[c] * g.sh_coeffs[c];
    for (int ch = 0; ch < 3; ++ch) {
        if (std::abs(pre[ch]) < 0.02) return false;
    }
    return true;
}

GradTestConfig random_config(Rng& rng, int sh_degree, ProjectionMode mode) {
    GradTestConfig cfg;
    cfg.cam = small_camera();
    cfg.opts.alpha_cutoff = 0.0;
    cfg.opts.transmittance_floor = 1e-12;
    cfg.opts.sh_degree = sh_degree;
    cfg.sh_degree = sh_degree;

    while (true) {
        Gaussian3D g;
        const double z = rng.uniform(2.0, 6.0);
        g.position = {rng.uniform(-0.25, 0.25) * z, rng.uniform(-0.25, 0.25) * z, z};
        g.rotation = rng.unit_quaternion();
        g.log_scales = {rng.uniform(-2.5, -0.8), rng.uniform(-2.5, -0.8), rng.uniform(-2.5, -0.8)};
        g.opacity_logit = logit(rng.uniform(0.3, 0.9));
        g.sh_coeffs.assign(sh_coeff_count(sh_degree), Eigen::Vector3d::Zero());
        g.sh_coeffs[0] = {rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2)};
        for (size_t c = 1; c < g.sh_coeffs.size(); ++c) {
            g.sh_coeffs[c] = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
        }
        cfg.scene = {g};
        if (config_is_clean(cfg, mode)) break;
    }

    // Black reference: inside the splat support img - ref stays strictly
    // positive and outside it stays exactly zero, so no |.| kink sits within
    // the finite-difference step.
    cfg.ref = Image::filled(cfg.cam.width, cfg.cam.height, Eigen::Vector3d::Zero());
    return cfg;
}

void expect_gradients_match(const GradTestConfig& cfg, ProjectionMode mode, double lambda) {
    BackwardResult analytic = backward(cfg.scene, cfg.cam, cfg.ref, cfg.opts, mode, lambda);
    const int n = param_count(cfg.scene[0]);
    Eigen::VectorXd analytic_vec = pack_gradients(analytic.gradients, 0, n);

    auto f = [&](const Eigen::VectorXd& x) {
        std::vector<Gaussian3D> scene{unpack(x, cfg.scene[0])};
        Image img = render(scene, cfg.cam, cfg.opts, mode);
        return loss(img, cfg.ref, lambda);
    };
    Eigen::VectorXd fd = fd_gradient(f, pack(cfg.scene[0]), 1e-4);

    for (int k = 0; k < n; ++k) {
        const double tol = 1e-3 * std::max(std::abs(fd[k]), std::abs(analytic_vec[k])) + 1e-6;
        EXPECT_NEAR(analytic_vec[k], fd[k], tol)
            << "parameter " << k << " mode " << to_string(mode) << " lambda " << lambda;
    }
}

} // namespace

// ---- layer-level checks -----------------------------------------------------

TEST(Vjp, BuildCovarianceBackward) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Vector4d q = rng.unit_quaternion();
        Eigen::Vector3d s{rng.uniform(-2, 1), rng.uniform(-2, 1), rng.uniform(-2, 1)};
        Eigen::Matrix3d weight;
        for (int i = 0; i < 9; ++i) weight(i / 3, i % 3) = rng.normal();

        Eigen::Vector4d d_q = Eigen::Vector4d::Zero();
        Eigen::Vector3d d_s = Eigen::Vector3d::Zero();
        vjp::build_covariance_backward(q, s, weight, d_q, d_s);

        Eigen::VectorXd x0(7);
        x0 << q, s;
        auto f = [&](const Eigen::VectorXd& x) {
            return weight.cwiseProduct(build_covariance(x.segment<4>(0), x.segment<3>(4))).sum();
        };
        Eigen::VectorXd fd = fd_gradient(f, x0, 1e-5);
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(d_q[k], fd[k], 1e-5 * std::max(1.0, std::abs(fd[k])));
        }
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(d_s[k], fd[4 + k], 1e-5 * std::max(1.0, std::abs(fd[4 + k])));
        }
    }
}

TEST(Vjp, ConicBackward) {
    Rng rng(7);
    Camera cam = small_camera();
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Matrix3d sigma_c = build_covariance(
            rng.unit_quaternion(),
            {rng.uniform(-2, -0.5), rng.uniform(-2, -0.5), rng.uniform(-2, -0.5)});
        Eigen::Vector3d p_c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(3, 7)};
        if (!prefilter_camera_space(sigma_c, p_c, cam, 1e9).keep) {
            --trial;
            continue;
        }
        Eigen::Vector2d w_v0{rng.normal(), rng.normal()};
        Eigen::Matrix2d w_m;
        for (int i = 0; i < 4; ++i) w_m(i / 2, i % 2) = rng.normal();

        vjp::ConicForward fwd = vjp::conic_forward(sigma_c, p_c);
        Eigen::Matrix3d d_sigma = Eigen::Matrix3d::Zero();
        Eigen::Vector3d d_p = Eigen::Vector3d::Zero();
        vjp::conic_backward(fwd, w_v0, w_m, d_sigma, d_p);

        auto value = [&](const Eigen::Matrix3d& s, const Eigen::Vector3d& p) {
            vjp::ConicForward f = vjp::conic_forward(s, p);
            return w_v0.dot(f.v0) + w_m.cwiseProduct(f.m).sum();
        };
        // symmetric-pair perturbations of sigma_c
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j) {
                const double h = 1e-6;
                Eigen::Matrix3d hi = sigma_c, lo = sigma_c;
                hi(i, j) += h;
                hi(j, i) += (i == j ? 0.0 : h);
                lo(i, j) -= h;
                lo(j, i) -= (i == j ? 0.0 : h);
                const double fd = (value(hi, p_c) - value(lo, p_c)) / (2 * h);
                const double expected = i == j ? d_sigma(i, i) : d_sigma(i, j) + d_sigma(j, i);
                EXPECT_NEAR(expected, fd, 1e-4 * std::max(1.0, std::abs(fd)));
            }
        }
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(p_c[k]));
            Eigen::Vector3d hi = p_c, lo = p_c;
            hi[k] += h;
            lo[k] -= h;
            const double fd = (value(sigma_c, hi) - value(sigma_c, lo)) / (2 * h);
            EXPECT_NEAR(d_p[k], fd, 1e-4 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Vjp, AffineBackward) {
    Rng rng(11);
    Camera cam = small_camera();
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Matrix3d sigma_c = build_covariance(
            rng.unit_quaternion(),
            {rng.uniform(-2, -0.5), rng.uniform(-2, -0.5), rng.uniform(-2, -0.5)});
        Eigen::Vector3d p_c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(3, 7)};
        Eigen::Vector2d w_center{rng.normal(), rng.normal()};
        Eigen::Matrix2d w_ic;
        for (int i = 0; i < 4; ++i) w_ic(i / 2, i % 2) = rng.normal();

        Eigen::Matrix3d d_sigma = Eigen::Matrix3d::Zero();
        Eigen::Vector3d d_p = Eigen::Vector3d::Zero();
        vjp::affine_backward(sigma_c, p_c, cam, w_center, w_ic, d_sigma, d_p);

        auto value = [&](const Eigen::Matrix3d& s, const Eigen::Vector3d& p) {
            Splat2D splat = project_affine(s, p, cam);
            return w_center.dot(splat.center) + w_ic.cwiseProduct(splat.inv_cov).sum();
        };
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j) {
                const double h = 1e-6;
                Eigen::Matrix3d hi = sigma_c, lo = sigma_c;
                hi(i, j) += h;
                hi(j, i) += (i == j ? 0.0 : h);
                lo(i, j) -= h;
                lo(j, i) -= (i == j ? 0.0 : h);
                const double fd = (value(hi, p_c) - value(lo, p_c)) / (2 * h);
                const double expected = i == j ? d_sigma(i, i) : d_sigma(i, j) + d_sigma(j, i);
                EXPECT_NEAR(expected, fd, 1e-4 * std::max(1.0, std::abs(fd)));
            }
        }
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(p_c[k]));
            Eigen::Vector3d hi = p_c, lo = p_c;
            hi[k] += h;
            lo[k] -= h;
            const double fd = (value(sigma_c, hi) - value(sigma_c, lo)) / (2 * h);
            EXPECT_NEAR(d_p[k], fd, 1e-4 * std::max(1.0, std::abs(fd)));
        }
    }
}

// ---- loss ---------------------------------------------------------------------

TEST(Loss, IdenticalImagesAreZero) {
    Image a = Image::filled(16, 16, {0.3, 0.5, 0.7});
    EXPECT_DOUBLE_EQ(loss(a, a, 0.0), 0.0);
    EXPECT_NEAR(loss(a, a, 0.2), 0.0, 1e-12);
}

TEST(Loss, PureL1) {
    Image ones = Image::filled(8, 8, {1, 1, 1});
    Image zeros = Image::filled(8, 8, {0, 0, 0});
    EXPECT_DOUBLE_EQ(loss(ones, zeros, 0.0), 1.0);
}

TEST(Loss, MatchesReferenceComposition) {
    SynthScene s = synth_scene(20, 5, "random");
    Camera cam = s.cameras[0];
    cam.width = cam.height = 48;
    cam.fx = cam.fy = 44.0;
    RenderOptions opts;
    Image a = render(s.gaussians, cam, opts, ProjectionMode::Conic);
    SynthScene s2 = synth_scene(20, 6, "random");
    Image b = render(s2.gaussians, cam, opts, ProjectionMode::Conic);

    double l1 = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) l1 += std::abs(a.pixels[i] - b.pixels[i]);
    l1 /= static_cast<double>(a.pixels.size());
    const double expected = 0.8 * l1 + 0.2 * (1.0 - reference_ssim(a, b));
    EXPECT_NEAR(loss(a, b, 0.2), expected, 1e-6);
}

TEST(Loss, DimensionMismatchRejected) {
    Image a = Image::filled(8, 8, {0, 0, 0});
    Image b = Image::filled(8, 9, {0, 0, 0});
    EXPECT_THROW(loss(a, b, 0.0), Error);
}

TEST(Ssim, MatchesReferenceImplementation) {
    SynthScene s = synth_scene(15, 31, "random");
    Camera cam = s.cameras[1];
    cam.width = 40;
    cam.height = 52;
    cam.fx = cam.fy = 40.0;
    RenderOptions opts;
    Image a = render(s.gaussians, cam, opts, ProjectionMode::Conic);
    SynthScene s2 = synth_scene(15, 32, "random");
    Image b = render(s2.gaussians, cam, opts, ProjectionMode::Conic);
    EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-12);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, GradientMatchesFiniteDifferences) {
    SynthScene s = synth_scene(10, 41, "random");
    Camera cam = s.cameras[2];
    cam.width = cam.height = 32;
    cam.fx = cam.fy = 30.0;
    RenderOptions opts;
    Image a = render(s.gaussians, cam, opts, ProjectionMode::Conic);
    SynthScene s2 = synth_scene(10, 42, "random");
    Image b = render(s2.gaussians, cam, opts, ProjectionMode::Conic);

    std::vector<double> d_a(a.pixels.size(), 0.0);
    ssim_with_gradient(a, b, 1.0, d_a);

    Rng rng(1);
    for (int probe = 0; probe < 40; ++probe) {
        size_t i = rng.next_u64() % a.pixels.size();
        const double h = 1e-5;
        Image hi = a, lo = a;
        hi.pixels[i] += h;
        lo.pixels[i] -= h;
        const double fd = (ssim(hi, b) - ssim(lo, b)) / (2 * h);
        EXPECT_NEAR(d_a[i], fd, 1e-6 + 1e-4 * std::abs(fd));
    }
}

// ---- full backward ------------------------------------------------------------

TEST(Backward, ZeroAtExactMatch) {
    SynthScene s = synth_scene(12, 51, "random");
    Camera cam = s.cameras[0];
    RenderOptions opts;
    Image ref = render(s.gaussians, cam, opts, ProjectionMode::Conic);
    BackwardResult r = backward(s.gaussians, cam, ref, opts, ProjectionMode::Conic, 0.0);
    EXPECT_NEAR(r.loss_value, 0.0, 1e-15);
    for (size_t i = 0; i < s.gaussians.size(); ++i) {
        EXPECT_LT(r.gradients.d_position[i].norm(), 1e-10);
        EXPECT_LT(r.gradients.d_rotation[i].norm(), 1e-10);
        EXPECT_LT(r.gradients.d_log_scales[i].norm(), 1e-10);
        EXPECT_LT(std::abs(r.gradients.d_opacity_logit[i]), 1e-10);
    }
}

TEST(Backward, FilteredGaussianHasZeroBlock) {
    SynthScene s = synth_scene(6, 61, "random");
    Camera cam = s.cameras[0];
    // move one Gaussian behind the camera
    s.gaussians[2].position = cam.center_world() - Eigen::Vector3d(0, 0, 1);
    RenderOptions opts;
    SynthScene other = synth_scene(6, 62, "random");
    Image ref = render(other.gaussians, cam, opts, ProjectionMode::Conic);
    BackwardResult r = backward(s.gaussians, cam, ref, opts, ProjectionMode::Conic, 0.0);
    EXPECT_EQ(r.gradients.d_position[2].norm(), 0.0);
    EXPECT_EQ(r.gradients.d_rotation[2].norm(), 0.0);
    EXPECT_EQ(r.gradients.d_log_scales[2].norm(), 0.0);
    EXPECT_EQ(r.gradients.d_opacity_logit[2], 0.0);
    // and at least one visible Gaussian has signal
    double total = 0.0;
    for (size_t i = 0; i < s.gaussians.size(); ++i) total += r.gradients.d_position[i].norm();
    EXPECT_GT(total, 0.0);
}

TEST(Backward, OffscreenSplatHasZeroGradient) {
    // kept by the frustum margin but its pixel box clips to empty
    Camera cam = small_camera();
    Gaussian3D g;
    g.position = {3.3, 0, 5.0}; // center ~7.6 px past the right edge, box clear of it
    g.log_scales = Eigen::Vector3d::Constant(std::log(0.05));
    g.opacity_logit = 1.0;
    g.sh_coeffs = {Eigen::Vector3d::Constant(0.8)};
    ASSERT_TRUE(prefilter(g, cam).keep);
    RenderOptions opts;
    Image ref = Image::filled(cam.width, cam.height, {0.2, 0.2, 0.2});
    BackwardResult r = backward({g}, cam, ref, opts, ProjectionMode::Conic, 0.0);
    EXPECT_EQ(r.gradients.d_position[0].norm(), 0.0);
    EXPECT_EQ(r.gradients.d_rotation[0].norm(), 0.0);
    EXPECT_EQ(r.gradients.d_opacity_logit[0], 0.0);
}

TEST(Backward, MatchesFdConicDegree0) {
    Rng rng(71);
    for (int trial = 0; trial < 12; ++trial) {
        GradTestConfig cfg = random_config(rng, 0, ProjectionMode::Conic);
        expect_gradients_match(cfg, ProjectionMode::Conic, 0.0);
    }
}

TEST(Backward, MatchesFdAffineDegree0) {
    Rng rng(72);
    for (int trial = 0; trial < 12; ++trial) {
        GradTestConfig cfg = random_config(rng, 0, ProjectionMode::Affine);
        expect_gradients_match(cfg, ProjectionMode::Affine, 0.0);
    }
}

TEST(Backward, MatchesFdHigherShDegrees) {
    Rng rng(73);
    for (int degree = 1; degree <= 3; ++degree) {
        GradTestConfig cfg = random_config(rng, degree, ProjectionMode::Conic);
        expect_gradients_match(cfg, ProjectionMode::Conic, 0.0);
    }
}

TEST(Backward, MatchesFdWithSsim) {
    Rng rng(74);
    for (int trial = 0; trial < 3; ++trial) {
        GradTestConfig cfg = random_config(rng, 0, ProjectionMode::Conic);
        expect_gradients_match(cfg, ProjectionMode::Conic, 0.2);
    }
}

TEST(Backward, DeterministicAcrossWorkerCounts) {
    SynthScene s = synth_scene(25, 81, "random");
    Camera cam = s.cameras[1];
    RenderOptions opts;
    SynthScene other = synth_scene(25, 82, "random");
    Image ref = render(other.gaussians, cam, opts, ProjectionMode::Conic);

    set_thread_cap(1);
    BackwardResult one = backward(s.gaussians, cam, ref, opts, ProjectionMode::Conic, 0.2);
    set_thread_cap(4);
    BackwardResult four = backward(s.gaussians, cam, ref, opts, ProjectionMode::Conic, 0.2);
    set_thread_cap(0);

    EXPECT_EQ(one.loss_value, four.loss_value);
    for (size_t i = 0; i < s.gaussians.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            EXPECT_EQ(one.gradients.d_position[i][k], four.gradients.d_position[i][k]);
        }
        EXPECT_EQ(one.gradients.d_opacity_logit[i], four.gradients.d_opacity_logit[i]);
    }
}

// ---- fit ------------------------------------------------------------------------

TEST(Fit, FixedPointOfItsOwnRender) {
    SynthScene s = synth_scene(8, 91, "random");
    FitConfig cfg;
    cfg.iterations = 20;
    cfg.loss_lambda = 0.0;
    std::vector<Image> refs;
    for (const Camera& cam : s.cameras) {
        refs.push_back(render(s.gaussians, cam, cfg.render, cfg.mode));
    }
    FitResult result = fit(s.gaussians, s.cameras, refs, cfg);
    for (const FitHistoryRow& row : result.history) {
        EXPECT_NEAR(row.loss, 0.0, 1e-14);
    }
    for (size_t i = 0; i < s.gaussians.size(); ++i) {
        EXPECT_LT((result.scene[i].position - s.gaussians[i].position).norm(), 1e-6);
        EXPECT_LT(std::abs(result.scene[i].opacity_logit - s.gaussians[i].opacity_logit), 1e-6);
    }
}

TEST(Fit, DeterministicRepeatRuns) {
    SynthScene target = synth_scene(6, 101, "sphere-grid");
    std::vector<Gaussian3D> init = target.gaussians;
    Rng rng(5);
    for (Gaussian3D& g : init) g.position += 0.03 * rng.unit_vector();

    FitConfig cfg;
    cfg.iterations = 12;
    std::vector<Image> refs;
    for (const Camera& cam : target.cameras) {
        refs.push_back(render(target.gaussians, cam, cfg.render, cfg.mode));
    }
    set_thread_cap(2);
    FitResult a = fit(init, target.cameras, refs, cfg);
    set_thread_cap(0);
    FitResult b = fit(init, target.cameras, refs, cfg);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_EQ(a.history[i].loss, b.history[i].loss);
        EXPECT_EQ(a.history[i].psnr, b.history[i].psnr);
    }
    for (size_t i = 0; i < a.scene.size(); ++i) {
        for (int k = 0; k < 3; ++k) EXPECT_EQ(a.scene[i].position[k], b.scene[i].position[k]);
    }
}

TEST(Fit, ReducesLossOnJitteredScene) {
    SynthScene target = synth_scene(5, 111, "sphere-grid");
    std::vector<Gaussian3D> init = target.gaussians;
    Rng rng(6);
    for (Gaussian3D& g : init) g.position += 0.04 * rng.unit_vector();

    FitConfig cfg;
    cfg.iterations = 120;
    std::vector<Image> refs;
    for (const Camera& cam : target.cameras) {
        refs.push_back(render(target.gaussians, cam, cfg.render, cfg.mode));
    }
    FitResult result = fit(init, target.cameras, refs, cfg);
    EXPECT_LT(result.history.back().loss, 0.5 * result.history.front().loss);
    EXPECT_GT(result.history.back().psnr, result.history.front().psnr);
}

TEST(Fit, ValidatesInputs) {
    SynthScene s = synth_scene(4, 3, "random");
    FitConfig cfg;
    EXPECT_THROW(fit(s.gaussians, {}, {}, cfg), Error);
    cfg.iterations = 0;
    std::vector<Image> refs{Image::filled(8, 8, {0, 0, 0})};
    Camera cam;
    cam.width = cam.height = 8;
    EXPECT_THROW(fit(s.gaussians, {cam}, refs, cfg), Error);
}
