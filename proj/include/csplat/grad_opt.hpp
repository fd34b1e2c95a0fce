#pragma once

#include "csplat/raster.hpp"
#include "csplat/types.hpp"

#include <cstdint>
#include <vector>

namespace csplat {

/// Per-Gaussian gradients of the photometric loss. Blocks stay identically
/// zero for Gaussians removed by the prefilter.
struct ParamGradients {
    std::vector<Eigen::Vector3d> d_position;
    std::vector<Eigen::Vector4d> d_rotation; // wrt the raw (pre-normalization) quaternion
    std::vector<Eigen::Vector3d> d_log_scales;
    std::vector<double> d_opacity_logit;
    std::vector<std::vector<Eigen::Vector3d>> d_sh;

    void resize_like(const std::vector<Gaussian3D>& scene);
    void accumulate(const ParamGradients& other, double scale);
};

struct FitConfig {
    int iterations = 2000;
    double lr_position = 2e-4; // multiplied by the camera extent
    double lr_rotation = 1e-3;
    double lr_log_scales = 5e-3;
    double lr_opacity = 5e-2;
    double lr_sh = 2.5e-3;
    double loss_lambda = 0.2; // (1 - lambda) L1 + lambda (1 - SSIM)
    std::uint64_t seed = 0;
    ProjectionMode mode = ProjectionMode::Conic;
    RenderOptions render;
};

/// (1 - lambda) * mean|img - ref| + lambda * (1 - SSIM(img, ref)).
double loss(const Image& img, const Image& ref, double lambda);

/// 10 log10(1 / MSE) on [0,1] images.
double psnr(const Image& img, const Image& ref);

struct BackwardResult {
    double loss_value = 0.0;
    double mse = 0.0;
    ParamGradients gradients;
};

/// Analytic gradients of the loss with respect to every Gaussian parameter,
/// chained through SH color, alpha blending, the per-pixel weight, the
/// selected projection, and the view transform. Per-pixel partials are
/// reduced in fixed tile order, so results do not depend on worker count.
BackwardResult backward(const std::vector<Gaussian3D>& scene, const Camera& cam, const Image& ref,
                        const RenderOptions& opts, ProjectionMode mode, double lambda);

struct FitHistoryRow {
    int iteration = 0;
    double loss = 0.0;
    double psnr = 0.0;
};

struct FitResult {
    std::vector<Gaussian3D> scene;
    std::vector<FitHistoryRow> history;
};

/// Full-batch Adam (beta 0.9/0.999, eps 1e-15) over all parameter groups.
/// Deterministic given the config. Throws divergence (with the iteration
/// index) if the loss goes non-finite.
FitResult fit(const std::vector<Gaussian3D>& scene0, const std::vector<Camera>& cameras,
              const std::vector<Image>& refs, const FitConfig& cfg);

} // namespace csplat
