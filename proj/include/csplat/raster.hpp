#pragma once

#include "csplat/prefilter.hpp"
#include "csplat/types.hpp"

#include <Eigen/Core>
#include <vector>

namespace csplat {

struct RenderOptions {
    double dilation_s = 0.3;             // px^2, isotropic widening of Sigma2d
    double alpha_cutoff = 1.0 / 255.0;   // skip contributions below
    double transmittance_floor = 1e-4;   // stop blending once T drops below
    int sh_degree = 0;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
};

struct SceneProjection {
    std::vector<FilterVerdict> verdicts; // one per input Gaussian
    std::vector<Splat2D> splats;         // survivors in input order, source_index set
};

/// Prefilter + selected projection for every Gaussian in the scene.
SceneProjection project_scene(const std::vector<Gaussian3D>& scene, const Camera& cam,
                              ProjectionMode mode, double margin_px = kDefaultFrustumMarginPx,
                              double near_eps = 0.0);

/// Eq-style per-pixel weight exp(-1/2 (x-p)^T (Sigma2d + s I)^{-1} (x-p))
/// with Sigma2d recovered from the stored inverse covariance.
double gaussian_weight(const Splat2D& splat, const Eigen::Vector2d& x, double s);

/// Ascending by depth, ties broken by source_index. Returns the permutation.
std::vector<int> depth_sort(const std::vector<Splat2D>& splats);

/// Tiled OpenMP rasterizer. Output is bit-identical for any worker count and
/// to render_reference: pixels are independent and blending within a pixel is
/// strictly sequential in depth order.
Image render(const std::vector<Gaussian3D>& scene, const Camera& cam, const RenderOptions& opts,
             ProjectionMode mode);

/// Serial, untiled reference implementation kept as the oracle for the tiled
/// kernel.
Image render_reference(const std::vector<Gaussian3D>& scene, const Camera& cam,
                       const RenderOptions& opts, ProjectionMode mode);

} // namespace csplat
