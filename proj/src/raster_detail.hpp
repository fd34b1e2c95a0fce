#pragma once

// Internals shared between the forward rasterizer and the gradient pass.
// Both must run the exact same per-pixel arithmetic.

#include "csplat/raster.hpp"
#include "csplat/types.hpp"

#include <Eigen/Core>
#include <vector>

namespace csplat::detail {

inline constexpr int kTileSize = 16;

struct PreparedSplat {
    Splat2D splat;
    Eigen::Matrix2d blend_inv = Eigen::Matrix2d::Identity(); // (Sigma2d + s I)^{-1}
    double alpha = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1; // inclusive pixel bbox, empty when x0 > x1
};

/// Fills blend_inv / alpha / color / bbox for one projected splat.
PreparedSplat prepare_splat(const Gaussian3D& g, const Splat2D& splat, const Camera& cam,
                            const RenderOptions& opts);

struct ContribRecord {
    int cand_pos = 0;      // position in the candidate index array
    double weight = 0.0;   // w
    double alpha = 0.0;    // a = opacity * w (post-cutoff)
    double t_before = 0.0; // transmittance before this contribution
};

struct PixelBlend {
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    double transmittance = 1.0;
    int offending = -1; // source_index of the first splat producing a non-finite value
};

/// Front-to-back alpha blending at one pixel. candidates indexes into
/// prepared and must already be in depth order. Records contributions when
/// records != nullptr (capacity for count entries). Background is NOT added.
PixelBlend blend_pixel(double px, double py, const PreparedSplat* prepared, const int* candidates,
                       int count, const RenderOptions& opts, ContribRecord* records,
                       int* record_count);

/// Sorted survivor prep shared by the render paths and the gradient pass.
struct RenderSetup {
    SceneProjection projection;
    std::vector<PreparedSplat> prepared; // in survivor order
    std::vector<int> order;              // depth sort permutation into prepared
};

RenderSetup prepare_render(const std::vector<Gaussian3D>& scene, const Camera& cam,
                           const RenderOptions& opts, ProjectionMode mode);

/// Depth-ordered candidate lists per 16x16 tile, indices into setup.prepared.
std::vector<std::vector<int>> bin_tiles(const RenderSetup& setup, int tiles_x, int tiles_y);

void validate_options(const RenderOptions& opts);

} // namespace csplat::detail
