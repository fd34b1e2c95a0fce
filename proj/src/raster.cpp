#include "csplat/raster.hpp"

#include "csplat/core.hpp"
#include "csplat/error.hpp"
#include "csplat/project_affine.hpp"
#include "csplat/project_conic.hpp"
#include "csplat/threading.hpp"
#include "raster_detail.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

namespace csplat {

namespace detail {

void validate_options(const RenderOptions& opts) {
    if (!(opts.dilation_s >= 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "dilation_s must be >= 0");
    }
    if (!(opts.alpha_cutoff >= 0.0 && opts.alpha_cutoff < 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "alpha_cutoff must be in [0, 1)");
    }
    if (!(opts.transmittance_floor > 0.0 && opts.transmittance_floor < 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "transmittance_floor must be in (0, 1)");
    }
}

PreparedSplat prepare_splat(const Gaussian3D& g, const Splat2D& splat, const Camera& cam,
                            const RenderOptions& opts) {
    PreparedSplat out;
    out.splat = splat;

    Eigen::Matrix2d sigma2d = splat.inv_cov.inverse();
    Eigen::Matrix2d dilated = sigma2d + opts.dilation_s * Eigen::Matrix2d::Identity();
    out.blend_inv = dilated.inverse();
    out.alpha = g.opacity();

    Eigen::Vector3d view_dir = (g.position - cam.center_world()).normalized();
    out.color = eval_sh({g.sh_coeffs.data(), g.sh_coeffs.size()}, view_dir, opts.sh_degree);

    const double ex = 3.0 * std::sqrt(dilated(0, 0));
    const double ey = 3.0 * std::sqrt(dilated(1, 1));
    const double w = cam.width, h = cam.height;
    out.x0 = static_cast<int>(std::clamp(std::ceil(splat.center.x() - ex - 0.5), 0.0, w));
    out.x1 = static_cast<int>(std::clamp(std::floor(splat.center.x() + ex - 0.5), -1.0, w - 1.0));
    out.y0 = static_cast<int>(std::clamp(std::ceil(splat.center.y() - ey - 0.5), 0.0, h));
    out.y1 = static_cast<int>(std::clamp(std::floor(splat.center.y() + ey - 0.5), -1.0, h - 1.0));
    return out;
}

PixelBlend blend_pixel(double px, double py, const PreparedSplat* prepared, const int* candidates,
                       int count, const RenderOptions& opts, ContribRecord* records,
                       int* record_count) {
    PixelBlend out;
    int recorded = 0;
    const int xi = static_cast<int>(px); // px = pixel index + 0.5, always >= 0.5
    const int yi = static_cast<int>(py);
    for (int i = 0; i < count; ++i) {
        const PreparedSplat& s = prepared[candidates[i]];
        if (xi < s.x0 || xi > s.x1 || yi < s.y0 || yi > s.y1) continue;

        const double dx = px - s.splat.center.x();
        const double dy = py - s.splat.center.y();
        const double q = s.blend_inv(0, 0) * dx * dx + (s.blend_inv(0, 1) + s.blend_inv(1, 0)) * dx * dy +
                         s.blend_inv(1, 1) * dy * dy;
        const double weight = std::exp(-0.5 * q);
        const double a = s.alpha * weight;
        if (a < opts.alpha_cutoff) continue;

        if (records != nullptr) {
            records[recorded] = {i, weight, a, out.transmittance};
        }
        ++recorded;

        out.color += out.transmittance * a * s.color;
        out.transmittance *= 1.0 - a;
        if (!(std::isfinite(out.color.sum()) && std::isfinite(out.transmittance))) {
            out.offending = s.splat.source_index;
            break;
        }
        if (out.transmittance < opts.transmittance_floor) break;
    }
    if (record_count != nullptr) *record_count = recorded;
    return out;
}

RenderSetup prepare_render(const std::vector<Gaussian3D>& scene, const Camera& cam,
                           const RenderOptions& opts, ProjectionMode mode) {
    validate_options(opts);
    RenderSetup setup;
    setup.projection = project_scene(scene, cam, mode);
    setup.prepared.resize(setup.projection.splats.size());
    const auto& splats = setup.projection.splats;
    const int n = static_cast<int>(splats.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int i = 0; i < n; ++i) {
        try {
            setup.prepared[i] = prepare_splat(scene[splats[i].source_index], splats[i], cam, opts);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    setup.order = depth_sort(splats);
    return setup;
}

std::vector<std::vector<int>> bin_tiles(const RenderSetup& setup, int tiles_x, int tiles_y) {
    std::vector<std::vector<int>> tile_lists(static_cast<size_t>(tiles_x) * tiles_y);
    for (int idx : setup.order) {
        const PreparedSplat& s = setup.prepared[idx];
        if (s.x0 > s.x1 || s.y0 > s.y1) continue;
        const int tx0 = s.x0 / kTileSize, tx1 = s.x1 / kTileSize;
        const int ty0 = s.y0 / kTileSize, ty1 = s.y1 / kTileSize;
        for (int ty = ty0; ty <= ty1; ++ty) {
            for (int tx = tx0; tx <= tx1; ++tx) {
                tile_lists[static_cast<size_t>(ty) * tiles_x + tx].push_back(idx);
            }
        }
    }
    return tile_lists;
}

namespace {

Image run_tiled(const RenderSetup& setup, const Camera& cam, const RenderOptions& opts) {
    Image img = Image::filled(cam.width, cam.height, Eigen::Vector3d::Zero());

    const int tiles_x = (cam.width + kTileSize - 1) / kTileSize;
    const int tiles_y = (cam.height + kTileSize - 1) / kTileSize;
    const int tile_count = tiles_x * tiles_y;
    std::vector<std::vector<int>> tile_lists = bin_tiles(setup, tiles_x, tiles_y);

    int offending = -1;
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int t = 0; t < tile_count; ++t) {
        const auto& list = tile_lists[t];
        const int px0 = (t % tiles_x) * kTileSize;
        const int py0 = (t / tiles_x) * kTileSize;
        const int px1 = std::min(px0 + kTileSize, cam.width);
        const int py1 = std::min(py0 + kTileSize, cam.height);
        for (int y = py0; y < py1; ++y) {
            for (int x = px0; x < px1; ++x) {
                PixelBlend blend = blend_pixel(x + 0.5, y + 0.5, setup.prepared.data(), list.data(),
                                               static_cast<int>(list.size()), opts, nullptr, nullptr);
                if (blend.offending >= 0) {
#pragma omp critical
                    offending = blend.offending;
                    continue;
                }
                Eigen::Vector3d rgb = blend.color + blend.transmittance * opts.background;
                double* p = img.at(x, y);
                p[0] = rgb.x();
                p[1] = rgb.y();
                p[2] = rgb.z();
            }
        }
    }
    if (offending >= 0) {
        throw Error(ErrorKind::RenderNonFinite,
                    "non-finite accumulation from Gaussian " + std::to_string(offending));
    }
    return img;
}

} // namespace

} // namespace detail

SceneProjection project_scene(const std::vector<Gaussian3D>& scene, const Camera& cam,
                              ProjectionMode mode, double margin_px, double near_eps) {
    const int n = static_cast<int>(scene.size());
    SceneProjection out;
    out.verdicts.resize(n);
    std::vector<Splat2D> slots(n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int i = 0; i < n; ++i) {
        try {
            Eigen::Matrix3d sigma = build_covariance(scene[i].rotation, scene[i].log_scales);
            auto [sigma_c, p_c] = to_camera(sigma, scene[i].position, cam);
            out.verdicts[i] = prefilter_camera_space(sigma_c, p_c, cam, margin_px, near_eps);
            if (out.verdicts[i].keep) {
                Splat2D s = mode == ProjectionMode::Affine ? project_affine(sigma_c, p_c, cam)
                                                           : project_conic(sigma_c, p_c, cam);
                s.source_index = i;
                slots[i] = s;
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    for (int i = 0; i < n; ++i) {
        if (out.verdicts[i].keep) out.splats.push_back(slots[i]);
    }
    return out;
}

double gaussian_weight(const Splat2D& splat, const Eigen::Vector2d& x, double s) {
    Eigen::Matrix2d sigma2d = splat.inv_cov.inverse();
    Eigen::Matrix2d dilated = sigma2d + s * Eigen::Matrix2d::Identity();
    Eigen::Vector2d d = x - splat.center;
    return std::exp(-0.5 * d.dot(dilated.inverse() * d));
}

std::vector<int> depth_sort(const std::vector<Splat2D>& splats) {
    std::vector<int> order(splats.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (splats[a].depth != splats[b].depth) return splats[a].depth < splats[b].depth;
        return splats[a].source_index < splats[b].source_index;
    });
    return order;
}

Image render(const std::vector<Gaussian3D>& scene, const Camera& cam, const RenderOptions& opts,
             ProjectionMode mode) {
    detail::RenderSetup setup = detail::prepare_render(scene, cam, opts, mode);
    return detail::run_tiled(setup, cam, opts);
}

Image render_reference(const std::vector<Gaussian3D>& scene, const Camera& cam,
                       const RenderOptions& opts, ProjectionMode mode) {
    detail::RenderSetup setup = detail::prepare_render(scene, cam, opts, mode);

    Image img = Image::filled(cam.width, cam.height, Eigen::Vector3d::Zero());
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            detail::PixelBlend blend = detail::blend_pixel(
                x + 0.5, y + 0.5, setup.prepared.data(), setup.order.data(),
                static_cast<int>(setup.order.size()), opts, nullptr, nullptr);
            if (blend.offending >= 0) {
                throw Error(ErrorKind::RenderNonFinite,
                            "non-finite accumulation from Gaussian " + std::to_string(blend.offending));
            }
            Eigen::Vector3d rgb = blend.color + blend.transmittance * opts.background;
            double* p = img.at(x, y);
            p[0] = rgb.x();
            p[1] = rgb.y();
            p[2] = rgb.z();
        }
    }
    return img;
}

} // namespace csplat
