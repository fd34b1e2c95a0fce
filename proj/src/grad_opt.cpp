#include "csplat/grad_opt.hpp"

#include "csplat/core.hpp"
#include "csplat/error.hpp"
#include "csplat/ssim.hpp"
#include "csplat/threading.hpp"
#include "grad_vjp.hpp"
#include "raster_detail.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

namespace csplat {

void ParamGradients::resize_like(const std::vector<Gaussian3D>& scene) {
    const size_t n = scene.size();
    d_position.assign(n, Eigen::Vector3d::Zero());
    d_rotation.assign(n, Eigen::Vector4d::Zero());
    d_log_scales.assign(n, Eigen::Vector3d::Zero());
    d_opacity_logit.assign(n, 0.0);
    d_sh.resize(n);
    for (size_t i = 0; i < n; ++i) {
        d_sh[i].assign(scene[i].sh_coeffs.size(), Eigen::Vector3d::Zero());
    }
}

void ParamGradients::accumulate(const ParamGradients& other, double scale) {
    for (size_t i = 0; i < d_position.size(); ++i) {
        d_position[i] += scale * other.d_position[i];
        d_rotation[i] += scale * other.d_rotation[i];
        d_log_scales[i] += scale * other.d_log_scales[i];
        d_opacity_logit[i] += scale * other.d_opacity_logit[i];
        for (size_t c = 0; c < d_sh[i].size(); ++c) {
            d_sh[i][c] += scale * other.d_sh[i][c];
        }
    }
}

namespace {

void check_same_size(const Image& img, const Image& ref) {
    if (img.width != ref.width || img.height != ref.height) {
        throw Error(ErrorKind::DimensionMismatch, "image and reference sizes differ");
    }
}

double l1_mean(const Image& img, const Image& ref) {
    double sum = 0.0;
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        sum += std::abs(img.pixels[i] - ref.pixels[i]);
    }
    return sum / static_cast<double>(img.pixels.size());
}

double mse_mean(const Image& img, const Image& ref) {
    double sum = 0.0;
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        double d = img.pixels[i] - ref.pixels[i];
        sum += d * d;
    }
    return sum / static_cast<double>(img.pixels.size());
}

// Image-space gradient slots accumulated per splat during the raster pass.
struct SplatGrad {
    Eigen::Vector2d d_center = Eigen::Vector2d::Zero();
    Eigen::Matrix2d d_blend_inv = Eigen::Matrix2d::Zero();
    double d_alpha = 0.0;
    Eigen::Vector3d d_color = Eigen::Vector3d::Zero();
};

} // namespace

double loss(const Image& img, const Image& ref, double lambda) {
    check_same_size(img, ref);
    double value = (1.0 - lambda) * l1_mean(img, ref);
    if (lambda != 0.0) {
        value += lambda * (1.0 - ssim(img, ref));
    }
    return value;
}

double psnr(const Image& img, const Image& ref) {
    check_same_size(img, ref);
    return 10.0 * std::log10(1.0 / mse_mean(img, ref));
}

BackwardResult backward(const std::vector<Gaussian3D>& scene, const Camera& cam, const Image& ref,
                        const RenderOptions& opts, ProjectionMode mode, double lambda) {
    using detail::PreparedSplat;

    detail::RenderSetup setup = detail::prepare_render(scene, cam, opts, mode);
    const int survivor_count = static_cast<int>(setup.prepared.size());

    const int tiles_x = (cam.width + detail::kTileSize - 1) / detail::kTileSize;
    const int tiles_y = (cam.height + detail::kTileSize - 1) / detail::kTileSize;
    const int tile_count = tiles_x * tiles_y;
    std::vector<std::vector<int>> tile_lists = detail::bin_tiles(setup, tiles_x, tiles_y);

    // Forward image (identical arithmetic to render()).
    Image img = Image::filled(cam.width, cam.height, Eigen::Vector3d::Zero());
    int offending = -1;
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int t = 0; t < tile_count; ++t) {
        const auto& list = tile_lists[t];
        const int px0 = (t % tiles_x) * detail::kTileSize;
        const int py0 = (t / tiles_x) * detail::kTileSize;
        const int px1 = std::min(px0 + detail::kTileSize, cam.width);
        const int py1 = std::min(py0 + detail::kTileSize, cam.height);
        for (int y = py0; y < py1; ++y) {
            for (int x = px0; x < px1; ++x) {
                detail::PixelBlend blend =
                    detail::blend_pixel(x + 0.5, y + 0.5, setup.prepared.data(), list.data(),
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

    BackwardResult result;
    result.mse = mse_mean(img, ref);
    result.gradients.resize_like(scene);

    // Loss and dL/d(image).
    check_same_size(img, ref);
    const double inv_n = 1.0 / static_cast<double>(img.pixels.size());
    std::vector<double> d_img(img.pixels.size(), 0.0);
    result.loss_value = (1.0 - lambda) * l1_mean(img, ref);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        const double diff = img.pixels[i] - ref.pixels[i];
        const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        d_img[i] = (1.0 - lambda) * sign * inv_n;
    }
    if (lambda != 0.0) {
        double ssim_value = ssim_with_gradient(img, ref, -lambda, d_img);
        result.loss_value += lambda * (1.0 - ssim_value);
    }

    // Raster backward: per-tile partials, then a fixed-order reduction.
    std::vector<std::vector<SplatGrad>> tile_grads(tile_count);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int t = 0; t < tile_count; ++t) {
        const auto& list = tile_lists[t];
        if (list.empty()) continue;
        auto& grads = tile_grads[t];
        grads.resize(list.size());
        std::vector<detail::ContribRecord> records(list.size());
        const int px0 = (t % tiles_x) * detail::kTileSize;
        const int py0 = (t / tiles_x) * detail::kTileSize;
        const int px1 = std::min(px0 + detail::kTileSize, cam.width);
        const int py1 = std::min(py0 + detail::kTileSize, cam.height);
        for (int y = py0; y < py1; ++y) {
            for (int x = px0; x < px1; ++x) {
                int contrib_count = 0;
                detail::PixelBlend blend =
                    detail::blend_pixel(x + 0.5, y + 0.5, setup.prepared.data(), list.data(),
                                        static_cast<int>(list.size()), opts, records.data(),
                                        &contrib_count);
                if (contrib_count == 0) continue;
                const double* dc = &d_img[3 * (static_cast<size_t>(y) * cam.width + x)];
                const Eigen::Vector3d d_pixel(dc[0], dc[1], dc[2]);

                // Reverse sweep with a suffix accumulator:
                // rear = sum_{j>k} T_j a_j c_j + T_end * background.
                Eigen::Vector3d rear = blend.transmittance * opts.background;
                for (int r = contrib_count - 1; r >= 0; --r) {
                    const detail::ContribRecord& rec = records[r];
                    const PreparedSplat& s = setup.prepared[list[rec.cand_pos]];
                    SplatGrad& slot = grads[rec.cand_pos];

                    const Eigen::Vector3d dc_da = rec.t_before * s.color - rear / (1.0 - rec.alpha);
                    const double g_a = d_pixel.dot(dc_da);

                    slot.d_color += d_pixel * (rec.t_before * rec.alpha);
                    slot.d_alpha += g_a * rec.weight;

                    const double g_w = g_a * s.alpha;
                    const Eigen::Vector2d d(x + 0.5 - s.splat.center.x(), y + 0.5 - s.splat.center.y());
                    const Eigen::Vector2d m = s.blend_inv * d;
                    slot.d_center += g_w * rec.weight * m;
                    slot.d_blend_inv += g_w * rec.weight * (-0.5) * (d * d.transpose());

                    rear += rec.t_before * rec.alpha * s.color;
                }
            }
        }
    }

    // Deterministic reduction: tiles in index order.
    std::vector<SplatGrad> splat_grads(survivor_count);
    for (int t = 0; t < tile_count; ++t) {
        const auto& list = tile_lists[t];
        const auto& grads = tile_grads[t];
        for (size_t k = 0; k < grads.size(); ++k) {
            SplatGrad& dst = splat_grads[list[k]];
            dst.d_center += grads[k].d_center;
            dst.d_blend_inv += grads[k].d_blend_inv;
            dst.d_alpha += grads[k].d_alpha;
            dst.d_color += grads[k].d_color;
        }
    }

    // Chain through projection and scene parameters, one survivor at a time.
    const Eigen::Vector3d eye_world = cam.center_world();
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int si = 0; si < survivor_count; ++si) {
        try {
            const PreparedSplat& prep = setup.prepared[si];
            const SplatGrad& sg = splat_grads[si];
            const int gi = prep.splat.source_index;
            const Gaussian3D& g = scene[gi];

            // blend_inv = (sigma2d + s I)^{-1}, sigma2d = inv_cov^{-1}
            Eigen::Matrix2d sigma2d = prep.splat.inv_cov.inverse();
            Eigen::Matrix2d d_sigma2d = vjp::inverse_vjp(prep.blend_inv, sg.d_blend_inv);
            Eigen::Matrix2d d_inv_cov = vjp::inverse_vjp(sigma2d, d_sigma2d);

            // opacity = sigmoid(logit)
            const double alpha = prep.alpha;
            result.gradients.d_opacity_logit[gi] += sg.d_alpha * alpha * (1.0 - alpha);

            // color = clamped SH; gradient flows to coefficients and, through
            // the view direction, to the position.
            const Eigen::Vector3d offset = g.position - eye_world;
            const Eigen::Vector3d dir = offset.normalized();
            const int count = sh_coeff_count(opts.sh_degree);
            double basis[kMaxShCoeffs];
            double basis_grad[kMaxShCoeffs * 3];
            sh_basis(dir, opts.sh_degree, basis);
            sh_basis_gradient(dir, opts.sh_degree, basis_grad);
            Eigen::Vector3d pre = Eigen::Vector3d::Constant(0.5);
            for (int c = 0; c < count; ++c) pre += basis[c] * g.sh_coeffs[c];
            Eigen::Vector3d d_dir = Eigen::Vector3d::Zero();
            for (int ch = 0; ch < 3; ++ch) {
                if (pre[ch] <= 0.0) continue; // clamped channel
                for (int c = 0; c < count; ++c) {
                    result.gradients.d_sh[gi][c][ch] += sg.d_color[ch] * basis[c];
                    d_dir += sg.d_color[ch] * g.sh_coeffs[c][ch] *
                             Eigen::Vector3d(basis_grad[3 * c], basis_grad[3 * c + 1],
                                             basis_grad[3 * c + 2]);
                }
            }
            Eigen::Vector3d d_position = vjp::normalize_backward(offset, d_dir);

            // projection backward
            Eigen::Matrix3d sigma = build_covariance(g.rotation, g.log_scales);
            auto [sigma_c, p_c] = to_camera(sigma, g.position, cam);
            Eigen::Matrix3d d_sigma_c = Eigen::Matrix3d::Zero();
            Eigen::Vector3d d_p_c = Eigen::Vector3d::Zero();
            if (mode == ProjectionMode::Affine) {
                vjp::affine_backward(sigma_c, p_c, cam, sg.d_center, d_inv_cov, d_sigma_c, d_p_c);
            } else {
                vjp::ConicForward fwd = vjp::conic_forward(sigma_c, p_c);
                Eigen::Vector2d d_v0 = Eigen::Vector2d::Zero();
                Eigen::Matrix2d d_m = Eigen::Matrix2d::Zero();
                vjp::image_plane_backward(cam, sg.d_center, d_inv_cov, d_v0, d_m);
                vjp::conic_backward(fwd, d_v0, d_m, d_sigma_c, d_p_c);
            }

            // view transform and covariance assembly
            Eigen::Matrix3d d_sigma = Eigen::Matrix3d::Zero();
            vjp::to_camera_backward(cam, d_sigma_c, d_p_c, d_sigma, d_position);
            vjp::build_covariance_backward(g.rotation, g.log_scales, d_sigma,
                                           result.gradients.d_rotation[gi],
                                           result.gradients.d_log_scales[gi]);
            result.gradients.d_position[gi] += d_position;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    return result;
}

namespace {

struct AdamState {
    ParamGradients m;
    ParamGradients v;
};

void adam_update(std::vector<Gaussian3D>& scene, const ParamGradients& grads, AdamState& state,
                 const FitConfig& cfg, double position_lr, int step) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-15;
    const double bc1 = 1.0 - std::pow(beta1, step);
    const double bc2 = 1.0 - std::pow(beta2, step);

    auto step_scalar = [&](double& theta, double g, double& m, double& v, double lr) {
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        theta -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
    };

    for (size_t i = 0; i < scene.size(); ++i) {
        Gaussian3D& g = scene[i];
        for (int k = 0; k < 3; ++k) {
            step_scalar(g.position[k], grads.d_position[i][k], state.m.d_position[i][k],
                        state.v.d_position[i][k], position_lr);
            step_scalar(g.log_scales[k], grads.d_log_scales[i][k], state.m.d_log_scales[i][k],
                        state.v.d_log_scales[i][k], cfg.lr_log_scales);
        }
        for (int k = 0; k < 4; ++k) {
            step_scalar(g.rotation[k], grads.d_rotation[i][k], state.m.d_rotation[i][k],
                        state.v.d_rotation[i][k], cfg.lr_rotation);
        }
        step_scalar(g.opacity_logit, grads.d_opacity_logit[i], state.m.d_opacity_logit[i],
                    state.v.d_opacity_logit[i], cfg.lr_opacity);
        for (size_t c = 0; c < g.sh_coeffs.size(); ++c) {
            for (int k = 0; k < 3; ++k) {
                step_scalar(g.sh_coeffs[c][k], grads.d_sh[i][c][k], state.m.d_sh[i][c][k],
                            state.v.d_sh[i][c][k], cfg.lr_sh);
            }
        }
    }
}

double camera_extent(const std::vector<Camera>& cameras) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const Camera& c : cameras) centroid += c.center_world();
    centroid /= static_cast<double>(cameras.size());
    double radius = 0.0;
    for (const Camera& c : cameras) {
        radius = std::max(radius, (c.center_world() - centroid).norm());
    }
    return radius > 1e-9 ? radius : 1.0;
}

} // namespace

FitResult fit(const std::vector<Gaussian3D>& scene0, const std::vector<Camera>& cameras,
              const std::vector<Image>& refs, const FitConfig& cfg) {
    if (cameras.empty() || cameras.size() != refs.size()) {
        throw Error(ErrorKind::InvalidParameter, "fit needs matching non-empty cameras and refs");
    }
    if (cfg.iterations < 1) {
        throw Error(ErrorKind::InvalidParameter, "iterations must be >= 1");
    }
    if (!(cfg.loss_lambda >= 0.0 && cfg.loss_lambda <= 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "loss_lambda must be in [0, 1]");
    }

    FitResult result;
    result.scene = scene0;
    result.history.reserve(cfg.iterations);

    AdamState state;
    state.m.resize_like(scene0);
    state.v.resize_like(scene0);
    const double position_lr = cfg.lr_position * camera_extent(cameras);
    const double inv_cams = 1.0 / static_cast<double>(cameras.size());

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        ParamGradients total;
        total.resize_like(result.scene);
        double loss_sum = 0.0;
        double mse_sum = 0.0;
        for (size_t c = 0; c < cameras.size(); ++c) {
            BackwardResult r = backward(result.scene, cameras[c], refs[c], cfg.render, cfg.mode,
                                        cfg.loss_lambda);
            total.accumulate(r.gradients, inv_cams);
            loss_sum += r.loss_value;
            mse_sum += r.mse;
        }
        const double mean_loss = loss_sum * inv_cams;
        const double mean_mse = mse_sum * inv_cams;
        if (!std::isfinite(mean_loss)) {
            throw Error(ErrorKind::Divergence,
                        "non-finite loss at iteration " + std::to_string(iter));
        }
        result.history.push_back({iter, mean_loss, 10.0 * std::log10(1.0 / mean_mse)});
        adam_update(result.scene, total, state, cfg, position_lr, iter);
    }
    return result;
}

} // namespace csplat
