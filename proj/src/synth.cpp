#include "csplat/synth.hpp"

#include "csplat/error.hpp"
#include "csplat/rng.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace csplat {

Camera look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double fx, double fy,
                      int width, int height) {
    Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d up(0.0, 1.0, 0.0);
    if (std::abs(forward.dot(up)) > 0.999) up = Eigen::Vector3d(1.0, 0.0, 0.0);
    Eigen::Vector3d right = up.cross(forward).normalized();
    Eigen::Vector3d down = forward.cross(right);

    Camera cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.width = width;
    cam.height = height;
    cam.rotation.row(0) = right;
    cam.rotation.row(1) = down;
    cam.rotation.row(2) = forward;
    cam.translation = -cam.rotation * eye;
    return cam;
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

std::vector<Camera> default_cameras() {
    const double fx = 140.0, fy = 140.0;
    const int w = 160, h = 160;
    std::vector<Camera> cams;
    cams.push_back(look_at_camera({0.0, 0.4, -5.0}, Eigen::Vector3d::Zero(), fx, fy, w, h));
    cams.push_back(look_at_camera({2.2, 0.8, -4.6}, Eigen::Vector3d::Zero(), fx, fy, w, h));
    cams.push_back(look_at_camera({-2.0, -0.6, -4.7}, Eigen::Vector3d::Zero(), fx, fy, w, h));
    return cams;
}

Eigen::Vector3d palette_color(Rng& rng) {
    // Saturated-ish colors away from the SH clamp boundary.
    return {rng.uniform(0.15, 0.9), rng.uniform(0.15, 0.9), rng.uniform(0.15, 0.9)};
}

constexpr double kShC0 = 0.28209479177387814;

} // namespace

SynthScene synth_scene(int n, std::uint64_t seed, const std::string& preset) {
    if (n < 1) {
        throw Error(ErrorKind::InvalidParameter, "scene needs at least one Gaussian");
    }
    SynthScene out;
    out.cameras = default_cameras();
    out.gaussians.reserve(n);
    Rng rng(seed);

    if (preset == "sphere-grid") {
        const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        const double spacing = side > 1 ? 1.6 / (side - 1) : 0.0;
        for (int i = 0; i < n; ++i) {
            const int gx = i % side;
            const int gy = i / side;
            Gaussian3D g;
            g.position = {-0.8 + spacing * gx, -0.8 + spacing * gy, rng.uniform(-0.2, 0.2)};
            g.rotation = {1.0, 0.0, 0.0, 0.0};
            const double sigma = rng.uniform(0.07, 0.12);
            g.log_scales = Eigen::Vector3d::Constant(std::log(sigma));
            g.opacity_logit = logit(rng.uniform(0.6, 0.9));
            Eigen::Vector3d color = palette_color(rng);
            g.sh_coeffs = {(color - Eigen::Vector3d::Constant(0.5)) / kShC0};
            out.gaussians.push_back(g);
        }
    } else if (preset == "random") {
        for (int i = 0; i < n; ++i) {
            Gaussian3D g;
            g.position = {rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)};
            g.rotation = rng.unit_quaternion();
            g.log_scales = {std::log(rng.uniform(0.05, 0.25)), std::log(rng.uniform(0.05, 0.25)),
                            std::log(rng.uniform(0.05, 0.25))};
            g.opacity_logit = logit(rng.uniform(0.4, 0.95));
            Eigen::Vector3d color = palette_color(rng);
            g.sh_coeffs = {(color - Eigen::Vector3d::Constant(0.5)) / kShC0};
            out.gaussians.push_back(g);
        }
    } else {
        throw Error(ErrorKind::InvalidParameter, "unknown preset '" + preset + "'");
    }
    return out;
}

} // namespace csplat
