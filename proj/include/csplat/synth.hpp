#pragma once

#include "csplat/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace csplat {

struct SynthScene {
    std::vector<Gaussian3D> gaussians;
    std::vector<Camera> cameras;
};

/// Deterministic synthetic scene around the origin plus three inward-looking
/// cameras at radius 5. Presets:
///   "sphere-grid" — a planar grid of near-isotropic blobs with varied colors
///   "random"      — anisotropic Gaussians with random pose and color
SynthScene synth_scene(int n, std::uint64_t seed, const std::string& preset);

/// A camera at `eye` looking at `target` (world up +y), +z forward.
Camera look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double fx, double fy,
                      int width, int height);

} // namespace csplat
