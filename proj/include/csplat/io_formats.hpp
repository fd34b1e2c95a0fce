#pragma once

#include "csplat/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace csplat {

/// Reads a binary-little-endian PLY point cloud in the 3DGS vertex layout:
/// x,y,z, nx,ny,nz, f_dc_0..2, f_rest_0..44, opacity, scale_0..2, rot_0..3
/// (all float32). f_rest may be absent for degree-0 clouds. Stored logits and
/// logs are kept as-is. Parse errors report the byte offset.
std::vector<Gaussian3D> read_ply(const std::vector<std::uint8_t>& bytes);

/// Inverse of read_ply; always emits the full 62-float layout, zero-filling
/// f_rest for low-degree scenes. Deterministic byte output.
std::vector<std::uint8_t> write_ply(const std::vector<Gaussian3D>& gaussians);

/// One camera per line:
/// id width height fx fy r00 r01 r02 tx r10 r11 r12 ty r20 r21 r22 tz
/// '#' starts a comment. The rotation block must be orthonormal with
/// determinant +1 within 1e-6; violations report the line number.
std::vector<Camera> read_cameras(const std::string& text);

std::string write_cameras(const std::vector<Camera>& cameras);

/// Binary PPM: "P6\n<w> <h>\n255\n" + rows of rgb bytes,
/// channel byte = round(clamp(v, 0, 1) * 255), round half up.
std::vector<std::uint8_t> write_ppm(const Image& img);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_file(const std::string& path, const std::string& text);

} // namespace csplat
