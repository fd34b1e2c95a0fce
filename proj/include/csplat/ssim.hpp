#pragma once

#include "csplat/types.hpp"

#include <vector>

namespace csplat {

/// Mean SSIM over pixels and channels. 11x11 Gaussian window with sigma 1.5,
/// zero padding, C1 = 0.01^2, C2 = 0.03^2 on the [0,1] range.
double ssim(const Image& a, const Image& b);

/// Computes mean SSIM and accumulates upstream * d(ssim)/d(a) into d_a
/// (same layout as a.pixels). b is treated as constant.
double ssim_with_gradient(const Image& a, const Image& b, double upstream, std::vector<double>& d_a);

} // namespace csplat
