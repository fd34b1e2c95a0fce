#include "csplat/ssim.hpp"

#include "csplat/error.hpp"
#include "csplat/threading.hpp"

#include <array>
#include <cmath>

namespace csplat {

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> window_taps() {
    std::array<double, kWindow> taps{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        double d = i - kHalf;
        taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

using Plane = std::vector<double>;

// Separable same-size convolution with zero padding. The window is symmetric
// so this is simultaneously the adjoint.
void convolve(const Plane& in, int w, int h, Plane& tmp, Plane& out) {
    static const std::array<double, kWindow> taps = window_taps();
    tmp.resize(in.size());
    out.resize(in.size());
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -kHalf; k <= kHalf; ++k) {
                int xx = x + k;
                if (xx < 0 || xx >= w) continue;
                acc += taps[k + kHalf] * in[static_cast<size_t>(y) * w + xx];
            }
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    }
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -kHalf; k <= kHalf; ++k) {
                int yy = y + k;
                if (yy < 0 || yy >= h) continue;
                acc += taps[k + kHalf] * tmp[static_cast<size_t>(yy) * w + x];
            }
            out[static_cast<size_t>(y) * w + x] = acc;
        }
    }
}

void extract_channel(const Image& img, int ch, Plane& plane) {
    const size_t n = static_cast<size_t>(img.width) * img.height;
    plane.resize(n);
    for (size_t i = 0; i < n; ++i) plane[i] = img.pixels[3 * i + ch];
}

struct ChannelStats {
    Plane m1, m2, e11, e22, e12;
};

void channel_stats(const Plane& x, const Plane& y, int w, int h, ChannelStats& s) {
    const size_t n = x.size();
    Plane tmp, prod(n);
    convolve(x, w, h, tmp, s.m1);
    convolve(y, w, h, tmp, s.m2);
    for (size_t i = 0; i < n; ++i) prod[i] = x[i] * x[i];
    convolve(prod, w, h, tmp, s.e11);
    for (size_t i = 0; i < n; ++i) prod[i] = y[i] * y[i];
    convolve(prod, w, h, tmp, s.e22);
    for (size_t i = 0; i < n; ++i) prod[i] = x[i] * y[i];
    convolve(prod, w, h, tmp, s.e12);
}

double ssim_value_at(const ChannelStats& s, size_t i, double* df_dm1, double* df_de11,
                     double* df_de12) {
    const double m1 = s.m1[i], m2 = s.m2[i];
    const double sx = s.e11[i] - m1 * m1;
    const double sy = s.e22[i] - m2 * m2;
    const double sxy = s.e12[i] - m1 * m2;
    const double a1 = 2.0 * m1 * m2 + kC1;
    const double b1 = m1 * m1 + m2 * m2 + kC1;
    const double a2 = 2.0 * sxy + kC2;
    const double b2 = sx + sy + kC2;
    const double l = a1 / b1;
    const double cs = a2 / b2;
    if (df_dm1 != nullptr) {
        const double dl_dm1 = (2.0 * m2 * b1 - a1 * 2.0 * m1) / (b1 * b1);
        const double dcs_dm1 = (-2.0 * m2 * b2 + a2 * 2.0 * m1) / (b2 * b2);
        *df_dm1 = cs * dl_dm1 + l * dcs_dm1;
        *df_de11 = l * (-a2 / (b2 * b2));
        *df_de12 = l * (2.0 / b2);
    }
    return l * cs;
}

void check_dims(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) {
        throw Error(ErrorKind::DimensionMismatch, "image sizes differ");
    }
    if (a.width < 1 || a.height < 1) {
        throw Error(ErrorKind::DimensionMismatch, "empty image");
    }
}

} // namespace

double ssim(const Image& a, const Image& b) {
    check_dims(a, b);
    const int w = a.width, h = a.height;
    const size_t n = static_cast<size_t>(w) * h;
    double total = 0.0;
    Plane x, y;
    ChannelStats stats;
    for (int ch = 0; ch < 3; ++ch) {
        extract_channel(a, ch, x);
        extract_channel(b, ch, y);
        channel_stats(x, y, w, h, stats);
        double channel_sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            channel_sum += ssim_value_at(stats, i, nullptr, nullptr, nullptr);
        }
        total += channel_sum;
    }
    return total / (3.0 * static_cast<double>(n));
}

double ssim_with_gradient(const Image& a, const Image& b, double upstream, std::vector<double>& d_a) {
    check_dims(a, b);
    const int w = a.width, h = a.height;
    const size_t n = static_cast<size_t>(w) * h;
    if (d_a.size() != a.pixels.size()) d_a.resize(a.pixels.size(), 0.0);

    double total = 0.0;
    Plane x, y;
    ChannelStats stats;
    Plane g_m1(n), g_e11(n), g_e12(n), tmp, conv_m1, conv_e11, conv_e12;
    const double pixel_scale = upstream / (3.0 * static_cast<double>(n));
    for (int ch = 0; ch < 3; ++ch) {
        extract_channel(a, ch, x);
        extract_channel(b, ch, y);
        channel_stats(x, y, w, h, stats);
        double channel_sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double dm1, de11, de12;
            channel_sum += ssim_value_at(stats, i, &dm1, &de11, &de12);
            g_m1[i] = pixel_scale * dm1;
            g_e11[i] = pixel_scale * de11;
            g_e12[i] = pixel_scale * de12;
        }
        total += channel_sum;

        // Adjoint of the convolutions: d/dx = w*(g_m1) + 2x . w*(g_e11) + y . w*(g_e12).
        convolve(g_m1, w, h, tmp, conv_m1);
        convolve(g_e11, w, h, tmp, conv_e11);
        convolve(g_e12, w, h, tmp, conv_e12);
        for (size_t i = 0; i < n; ++i) {
            d_a[3 * i + ch] += conv_m1[i] + 2.0 * x[i] * conv_e11[i] + y[i] * conv_e12[i];
        }
    }
    return total / (3.0 * static_cast<double>(n));
}

} // namespace csplat
