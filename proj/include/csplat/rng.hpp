#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

namespace csplat {

/// SplitMix64 generator with hand-rolled distributions so seeded output is
/// identical on every platform (std:: distributions are not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    Eigen::Vector3d normal3() { return {normal(), normal(), normal()}; }

    /// Uniform direction on the unit sphere.
    Eigen::Vector3d unit_vector() {
        Eigen::Vector3d v = normal3();
        while (v.norm() < 1e-12) v = normal3();
        return v.normalized();
    }

    /// Uniform random rotation as a (w,x,y,z) quaternion.
    Eigen::Vector4d unit_quaternion() {
        Eigen::Vector4d q{normal(), normal(), normal(), normal()};
        while (q.norm() < 1e-12) q = {normal(), normal(), normal(), normal()};
        return q.normalized();
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace csplat
