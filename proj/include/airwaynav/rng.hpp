#pragma once
// Seeded randomness for simulation and fixtures. mt19937_64 has a fully
// specified output sequence, and all derived draws below avoid
// std::*_distribution (whose outputs vary across standard libraries), so the
// same seed reproduces the same stream on any platform.
#include <cmath>
#include <cstdint>
#include <random>

namespace airwaynav {

class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

    // uniform on (0, 1); never returns an endpoint
    double next_double() {
        const std::uint64_t bits = engine_() >> 11;  // top 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    // uniform index in [0, n)
    std::size_t next_index(std::size_t n) {
        const auto idx = static_cast<std::size_t>(next_double() * static_cast<double>(n));
        return idx < n ? idx : n - 1;
    }

    // standard Gumbel(0, 1)
    double next_gumbel() { return -std::log(-std::log(next_double())); }

    // standard normal via Box-Muller (one value per call, second discarded)
    double next_normal() {
        const double u = next_double();
        const double v = next_double();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace airwaynav
