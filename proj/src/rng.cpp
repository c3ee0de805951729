#include "lsc/rng.hpp"

#include <cmath>
#include <numbers>

namespace lsc {

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
    // Lemire's nearly-divisionless method; rejection keeps it unbiased.
    auto wide = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(wide);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            wide = static_cast<unsigned __int128>(next_u64()) * n;
            low = static_cast<std::uint64_t>(wide);
        }
    }
    return static_cast<std::uint64_t>(wide >> 64);
}

double CounterRng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

} // namespace lsc
