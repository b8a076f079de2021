#ifndef GSAE_RNG_HPP
#define GSAE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

/**
 * @file rng.hpp
 * @brief The single versioned generator through which all randomness flows.
 *
 * Outputs are fully specified here (no `std::*_distribution`, whose results differ between standard libraries),
 * so a seed reproduces the same stream on every platform.
 * Changing anything in this file changes every seeded result and must bump `Rng::version`.
 */

namespace gsae {

class Rng {
public:
    static constexpr const char* version = "splitmix64/1";

    explicit Rng(std::uint64_t seed) : my_state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (my_state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /**
     * Derive an independent child stream; the parent advances by one draw.
     */
    Rng split() {
        return Rng(next() ^ 0x6a09e667f3bcc909ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer on [0, n) by rejection, so there is no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
        std::uint64_t draw;
        do {
            draw = next();
        } while (draw >= limit);
        return draw % n;
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (my_has_spare) {
            my_has_spare = false;
            return my_spare;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        my_spare = radius * std::sin(angle);
        my_has_spare = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double sd) {
        return mean + sd * normal();
    }

    /// Fisher-Yates.
    template<typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t my_state;
    bool my_has_spare = false;
    double my_spare = 0;
};

}

#endif
