#ifndef ETBO_RANDOM_HPP
#define ETBO_RANDOM_HPP
#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace etbo {

    using Rng = std::mt19937_64;

    /// Independent named streams: each (seed, stream) pair yields its own generator.
    enum class Stream : std::uint32_t {
        objective = 1,
        noise = 2,
        queries = 3,
        sampling = 4,
    };

    [[nodiscard]] inline Rng make_rng(std::uint64_t seed, Stream stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), 0x9e3779b9u};
        return Rng(seq);
    }

    [[nodiscard]] inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i) = normal(rng);
        }
        return z;
    }

} // namespace etbo

#endif // ETBO_RANDOM_HPP
