#pragma once

#include <cstdint>

#include "wca/tensor.hpp"

namespace wca {

/// Deterministic 64-bit PRNG (splitmix64). The algorithm is fixed here rather
/// than taken from the platform so that equal seeds give identical streams on
/// every build. Gaussians come from Box-Muller and consume exactly two raw
/// draws each, so the k-th gaussian of a stream does not depend on how calls
/// were batched.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Independent substream for (seed, stream_id), e.g. per-example streams.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();

    double uniform();  // [0, 1)
    double uniform(double lo, double hi);

    /// Uniform index in [0, n). n must be >= 1.
    std::size_t index(std::size_t n);

    double gaussian();

private:
    std::uint64_t state_;
};

/// n i.i.d. standard normal draws. n must be >= 1.
Tensor gaussian(Rng& rng, std::size_t n);

/// [rows x cols] matrix of i.i.d. standard normal draws.
Tensor gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols);

}  // namespace wca
