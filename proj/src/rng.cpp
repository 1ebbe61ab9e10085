#include "wca/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace wca {

static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(mix64(seed ^ mix64(stream_id + 0x632BE59BD9B4E019ULL)));
}

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: n must be >= 1");
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
}

double Rng::gaussian() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Tensor gaussian(Rng& rng, std::size_t n) {
    if (n == 0) throw std::invalid_argument("gaussian: n must be >= 1");
    Tensor out({n});
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.gaussian();
    return out;
}

Tensor gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("gaussian_matrix: dims must be >= 1");
    Tensor out({rows, cols});
    for (std::size_t i = 0; i < rows * cols; ++i) out[i] = rng.gaussian();
    return out;
}

}  // namespace wca
