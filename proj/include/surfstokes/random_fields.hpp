#pragma once

#include <cstdint>
#include <random>

#include "surfstokes/fields.hpp"
#include "surfstokes/geometry.hpp"

namespace surfstokes {

/// Seedable generator with a fully specified algorithm: std::mt19937_64
/// (whose output sequence the standard fixes), 53-bit uniforms taken from
/// the top bits, and Box–Muller normals. Streams reproduce across platforms
/// up to libm rounding in log/cos.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0,1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Fourier box from which smooth random fields draw, independent of the grid
/// so the same seed yields the same function on every resolution that
/// resolves it.
inline constexpr int kRandomFieldMaxWavenumber = 15;

/// Σ a_k cos(k·x) + b_k sin(k·x) over the half plane of |k_i| <= 15 with
/// a_k, b_k ~ N(0, exp(−|k|²/8)). Modes at or above the grid's Nyquist index
/// are drawn but dropped.
ScalarField random_smooth_scalar(const Grid& grid, Rng& rng, bool include_mean = true);

/// Both contravariant components drawn independently as above.
VectorField random_smooth_vector(const Grid& grid, Rng& rng);

}  // namespace surfstokes
