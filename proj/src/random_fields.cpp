#include "surfstokes/random_fields.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace surfstokes {

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0,1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

ScalarField random_smooth_scalar(const Grid& grid, Rng& rng, bool include_mean)
{
    constexpr int K = kRandomFieldMaxWavenumber;
    const int nt = grid.n_theta, np = grid.n_phi;

    // cos/sin tables per wavenumber along each axis.
    std::vector<Eigen::ArrayXd> ct(K + 1), st(K + 1), cp(2 * K + 1), sp(2 * K + 1);
    for (int k = 0; k <= K; ++k) {
        ct[k].resize(nt);
        st[k].resize(nt);
        for (int j = 0; j < nt; ++j) {
            ct[k][j] = std::cos(k * grid.theta(j));
            st[k][j] = std::sin(k * grid.theta(j));
        }
    }
    for (int k = -K; k <= K; ++k) {
        cp[k + K].resize(np);
        sp[k + K].resize(np);
        for (int l = 0; l < np; ++l) {
            cp[k + K][l] = std::cos(k * grid.phi(l));
            sp[k + K][l] = std::sin(k * grid.phi(l));
        }
    }

    ScalarField f = ScalarField::zeros(grid);
    for (int k1 = 0; k1 <= K; ++k1) {
        for (int k2 = -K; k2 <= K; ++k2) {
            if (k1 == 0 && k2 < 0) continue;
            const double sigma = std::exp(-0.0625 * (k1 * k1 + k2 * k2));
            const double a = sigma * rng.normal();
            const double b = (k1 == 0 && k2 == 0) ? 0.0 : sigma * rng.normal();
            if (k1 == 0 && k2 == 0 && !include_mean) continue;
            if (2 * k1 >= nt || 2 * std::abs(k2) >= np) continue;
            const auto& cpk = cp[k2 + K];
            const auto& spk = sp[k2 + K];
            for (int j = 0; j < nt; ++j) {
                // cos(k1θ + k2φ) and sin(k1θ + k2φ) by the addition formulas
                const double c1 = ct[k1][j], s1 = st[k1][j];
                auto row = f.values.segment(static_cast<Eigen::Index>(j) * np, np);
                row += a * (c1 * cpk - s1 * spk) + b * (s1 * cpk + c1 * spk);
            }
        }
    }
    return f;
}

VectorField random_smooth_vector(const Grid& grid, Rng& rng)
{
    ScalarField a = random_smooth_scalar(grid, rng);
    ScalarField b = random_smooth_scalar(grid, rng);
    return {grid, {std::move(a.values), std::move(b.values)}};
}

}  // namespace surfstokes
