#include "surfstokes/spectral.hpp"

#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace surfstokes {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void validate_grid(const Grid& grid)
{
    if (grid.n_theta < 8 || grid.n_phi < 8)
        throw std::invalid_argument("grid sizes must be at least 8, got " + to_string(grid));
    if (grid.n_theta % 2 != 0 || grid.n_phi % 2 != 0)
        throw std::invalid_argument("grid sizes must be even, got " + to_string(grid));
}

std::string to_string(const Grid& grid)
{
    return std::to_string(grid.n_theta) + "x" + std::to_string(grid.n_phi);
}

SpectralOps::SpectralOps(Grid grid) : grid_(grid), half_(grid.n_phi / 2 + 1)
{
    validate_grid(grid_);
    std::vector<double> real(grid_.size());
    std::vector<Complex> spec(spectrum_size());
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_plan_ = fftw_plan_dft_r2c_2d(grid_.n_theta, grid_.n_phi, real.data(), as_fftw(spec.data()), flags);
    backward_plan_ = fftw_plan_dft_c2r_2d(grid_.n_theta, grid_.n_phi, as_fftw(spec.data()), real.data(), flags);
    if (forward_plan_ == nullptr || backward_plan_ == nullptr)
        throw std::runtime_error("FFTW planning failed for grid " + to_string(grid_));
}

SpectralOps::~SpectralOps()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_plan_);
    fftw_destroy_plan(backward_plan_);
}

int SpectralOps::wavenumber_theta(int j) const { return j <= grid_.n_theta / 2 ? j : j - grid_.n_theta; }

int SpectralOps::wavenumber_phi(int l) const { return l; }

Eigen::ArrayXcd SpectralOps::forward(const Eigen::ArrayXd& values) const
{
    if (static_cast<std::size_t>(values.size()) != grid_.size())
        throw std::invalid_argument("spectral transform: shape mismatch");
    Eigen::ArrayXd in = values;  // FFTW wants a mutable pointer
    Eigen::ArrayXcd out(spectrum_size());
    fftw_execute_dft_r2c(forward_plan_, in.data(), as_fftw(out.data()));
    return out;
}

Eigen::ArrayXd SpectralOps::backward(Eigen::ArrayXcd coefficients) const
{
    Eigen::ArrayXd out(grid_.size());
    fftw_execute_dft_c2r(backward_plan_, as_fftw(coefficients.data()), out.data());
    out /= static_cast<double>(grid_.size());
    return out;
}

Eigen::ArrayXd SpectralOps::d_theta(const Eigen::ArrayXd& values) const
{
    Eigen::ArrayXcd c = forward(values);
    const int nyq = grid_.n_theta / 2;
    for (int j = 0; j < grid_.n_theta; ++j) {
        const int k = wavenumber_theta(j);
        const Complex factor(0.0, j == nyq ? 0.0 : static_cast<double>(k));
        for (int l = 0; l < half_; ++l) c[j * half_ + l] *= factor;
    }
    return backward(std::move(c));
}

Eigen::ArrayXd SpectralOps::d_phi(const Eigen::ArrayXd& values) const
{
    Eigen::ArrayXcd c = forward(values);
    const int nyq = grid_.n_phi / 2;
    for (int j = 0; j < grid_.n_theta; ++j) {
        for (int l = 0; l < half_; ++l) {
            const Complex factor(0.0, l == nyq ? 0.0 : static_cast<double>(l));
            c[j * half_ + l] *= factor;
        }
    }
    return backward(std::move(c));
}

void SpectralOps::gradient(const Eigen::ArrayXd& values, Eigen::ArrayXd& d_theta_out, Eigen::ArrayXd& d_phi_out) const
{
    const Eigen::ArrayXcd c = forward(values);
    Eigen::ArrayXcd ct(c.size()), cp(c.size());
    const int nyq_t = grid_.n_theta / 2;
    const int nyq_p = grid_.n_phi / 2;
    for (int j = 0; j < grid_.n_theta; ++j) {
        const double kt = j == nyq_t ? 0.0 : wavenumber_theta(j);
        for (int l = 0; l < half_; ++l) {
            const double kp = l == nyq_p ? 0.0 : l;
            const std::size_t i = static_cast<std::size_t>(j) * half_ + l;
            ct[i] = c[i] * Complex(0.0, kt);
            cp[i] = c[i] * Complex(0.0, kp);
        }
    }
    d_theta_out = backward(std::move(ct));
    d_phi_out = backward(std::move(cp));
}

Eigen::ArrayXd SpectralOps::flux_divergence(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) const
{
    Eigen::ArrayXcd ca = forward(a);
    const Eigen::ArrayXcd cb = forward(b);
    const int nyq_t = grid_.n_theta / 2;
    const int nyq_p = grid_.n_phi / 2;
    for (int j = 0; j < grid_.n_theta; ++j) {
        const double kt = j == nyq_t ? 0.0 : wavenumber_theta(j);
        for (int l = 0; l < half_; ++l) {
            const double kp = l == nyq_p ? 0.0 : l;
            const std::size_t i = static_cast<std::size_t>(j) * half_ + l;
            ca[i] = ca[i] * Complex(0.0, kt) + cb[i] * Complex(0.0, kp);
        }
    }
    return backward(std::move(ca));
}

Eigen::ArrayXd SpectralOps::apply_symbol(const Eigen::ArrayXd& values,
                                         const std::function<double(int, int, bool, bool)>& symbol) const
{
    Eigen::ArrayXcd c = forward(values);
    const int nyq_t = grid_.n_theta / 2;
    const int nyq_p = grid_.n_phi / 2;
    for (int j = 0; j < grid_.n_theta; ++j) {
        const bool nt = j == nyq_t;
        const int kt = nt ? 0 : wavenumber_theta(j);
        for (int l = 0; l < half_; ++l) {
            const bool np = l == nyq_p;
            c[j * half_ + l] *= symbol(kt, np ? 0 : l, nt, np);
        }
    }
    return backward(std::move(c));
}

Eigen::ArrayXd SpectralOps::nyquist_filter(const Eigen::ArrayXd& values) const
{
    return apply_symbol(values, [](int, int, bool nt, bool np) { return (nt || np) ? 0.0 : 1.0; });
}

Eigen::ArrayXd SpectralOps::dealias(const Eigen::ArrayXd& values) const
{
    const int ct = grid_.n_theta / 3;
    const int cp = grid_.n_phi / 3;
    return apply_symbol(values, [ct, cp](int kt, int kp, bool nt, bool np) {
        if (nt || np) return 0.0;
        return (std::abs(kt) <= ct && std::abs(kp) <= cp) ? 1.0 : 0.0;
    });
}

std::shared_ptr<const SpectralOps> spectral_ops(const Grid& grid)
{
    static std::mutex cache_mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const SpectralOps>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[{grid.n_theta, grid.n_phi}];
    if (!slot) slot = std::make_shared<const SpectralOps>(grid);
    return slot;
}

}  // namespace surfstokes
