#pragma once

#include <complex>
#include <functional>
#include <memory>

#include <Eigen/Core>
#include <fftw3.h>

#include "surfstokes/grid.hpp"

namespace surfstokes {

/// Fourier pseudospectral differentiation and filtering on a periodic grid.
///
/// Derivatives use the wavenumbers k for |k| < n/2 and zero for the Nyquist
/// mode, which makes each derivative a real antisymmetric operator on grid
/// values. Discrete integration by parts therefore holds exactly under the
/// rectangle rule.
///
/// Instances are immutable once constructed; all transforms allocate private
/// buffers and use FFTW's new-array execute interface, so a single instance
/// can be shared across threads.
class SpectralOps {
public:
    using Complex = std::complex<double>;

    explicit SpectralOps(Grid grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;

    const Grid& grid() const { return grid_; }

    /// Number of complex coefficients produced by forward(): n_theta*(n_phi/2+1).
    std::size_t spectrum_size() const { return static_cast<std::size_t>(grid_.n_theta) * half_; }
    int half_phi() const { return half_; }

    /// Signed wavenumber of row j / column l, with the Nyquist entry reported as n/2.
    int wavenumber_theta(int j) const;
    int wavenumber_phi(int l) const;

    /// Unnormalized forward transform.
    Eigen::ArrayXcd forward(const Eigen::ArrayXd& values) const;
    /// Inverse transform including the 1/(n_theta*n_phi) normalization.
    Eigen::ArrayXd backward(Eigen::ArrayXcd coefficients) const;

    Eigen::ArrayXd d_theta(const Eigen::ArrayXd& values) const;
    Eigen::ArrayXd d_phi(const Eigen::ArrayXd& values) const;
    /// Both first derivatives from one forward transform.
    void gradient(const Eigen::ArrayXd& values, Eigen::ArrayXd& d_theta_out, Eigen::ArrayXd& d_phi_out) const;

    /// ∂_θ a + ∂_φ b from two forward and one inverse transform.
    Eigen::ArrayXd flux_divergence(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) const;

    /// Multiplies each Fourier coefficient by symbol(k_theta, k_phi); the
    /// wavenumbers passed are the derivative wavenumbers (Nyquist -> 0) and
    /// the flags report whether a Nyquist index is involved.
    Eigen::ArrayXd apply_symbol(const Eigen::ArrayXd& values,
                                const std::function<double(int, int, bool, bool)>& symbol) const;

    /// Removes the Nyquist row and column.
    Eigen::ArrayXd nyquist_filter(const Eigen::ArrayXd& values) const;
    /// 2/3-rule truncation: keeps |k_theta| <= n_theta/3 and |k_phi| <= n_phi/3.
    Eigen::ArrayXd dealias(const Eigen::ArrayXd& values) const;

private:
    Grid grid_;
    int half_ = 0;
    fftw_plan forward_plan_ = nullptr;
    fftw_plan backward_plan_ = nullptr;
};

/// Shared, lazily created transform object for a grid.
std::shared_ptr<const SpectralOps> spectral_ops(const Grid& grid);

}  // namespace surfstokes
