#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "surfstokes/fields.hpp"
#include "surfstokes/geometry.hpp"
#include "surfstokes/helmholtz.hpp"

namespace surfstokes {

/// (div T)^i = g^{ij} g^{kl} ∇_k T_lj for a symmetric (0,2) tensor.
VectorField tensor_divergence(const SurfaceChart& chart, const TensorField& t);

/// Largest weak divergence residual accepted by the Stokes applications,
/// relative to max(1, ‖u‖).
inline constexpr double kStokesDivergenceTol = 1e-8;

/// A u = −2μ_s P div D(u). Throws std::invalid_argument if u is not
/// divergence free.
VectorField apply_stokes_div_form(const HelmholtzProjector& projector, double mu_s, const VectorField& u);
VectorField apply_stokes_div_form(const SurfaceChart& chart, double mu_s, const VectorField& u);

/// A u = −μ_s P(Δu + K u).
VectorField apply_stokes_bochner_form(const HelmholtzProjector& projector, double mu_s, const VectorField& u);
VectorField apply_stokes_bochner_form(const SurfaceChart& chart, double mu_s, const VectorField& u);

/// Per-node orthonormal frames of the metric: with g = L Lᵀ (Cholesky), a
/// vector u maps to Lᵀu and (u|v) becomes a Euclidean dot product. Rows of a
/// whitened block carry the quadrature weight as well, so the L² inner product
/// of fields is the dot product of their whitened columns.
class MetricFrames {
public:
    explicit MetricFrames(const SurfaceChart& chart);

    /// 2·N rows per vector field.
    void whiten_vector(const VectorField& u, Eigen::Ref<Eigen::VectorXd> out) const;
    /// 4·N rows for a (1,1) tensor: Lᵀ T L⁻ᵀ.
    void whiten_mixed(const TensorField& t, Eigen::Ref<Eigen::VectorXd> out) const;
    /// 3·N rows for a symmetric (0,2) tensor: L⁻¹ T L⁻ᵀ with off-diagonal scaled by √2.
    void whiten_symmetric(const TensorField& t, Eigen::Ref<Eigen::VectorXd> out) const;

    /// Inverse of whiten_vector.
    VectorField unwhiten_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    Grid grid_;
    Eigen::ArrayXd sqrt_w_, l00_, l10_, l11_;
};

/// L²-orthonormal basis of the discrete divergence-free space.
///
/// The space is spanned by stream fields ε(∇ψ)/√g of the Fourier modes of
/// ψ below the Nyquist index together with the two harmonic fields ε c/√g;
/// its dimension is (N_θ−1)(N_φ−1)+1. The basis is held as whitened columns
/// (see MetricFrames) ordered by increasing wavenumber, harmonic fields first.
class DivFreeBasis {
public:
    DivFreeBasis(const SurfaceChart& chart, double tol);

    const SurfaceChart& chart() const { return chart_; }
    const MetricFrames& frames() const { return frames_; }
    Eigen::Index size() const { return columns_.cols(); }
    /// Whitened columns, 2·N × size().
    const Eigen::MatrixXd& columns() const { return columns_; }

    VectorField field(Eigen::Index a) const;
    VectorField synthesize(const Eigen::Ref<const Eigen::VectorXd>& coefficients) const;
    /// (v|b_a)_Σ for every a; exact inverse of synthesize on the span.
    Eigen::VectorXd coefficients(const VectorField& v) const;
    /// Largest |Gram − I| entry after orthonormalization.
    double orthonormality_defect() const { return defect_; }

private:
    SurfaceChart chart_;
    MetricFrames frames_;
    Eigen::MatrixXd columns_;
    double defect_ = 0.0;
};

std::shared_ptr<const DivFreeBasis> divfree_basis(const SurfaceChart& chart, double tol = 1e-10);

/// Dense matrix of the Stokes operator in a divergence-free basis.
struct OperatorMatrix {
    std::shared_ptr<const DivFreeBasis> basis;
    double mu_s = 1.0;
    Eigen::MatrixXd entries;
    bool symmetric = false;
    double asymmetry = 0.0;  ///< max|M − Mᵀ| / max|M|
};

/// M_ab = (A b_b | b_a)_Σ with A in Bochner form. Columns are independent and
/// may be computed on up to `threads` worker threads; the result does not
/// depend on the thread count. Throws std::runtime_error if the relative
/// asymmetry exceeds 1e-6.
OperatorMatrix assemble_operator(const SurfaceChart& chart, double mu_s, std::shared_ptr<const DivFreeBasis> basis,
                                 int threads = 1);

/// Split of an ascending spectrum into a numerically zero part and the rest.
struct KernelSplit {
    Eigen::Index dimension = 0;
    double threshold = 0.0;   ///< 1e-6 × median of the top decile
    double gap_ratio = 0.0;   ///< first retained eigenvalue / largest |kernel eigenvalue|
    double first_nonzero = 0.0;
};

inline constexpr double kKernelRelativeThreshold = 1e-6;
inline constexpr double kRequiredSpectralGap = 1e2;

KernelSplit split_kernel(const Eigen::VectorXd& ascending);

struct Spectrum {
    Eigen::VectorXd eigenvalues;   ///< ascending
    Eigen::MatrixXd eigenvectors;  ///< columns in basis coefficients
    double spectral_bound = 0.0;   ///< s(−A) = −λ_min
    KernelSplit kernel;
    /// Eigenvectors spanning the numerical kernel.
    Eigen::MatrixXd kernel_vectors() const { return eigenvectors.leftCols(kernel.dimension); }
};

Spectrum spectrum(const OperatorMatrix& op);

/// Orthonormal basis of the Killing fields (the kernel of D_Σ on
/// divergence-free fields).
struct KillingBasis {
    std::vector<VectorField> fields;
    Eigen::MatrixXd coefficients;  ///< columns in the divergence-free basis
    Eigen::VectorXd form_eigenvalues;  ///< all eigenvalues of 2‖D(·)‖², ascending
    KernelSplit kernel;
    std::size_t size() const { return fields.size(); }
};

/// Gram matrices of quadratic forms over a divergence-free basis.
struct FormGrams {
    Eigen::MatrixXd deformation;  ///< (D b_a : D b_b)_Σ
    Eigen::MatrixXd gradient;     ///< (∇b_a : ∇b_b)_Σ
};

FormGrams form_grams(const DivFreeBasis& basis, int threads = 1);

/// Kernel of u ↦ 2∫|D(u)|² on the basis. `tol` overrides the relative kernel
/// threshold when positive. Throws std::runtime_error when the spectral gap
/// is below 1e2.
KillingBasis killing_fields(const SurfaceChart& chart, double tol = -1.0, int threads = 1);
KillingBasis killing_fields(std::shared_ptr<const DivFreeBasis> basis, const FormGrams& grams, double tol = -1.0);

/// P_E u = Σ (u|z_j) z_j.
VectorField project_onto_equilibria(const SurfaceChart& chart, const VectorField& u, const KillingBasis& kb);

/// Largest principal angle (radians) between the column spans of two
/// matrices with orthonormal columns.
double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct ResolventSample {
    std::complex<double> lambda;
    double q = 0.0;         ///< (|λ|+1) max_f ‖x‖/‖f‖ from dense solves
    double q_oracle = 0.0;  ///< same from the eigen-decomposition
};

struct ResolventTable {
    double omega = 0.0;
    double angle = 0.0;
    std::vector<ResolventSample> samples;
    double max_q = 0.0;
    double min_q = 0.0;
    double max_oracle_mismatch = 0.0;  ///< max relative |q − q_oracle|
    /// Spread (max − min)/max of the per-magnitude maxima.
    double variation() const { return max_q > 0.0 ? (max_q - min_q) / max_q : 0.0; }
};

/// Solves (λ + ω + A)x = f along the rays λ = m e^{±i(π−φ)} for each probe
/// right-hand side (coefficient vectors, normalized internally). Requires
/// ω > s(−A), φ ∈ (0, π/2) and positive magnitudes.
ResolventTable resolvent_probe(const OperatorMatrix& op, const Spectrum& spec, double omega, double angle,
                               const std::vector<double>& magnitudes, const std::vector<Eigen::VectorXd>& probes);

/// Unit random probes in the coefficient space.
std::vector<Eigen::VectorXd> random_probes(Eigen::Index dimension, int count, Rng& rng);

/// ω = s(−A) + 0.1·(smallest nonzero eigenvalue).
double default_shift(const Spectrum& spec);

}  // namespace surfstokes
