#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "surfstokes/fields.hpp"
#include "surfstokes/geometry.hpp"
#include "surfstokes/random_fields.hpp"

namespace surfstokes {

inline constexpr double kDefaultProjectionTol = 1e-10;

/// Iterative solver that hit its iteration cap.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations)
    {
    }
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
};

/// Weak Laplace–Beltrami operator Lψ = −∂_k(√g g^{kl} ∂_l ψ) on grid values.
///
/// L is symmetric positive semidefinite under the plain grid sum; its kernel
/// is spanned by the grid functions with vanishing spectral gradient (the
/// constant and the three Nyquist checkerboards). Solves use preconditioned
/// CG with the inverse of the constant-coefficient operator built from the
/// grid averages of √g g^{kl}, which is diagonal in Fourier space and exact
/// on flat tori.
class LaplaceBeltramiSolver {
public:
    explicit LaplaceBeltramiSolver(const SurfaceChart& chart);

    Eigen::ArrayXd apply(const Eigen::ArrayXd& psi) const;
    Eigen::ArrayXd precondition(const Eigen::ArrayXd& residual) const;

    /// Solves Lψ = rhs for rhs orthogonal to the kernel. Convergence is
    /// declared when the preconditioned residual norm (r·M⁻¹r times the cell
    /// area, an estimate of ‖∇(ψ − ψ*)‖) drops to tol. Throws SolverError at
    /// max_iterations (default 10·n_theta).
    Eigen::ArrayXd solve(const Eigen::ArrayXd& rhs, double tol, SolveStats* stats = nullptr,
                         int max_iterations = -1) const;

    /// Coefficients √g g^{kl}.
    const Eigen::ArrayXd& coefficient(int k, int l) const { return a_[k][l]; }

private:
    SurfaceChart chart_;
    std::array<std::array<Eigen::ArrayXd, 2>, 2> a_;
    std::array<std::array<double, 2>, 2> mean_a_{};
};

/// Result of a Helmholtz decomposition v = ∇_Σψ_v + P v.
struct LerayResult {
    VectorField projected;   ///< P v, divergence free
    ScalarField potential;   ///< ψ_v with ∫ψ_v dΣ = 0
    SolveStats stats;        ///< worst of the two solves
};

/// L²-orthogonal projection onto divergence-free fields, with cached solver
/// state for one chart.
///
/// The divergence-free space is represented exactly by stream functions:
/// every element has the form u^i = ε^{ij}(∂_jψ + c_j)/√g with ψ a grid
/// function and c a constant covector (the harmonic part). Such fields have
/// identically vanishing discrete divergence, and the projection is the
/// Galerkin solve for (ψ, c) in the L²(Σ) inner product. The Gram operator
/// of that parametrization is the same weak Laplace–Beltrami operator used
/// for the gradient potential, so one solver serves both.
class HelmholtzProjector {
public:
    explicit HelmholtzProjector(const SurfaceChart& chart, double tol = kDefaultProjectionTol);

    const SurfaceChart& chart() const { return chart_; }
    double tol() const { return tol_; }

    /// P v.
    VectorField project(const VectorField& v, SolveStats* stats = nullptr) const;

    /// ψ_v solving (∇ψ_v|∇φ)_Σ = (v|∇φ)_Σ for all φ, normalized to zero mean.
    ScalarField gradient_potential(const VectorField& v, SolveStats* stats = nullptr) const;

    /// Both of the above.
    LerayResult decompose(const VectorField& v) const;

    /// ε^{ij}(∂_jψ + c_j)/√g.
    VectorField stream_field(const Eigen::ArrayXd& psi, const std::array<double, 2>& harmonic) const;

    const LaplaceBeltramiSolver& solver() const { return solver_; }

private:
    SurfaceChart chart_;
    double tol_;
    LaplaceBeltramiSolver solver_;
    // Schur complement data for the harmonic block.
    std::array<Eigen::ArrayXd, 2> cross_solutions_;  // L⁺(B e_m)
    Eigen::Matrix2d harmonic_schur_;
};

/// Convenience wrapper: builds a projector and returns (P v, ψ_v).
LerayResult leray_project(const SurfaceChart& chart, const VectorField& v, double tol = kDefaultProjectionTol);

/// π = 2μ_s ψ_v for v = tensor divergence of D_Σ(u); mean zero.
ScalarField recover_pressure(const HelmholtzProjector& projector, const VectorField& u, double mu_s);
ScalarField recover_pressure(const SurfaceChart& chart, const VectorField& u, double mu_s,
                             double tol = kDefaultProjectionTol);

/// ‖div_Σ u‖_{L₂(Σ)}.
double divergence_residual(const SurfaceChart& chart, const VectorField& u);

/// Smooth random field (see random_smooth_vector) projected divergence free.
VectorField random_divfree_field(const HelmholtzProjector& projector, Rng& rng);

/// Subtracts the area-weighted mean.
ScalarField remove_mean(const SurfaceChart& chart, ScalarField f);

}  // namespace surfstokes
