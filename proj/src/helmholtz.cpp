#include "surfstokes/helmholtz.hpp"

#include <cmath>
#include <Eigen/Dense>

#include "surfstokes/fieldcalc.hpp"

namespace surfstokes {

namespace {

using Arr = Eigen::ArrayXd;

// The harmonic block couples to ψ through two auxiliary solves computed
// once per projector; they are solved this much tighter than the user tol.
constexpr double kAuxiliaryTolFactor = 1e-2;
constexpr double kAuxiliaryTolFloor = 1e-13;

}  // namespace

LaplaceBeltramiSolver::LaplaceBeltramiSolver(const SurfaceChart& chart) : chart_(chart)
{
    for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
            a_[k][l] = chart.area_density() * chart.g_inv(k, l);
            mean_a_[k][l] = a_[k][l].mean();
        }
    }
}

Arr LaplaceBeltramiSolver::apply(const Arr& psi) const
{
    Arr d0, d1;
    chart_.spectral().gradient(psi, d0, d1);
    return -chart_.spectral().flux_divergence(a_[0][0] * d0 + a_[0][1] * d1, a_[1][0] * d0 + a_[1][1] * d1);
}

Arr LaplaceBeltramiSolver::precondition(const Arr& residual) const
{
    const auto& a = mean_a_;
    return chart_.spectral().apply_symbol(residual, [&a](int kt, int kp, bool, bool) {
        const double s = a[0][0] * kt * kt + 2.0 * a[0][1] * kt * kp + a[1][1] * kp * kp;
        return s > 0.0 ? 1.0 / s : 0.0;
    });
}

Arr LaplaceBeltramiSolver::solve(const Arr& rhs, double tol, SolveStats* stats, int max_iterations) const
{
    if (!(tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    const Grid& grid = chart_.grid();
    if (static_cast<std::size_t>(rhs.size()) != grid.size())
        throw std::invalid_argument("Laplace–Beltrami solve: shape mismatch");
    if (max_iterations < 0) max_iterations = 10 * grid.n_theta;
    const double w = grid.cell_area();

    Arr x = Arr::Zero(rhs.size());
    Arr r = rhs;
    Arr z = precondition(r);
    Arr p = z;
    double rz = (r * z).sum();
    double residual = std::sqrt(std::abs(rz) * w);
    int it = 0;
    while (residual > tol) {
        if (it >= max_iterations) {
            throw SolverError("Laplace–Beltrami CG did not converge in " + std::to_string(it) +
                                  " iterations (residual " + std::to_string(residual) + ")",
                              residual, it);
        }
        const Arr ap = apply(p);
        const double pap = (p * ap).sum();
        if (!(pap > 0.0)) break;  // search direction in the kernel: nothing left to resolve
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        z = precondition(r);
        const double rz_new = (r * z).sum();
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        residual = std::sqrt(std::abs(rz) * w);
        ++it;
    }
    if (stats != nullptr) *stats = {it, residual};
    return x;
}

HelmholtzProjector::HelmholtzProjector(const SurfaceChart& chart, double tol)
    : chart_(chart), tol_(tol), solver_(chart)
{
    if (!(tol > 0.0)) throw std::invalid_argument("projection tolerance must be positive");
    const double aux_tol = std::max(kAuxiliaryTolFloor, kAuxiliaryTolFactor * tol);
    const auto& ops = chart.spectral();
    const double w = chart.grid().cell_area();
    // Energy form of the parametrization (ψ, c) ↦ ε(∇ψ + c)/√g:
    //   E = Σ_nodes w a^{kl}(∂_kψ + c_k)(∂_lφ + d_l),   a^{kl} = √g g^{kl}.
    // Block B couples c to ψ: (B c) = −∂_k(a^{kl} c_l); H_kl = Σ w a^{kl}.
    Eigen::Matrix2d h;
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) h(k, l) = w * solver_.coefficient(k, l).sum();
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    for (int m = 0; m < 2; ++m) {
        const Arr bm = -ops.flux_divergence(solver_.coefficient(0, m), solver_.coefficient(1, m));
        cross_solutions_[m] = bm.matrix().norm() > 0.0 ? solver_.solve(bm, aux_tol) : Arr::Zero(bm.size());
        // (Bᵀ y)_l = Σ w a^{kl} ∂_k y
        Arr d0, d1;
        ops.gradient(cross_solutions_[m], d0, d1);
        for (int l = 0; l < 2; ++l)
            s(l, m) = w * (solver_.coefficient(0, l) * d0 + solver_.coefficient(1, l) * d1).sum();
    }
    harmonic_schur_ = h - s;
}

VectorField HelmholtzProjector::stream_field(const Arr& psi, const std::array<double, 2>& c) const
{
    Arr d0, d1;
    chart_.spectral().gradient(psi, d0, d1);
    const Arr& sg = chart_.area_density();
    return {chart_.grid(), {(d1 + c[1]) / sg, -(d0 + c[0]) / sg}};
}

VectorField HelmholtzProjector::project(const VectorField& v, SolveStats* stats) const
{
    require_same_grid(chart_.grid(), v.grid, "leray projection");
    const auto& ops = chart_.spectral();
    const double w = chart_.grid().cell_area();
    // Load functional (φ, d) ↦ (v | ε(∇φ + d)/√g)_Σ = Σ w s^l (∂_lφ + d_l),
    // s^0 = −v_1, s^1 = v_0 with v_k the lowered components.
    const CovectorField vl = lower(chart_, v);
    const Arr s0 = -vl.comp[1];
    const Arr& s1 = vl.comp[0];
    const Arr rhs_psi = -ops.flux_divergence(s0, s1);
    const Eigen::Vector2d rhs_c(w * s0.sum(), w * s1.sum());

    const Arr psi0 = solver_.solve(rhs_psi, tol_, stats);
    Arr d0, d1;
    ops.gradient(psi0, d0, d1);
    Eigen::Vector2d bt_psi0;
    for (int l = 0; l < 2; ++l)
        bt_psi0(l) = w * (solver_.coefficient(0, l) * d0 + solver_.coefficient(1, l) * d1).sum();
    const Eigen::Vector2d c = harmonic_schur_.ldlt().solve(rhs_c - bt_psi0);
    const Arr psi = psi0 - c(0) * cross_solutions_[0] - c(1) * cross_solutions_[1];
    return stream_field(psi, {c(0), c(1)});
}

ScalarField HelmholtzProjector::gradient_potential(const VectorField& v, SolveStats* stats) const
{
    require_same_grid(chart_.grid(), v.grid, "gradient potential");
    // (v|∇φ)_Σ = Σ w √g v^k ∂_kφ  ->  rhs = −∂_k(√g v^k)
    const Arr& sg = chart_.area_density();
    const Arr rhs = -chart_.spectral().flux_divergence(sg * v.comp[0], sg * v.comp[1]);
    ScalarField psi{chart_.grid(), solver_.solve(rhs, tol_, stats)};
    return remove_mean(chart_, std::move(psi));
}

LerayResult HelmholtzProjector::decompose(const VectorField& v) const
{
    SolveStats a, b;
    LerayResult out{project(v, &a), gradient_potential(v, &b), {}};
    out.stats = {std::max(a.iterations, b.iterations), std::max(a.residual, b.residual)};
    return out;
}

LerayResult leray_project(const SurfaceChart& chart, const VectorField& v, double tol)
{
    return HelmholtzProjector(chart, tol).decompose(v);
}

ScalarField recover_pressure(const HelmholtzProjector& projector, const VectorField& u, double mu_s)
{
    const SurfaceChart& chart = projector.chart();
    const VectorField v = covariant_divergence(chart, deformation(chart, u));
    ScalarField pi = projector.gradient_potential(v);
    pi.values *= 2.0 * mu_s;
    return pi;
}

ScalarField recover_pressure(const SurfaceChart& chart, const VectorField& u, double mu_s, double tol)
{
    return recover_pressure(HelmholtzProjector(chart, tol), u, mu_s);
}

double divergence_residual(const SurfaceChart& chart, const VectorField& u)
{
    return l2_norm(chart, divergence(chart, u));
}

VectorField random_divfree_field(const HelmholtzProjector& projector, Rng& rng)
{
    return projector.project(random_smooth_vector(projector.chart().grid(), rng));
}

ScalarField remove_mean(const SurfaceChart& chart, ScalarField f)
{
    f.values -= integrate_scalar(chart, f) / chart.area();
    return f;
}

}  // namespace surfstokes
