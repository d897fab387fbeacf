#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "surfstokes/fieldcalc.hpp"
#include "surfstokes/helmholtz.hpp"

using namespace surfstokes;
using std::numbers::pi;

namespace {

double max_abs(const VectorField& u) { return std::max(u.comp[0].abs().maxCoeff(), u.comp[1].abs().maxCoeff()); }

}  // namespace

TEST(Helmholtz, AnnihilatesGradient)
{
    const auto chart = build_torus_of_revolution(2, 1, 32, 32);
    const ScalarField psi{chart.grid(), chart.theta().cos()};
    const auto res = leray_project(chart, grad_scalar(chart, psi));
    EXPECT_LE(l2_norm(chart, res.projected), 1e-8);
    const auto expected = remove_mean(chart, psi);
    EXPECT_LE((res.potential.values - expected.values).abs().maxCoeff(), 1e-8);
}

TEST(Helmholtz, KeepsDivergenceFree)
{
    const auto chart = build_torus_of_revolution(2, 1, 32, 32);
    const auto z = VectorField::constant(chart.grid(), 0, 1);
    const auto res = leray_project(chart, z);
    EXPECT_LE(max_abs(res.projected - z), 1e-8);
    EXPECT_LE(res.potential.values.abs().maxCoeff(), 1e-8);
}

TEST(Helmholtz, Properties)
{
    const double tol = 1e-10;
    const auto chart = build_torus_of_revolution(2, 1, 64, 64);
    const HelmholtzProjector p(chart, tol);
    Rng rng(1);
    for (int s = 0; s < 3; ++s) {
        const auto u = random_smooth_vector(chart.grid(), rng);
        const auto v = random_smooth_vector(chart.grid(), rng);
        SolveStats st;
        const auto pu = p.project(u, &st);
        EXPECT_LE(st.iterations, 10 * chart.grid().n_theta);
        const auto pv = p.project(v);
        EXPECT_LE(divergence_residual(chart, pu), 10 * tol);
        EXPECT_LE(l2_norm(chart, p.project(pu) - pu), 10 * tol);
        EXPECT_LE(std::abs(l2_inner(chart, pu, v) - l2_inner(chart, u, pv)),
                  10 * tol * l2_norm(chart, u) * l2_norm(chart, v));
        const auto g = grad_scalar(chart, random_smooth_scalar(chart.grid(), rng));
        EXPECT_LE(l2_norm(chart, p.project(g)), 10 * tol);
        // v − Pv is orthogonal to the divergence-free range.
        EXPECT_LE(std::abs(l2_inner(chart, u - pu, pv)), 10 * tol * l2_norm(chart, u) * l2_norm(chart, v));
        // Gradient route agrees with the stream route up to the discretization.
        const auto grad_psi = grad_scalar(chart, p.gradient_potential(u));
        EXPECT_LE(l2_norm(chart, u - grad_psi - pu), 1e-8 * l2_norm(chart, u));
    }
}

TEST(Helmholtz, MatchesDenseWeakSolve)
{
    // Dense oracle at N=16: least-squares projection onto the span of the
    // stream fields of every grid function and both harmonic fields.
    const auto chart = build_torus_of_revolution(2, 1, 16, 16);
    const HelmholtzProjector p(chart, 1e-12);
    const Grid& grid = chart.grid();
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd span(2 * n, n + 2);
    const Eigen::ArrayXd sw = (chart.area_weights()).sqrt();
    // Whitened coordinates so the L² inner product becomes Euclidean.
    auto whiten = [&](const VectorField& u) {
        Eigen::VectorXd x(2 * n);
        const Eigen::ArrayXd a = chart.g(0, 0).sqrt();
        const Eigen::ArrayXd b = chart.g(0, 1) / a;
        const Eigen::ArrayXd c = (chart.g(1, 1) - b * b).sqrt();
        x.head(n) = (sw * (a * u.comp[0] + b * u.comp[1])).matrix();
        x.tail(n) = (sw * c * u.comp[1]).matrix();
        return x;
    };
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::ArrayXd e = Eigen::ArrayXd::Zero(n);
        e(k) = 1.0;
        span.col(k) = whiten(p.stream_field(e, {0, 0}));
    }
    span.col(n) = whiten(p.stream_field(Eigen::ArrayXd::Zero(n), {1, 0}));
    span.col(n + 1) = whiten(p.stream_field(Eigen::ArrayXd::Zero(n), {0, 1}));
    Rng rng(2);
    const auto v = random_smooth_vector(grid, rng);
    const Eigen::VectorXd x = whiten(v);
    const Eigen::VectorXd coeffs = span.completeOrthogonalDecomposition().solve(x);
    const Eigen::VectorXd dense = span * coeffs;
    EXPECT_LE((whiten(p.project(v)) - dense).norm(), 1e-9 * x.norm());
}

TEST(Helmholtz, PressureOfKillingFieldVanishes)
{
    const auto chart = build_torus_of_revolution(2, 1, 32, 32);
    const auto pi_field = recover_pressure(chart, VectorField::constant(chart.grid(), 0, 1), 1.0);
    EXPECT_LE(pi_field.values.abs().maxCoeff(), 1e-8);
}

TEST(Helmholtz, PressureEstimateStable)
{
    auto ratio = [](int n) {
        const auto chart = build_torus_of_revolution(2, 1, n, n);
        const HelmholtzProjector p(chart);
        Rng rng(13);
        double worst = 0.0;
        for (int s = 0; s < 4; ++s) {
            const auto u = random_divfree_field(p, rng);
            const auto pr = recover_pressure(p, u, 1.0);
            EXPECT_NEAR(integrate_scalar(chart, pr), 0.0, 1e-9);
            worst = std::max(worst, l2_norm(chart, pr) / h1_norm(chart, u));
        }
        return worst;
    };
    const double c48 = ratio(48), c64 = ratio(64);
    EXPECT_GT(c48, 0.0);
    EXPECT_LE(std::abs(c48 - c64), 0.05 * c64);
}

TEST(Helmholtz, Errors)
{
    const auto chart = build_flat_torus(1, 1, 16, 16);
    EXPECT_THROW(HelmholtzProjector(chart, 0.0), std::invalid_argument);
    const HelmholtzProjector p(chart);
    EXPECT_THROW(p.project(VectorField::zeros(Grid{8, 8})), std::invalid_argument);
    Rng rng(3);
    const auto rhs = random_smooth_scalar(chart.grid(), rng, false).values;
    try {
        p.solver().solve(rhs, 1e-30, nullptr, 1);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_GT(e.residual(), 0.0);
        EXPECT_EQ(e.iterations(), 1);
    }
}
