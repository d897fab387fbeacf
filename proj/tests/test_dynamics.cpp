#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "surfstokes/dynamics.hpp"
#include "surfstokes/fieldcalc.hpp"

using namespace surfstokes;
using std::numbers::pi;

namespace {

SimConfig flat_config(int n)
{
    SimConfig c;
    c.surface = SurfaceKind::FlatTorus;
    c.n_theta = c.n_phi = n;
    return c;
}

SimConfig torus_config(int n)
{
    SimConfig c;
    c.n_theta = c.n_phi = n;
    return c;
}

}  // namespace

class ExactDecay : public ::testing::TestWithParam<bool> {};

TEST_P(ExactDecay, SingleModeMatchesExponential)
{
    SimConfig c = flat_config(16);
    c.dt = 1e-3;
    c.mu_s = 0.5;
    c.rho = 2.0;
    const auto chart = build_chart(c);
    auto u0 = VectorField::zeros(chart.grid());
    u0.comp[1] = chart.theta().sin();
    std::shared_ptr<const OperatorMatrix> op;
    if (GetParam()) op = std::make_shared<const OperatorMatrix>(assemble_operator(chart, c.mu_s, divfree_basis(chart)));
    Stepper stepper(c, chart, op);
    const auto tr = simulate(stepper, c, u0);
    ASSERT_TRUE(tr.completed) << tr.error;
    const auto& last = tr.samples.back();
    EXPECT_NEAR(last.t, 1.0, 1e-12);
    const double nu = c.mu_s / c.rho;
    EXPECT_LE(l2_norm(chart, last.u - std::exp(-nu) * u0) / l2_norm(chart, u0), 1e-6);
    EXPECT_NEAR(last.dissipation, 2 * nu * last.energy, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Paths, ExactDecay, ::testing::Values(false, true));

TEST(Dynamics, KillingFieldIsFixedPoint)
{
    SimConfig c = torus_config(16);
    c.t_end = 0.5;
    const auto chart = build_chart(c);
    const auto kb = std::make_shared<const KillingBasis>(killing_fields(chart));
    const auto z = kb->fields[0];
    const HelmholtzProjector p(chart);
    EXPECT_LE(l2_norm(chart, nonlinearity(p, z, false)), 1e-10);
    for (const bool dense : {false, true}) {
        std::shared_ptr<const OperatorMatrix> op;
        if (dense) op = std::make_shared<const OperatorMatrix>(assemble_operator(chart, c.mu_s, divfree_basis(chart)));
        const auto tr = simulate(c, z, op, kb);
        ASSERT_TRUE(tr.completed) << tr.error;
        EXPECT_LE(l2_norm(chart, tr.samples.back().u - z), 1e-8);
        EXPECT_LE(tr.samples.back().distance_to_equilibrium, 1e-8);
        EXPECT_THROW(decay_rate_fit(tr, 0.0), std::runtime_error);
    }
}

TEST(Dynamics, NonlinearityIsEnergyNeutral)
{
    const auto chart = build_torus_of_revolution(2, 1, 64, 64);
    const HelmholtzProjector p(chart);
    Rng rng(11);
    for (int s = 0; s < 50; ++s) {
        const auto u = random_divfree_field(p, rng);
        const auto f = nonlinearity(p, u, false);
        EXPECT_LE(std::abs(l2_inner(chart, f, u)), 1e-9 * l2_norm(chart, f) * l2_norm(chart, u)) << s;
        EXPECT_LE(divergence_residual(chart, f), 1e-8);
    }
}

TEST(Dynamics, NonlinearRunConservesKillingMomentsAndDissipates)
{
    SimConfig c = torus_config(32);
    c.t_end = 1.0;
    const auto chart = build_chart(c);
    const auto basis = divfree_basis(chart);
    const auto op = std::make_shared<const OperatorMatrix>(assemble_operator(chart, c.mu_s, basis));
    const auto kb = std::make_shared<const KillingBasis>(killing_fields(basis, form_grams(*basis)));
    const HelmholtzProjector p(chart);
    Rng rng(2);
    auto u0 = random_divfree_field(p, rng);
    u0 *= 0.5 * dt_max(chart, u0) / c.dt;
    const auto tr = simulate(c, u0, op, kb);
    ASSERT_TRUE(tr.completed) << tr.error;
    const double norm0 = std::sqrt(2 * tr.samples.front().energy);
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        EXPECT_LE(tr.samples[i].energy, tr.samples[i - 1].energy * (1 + 1e-10));
        EXPECT_NEAR(tr.samples[i].killing_moments[0], tr.samples[0].killing_moments[0], 1e-9 * norm0);
        EXPECT_LE(tr.samples[i].divergence, 1e-8);
    }
}

TEST(Dynamics, LinearDecayMatchesGap)
{
    SimConfig c = flat_config(16);
    c.nonlinear = false;
    c.t_end = 4.0;
    c.dt = 0.02;
    const auto chart = build_chart(c);
    const auto kb = std::make_shared<const KillingBasis>(killing_fields(chart));
    const HelmholtzProjector p(chart);
    Rng rng(4);
    const auto tr = simulate(c, random_divfree_field(p, rng), nullptr, kb);
    ASSERT_TRUE(tr.completed);
    const auto fit = decay_rate_fit(tr, 2.0);
    EXPECT_NEAR(fit.alpha, 1.0, 0.02);
    EXPECT_GE(fit.used_samples, 10u);
}

TEST(Dynamics, CflAndConfigErrors)
{
    SimConfig c = flat_config(16);
    c.dt = 1.0;
    const auto chart = build_chart(c);
    EXPECT_THROW(simulate(c, VectorField::constant(chart.grid(), 0, 1)), std::invalid_argument);

    SimConfig bad = torus_config(16);
    bad.R = 1.0;
    EXPECT_THROW(validate(bad), std::invalid_argument);
    bad = torus_config(15);
    EXPECT_THROW(validate(bad), std::invalid_argument);
    bad = torus_config(16);
    bad.mu_s = 0.0;
    EXPECT_THROW(validate(bad), std::invalid_argument);
}

TEST(Dynamics, Imex1IsFirstOrderAndStable)
{
    SimConfig c = flat_config(16);
    c.integrator = Integrator::Imex1;
    c.dt = 1e-2;
    const auto chart = build_chart(c);
    auto u0 = VectorField::zeros(chart.grid());
    u0.comp[1] = chart.theta().sin();
    const auto tr = simulate(c, u0);
    ASSERT_TRUE(tr.completed);
    const double exact = std::pow(1.0 / (1.0 + c.dt), 100);
    EXPECT_NEAR(std::sqrt(tr.samples.back().energy / tr.samples.front().energy), exact, 1e-12);
}
