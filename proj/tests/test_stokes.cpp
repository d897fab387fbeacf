#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "surfstokes/fieldcalc.hpp"
#include "surfstokes/stokes.hpp"

using namespace surfstokes;
using std::numbers::pi;

namespace {

struct Dense {
    std::shared_ptr<const DivFreeBasis> basis;
    OperatorMatrix op;
    Spectrum spec;
};

Dense dense(const SurfaceChart& chart, double mu_s = 1.0)
{
    auto basis = divfree_basis(chart);
    auto op = assemble_operator(chart, mu_s, basis);
    auto spec = spectrum(op);
    return {basis, std::move(op), std::move(spec)};
}

}  // namespace

TEST(DivFreeBasis, DimensionAndOrthonormality)
{
    const auto flat = build_flat_torus(2 * pi, 2 * pi, 16, 16);
    const auto torus = build_torus_of_revolution(2, 1, 16, 16);
    for (const auto& chart : {flat, torus}) {
        const auto basis = divfree_basis(chart);
        EXPECT_EQ(basis->size(), 226);
        EXPECT_LE(basis->orthonormality_defect(), 1e-10);
        const auto b = basis->field(5);
        EXPECT_LE(divergence_residual(chart, b), 1e-10);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(basis->size());
        c(3) = 2.0;
        c(40) = -1.0;
        EXPECT_LE((basis->coefficients(basis->synthesize(c)) - c).norm(), 1e-12);
    }
    EXPECT_EQ(divfree_basis(build_flat_torus(2 * pi, 2 * pi, 32, 32))->size(), 962);
}

TEST(StokesOperator, FlatTorusFourierSpectrum)
{
    const double mu = 0.7;
    const auto chart = build_flat_torus(2 * pi, 4 * pi, 16, 16);
    const auto d = dense(chart, mu);
    EXPECT_TRUE(d.op.symmetric);
    // k₁² + k₂²/4 for half-plane wavenumbers, each twice.
    const std::vector<double> expected{0, 0, 0.25, 0.25, 1, 1, 1, 1, 1.25, 1.25, 1.25, 1.25, 2, 2, 2, 2};
    for (std::size_t i = 0; i < expected.size(); ++i)
        EXPECT_NEAR(d.spec.eigenvalues(static_cast<Eigen::Index>(i)), mu * expected[i], 1e-9) << i;
    EXPECT_EQ(d.spec.kernel.dimension, 2);
    EXPECT_GE(d.spec.kernel.gap_ratio, kRequiredSpectralGap);
}

TEST(StokesOperator, SingleModeIsEigenfield)
{
    const auto chart = build_flat_torus(2 * pi, 2 * pi, 16, 16);
    auto u = VectorField::zeros(chart.grid());
    u.comp[1] = chart.theta().sin();
    const auto au = apply_stokes_bochner_form(chart, 2.0, u);
    EXPECT_LE(l2_norm(chart, au - 2.0 * u), 1e-10);
    EXPECT_LE(l2_norm(chart, apply_stokes_div_form(chart, 2.0, u) - 2.0 * u), 1e-10);
}

TEST(StokesOperator, TorusSpectralBoundAndKernel)
{
    const auto chart = build_torus_of_revolution(2, 1, 16, 16);
    const auto d = dense(chart);
    const double lmax = d.spec.eigenvalues(d.spec.eigenvalues.size() - 1);
    EXPECT_LE(std::abs(d.spec.spectral_bound), 1e-8 * lmax);
    EXPECT_EQ(d.spec.kernel.dimension, 1);
    EXPECT_GE(d.spec.kernel.gap_ratio, kRequiredSpectralGap);
}

TEST(StokesOperator, FormsAgreeAndRejectNonSolenoidal)
{
    const auto chart = build_torus_of_revolution(2, 1, 32, 32);
    const HelmholtzProjector p(chart);
    Rng rng(3);
    const auto u = random_divfree_field(p, rng);
    EXPECT_LE(l2_norm(chart, apply_stokes_div_form(p, 1.0, u) - apply_stokes_bochner_form(p, 1.0, u)),
              1e-4 * l2_norm(chart, u));
    const ScalarField f{chart.grid(), chart.theta().sin()};
    const auto g = grad_scalar(chart, f);
    EXPECT_THROW(apply_stokes_div_form(p, 1.0, g), std::invalid_argument);
    EXPECT_THROW(apply_stokes_bochner_form(p, 1.0, g), std::invalid_argument);
}

TEST(Killing, FlatTorusTranslations)
{
    const auto chart = build_flat_torus(2 * pi, 2 * pi, 16, 16);
    const auto kb = killing_fields(chart);
    ASSERT_EQ(kb.size(), 2u);
    for (const auto& w : {VectorField::constant(chart.grid(), 1, 0), VectorField::constant(chart.grid(), 0, 1)})
        EXPECT_LE(l2_norm(chart, w - project_onto_equilibria(chart, w, kb)), 1e-10);
}

TEST(Killing, TorusRotationAndProjector)
{
    const auto chart = build_torus_of_revolution(2, 1, 16, 16);
    const auto d = dense(chart);
    const auto kb = killing_fields(d.basis, form_grams(*d.basis));
    ASSERT_EQ(kb.size(), 1u);
    const auto& z = kb.fields[0];
    EXPECT_NEAR(l2_norm(chart, z), 1.0, 1e-12);
    EXPECT_LE(std::sqrt(deformation_norm_sq(chart, z)), 1e-8);
    EXPECT_LE(z.comp[0].abs().maxCoeff(), 1e-8);
    EXPECT_LE((z.comp[1] - z.comp[1](0)).abs().maxCoeff(), 1e-8);
    EXPECT_LE(subspace_angle(d.spec.kernel_vectors(), kb.coefficients), 1e-6);

    Rng rng(5);
    const HelmholtzProjector p(chart);
    const auto u = random_divfree_field(p, rng);
    const auto v = random_divfree_field(p, rng);
    const auto pu = project_onto_equilibria(chart, u, kb);
    EXPECT_LE(l2_norm(chart, project_onto_equilibria(chart, pu, kb) - pu), 1e-12 * l2_norm(chart, u));
    EXPECT_NEAR(l2_inner(chart, pu, v), l2_inner(chart, u, project_onto_equilibria(chart, v, kb)),
                1e-12 * l2_norm(chart, u) * l2_norm(chart, v));
    EXPECT_LE(l2_norm(chart, apply_stokes_bochner_form(p, 1.0, z)), 1e-8);
}

TEST(Resolvent, EigenvectorProbeIsExact)
{
    const auto chart = build_torus_of_revolution(2, 1, 16, 16);
    const auto d = dense(chart);
    const double omega = default_shift(d.spec);
    const Eigen::Index k = 7;
    const std::vector<Eigen::VectorXd> probes{d.spec.eigenvectors.col(k)};
    const auto table = resolvent_probe(d.op, d.spec, omega, pi / 4, {1.0, 100.0}, probes);
    for (const auto& s : table.samples) {
        const double exact = (std::abs(s.lambda) + 1.0) / std::abs(s.lambda + omega + d.spec.eigenvalues(k));
        EXPECT_NEAR(s.q, exact, 1e-10 * exact);
    }
    EXPECT_LE(table.max_oracle_mismatch, 1e-8);
}

TEST(Resolvent, RandomProbesMatchOracleAndSectorBound)
{
    const auto chart = build_flat_torus(2 * pi, 2 * pi, 16, 16);
    const auto d = dense(chart);
    Rng rng(1);
    const double omega = default_shift(d.spec);
    const auto table =
        resolvent_probe(d.op, d.spec, omega, pi / 4, {1.0, 10.0, 100.0, 1000.0}, random_probes(d.basis->size(), 4, rng));
    EXPECT_LE(table.max_oracle_mismatch, 1e-8);
    for (const auto& s : table.samples) {
        // dist(−λ−ω, [0,∞)) for λ in the left half plane.
        const auto z = s.lambda + omega;
        const double dist = z.real() >= 0 ? std::abs(z) : std::abs(z.imag());
        EXPECT_LE(s.q, (std::abs(s.lambda) + 1.0) / dist * (1 + 1e-12));
    }
}

TEST(Resolvent, RejectsBadArguments)
{
    const auto chart = build_flat_torus(2 * pi, 2 * pi, 8, 8);
    const auto d = dense(chart);
    Rng rng(1);
    const auto probes = random_probes(d.basis->size(), 1, rng);
    EXPECT_THROW(resolvent_probe(d.op, d.spec, -1.0, pi / 4, {1.0}, probes), std::invalid_argument);
    EXPECT_THROW(resolvent_probe(d.op, d.spec, 1.0, 0.0, {1.0}, probes), std::invalid_argument);
    EXPECT_THROW(resolvent_probe(d.op, d.spec, 1.0, pi / 4, {-1.0}, probes), std::invalid_argument);
}

TEST(StokesOperator, AssemblyIndependentOfThreads)
{
    const auto chart = build_torus_of_revolution(2, 1, 8, 8);
    const auto basis = divfree_basis(chart);
    const auto a = assemble_operator(chart, 1.0, basis, 1);
    const auto b = assemble_operator(chart, 1.0, basis, 3);
    EXPECT_EQ((a.entries - b.entries).cwiseAbs().maxCoeff(), 0.0);
}
