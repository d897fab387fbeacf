#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "surfstokes/fieldcalc.hpp"
#include "surfstokes/korn.hpp"

using namespace surfstokes;
using std::numbers::pi;

namespace {

struct Setup {
    SurfaceChart chart;
    std::shared_ptr<const DivFreeBasis> basis;
    FormGrams grams;
    KillingBasis kb;
};

Setup setup(SurfaceChart chart)
{
    auto basis = divfree_basis(chart);
    auto grams = form_grams(*basis);
    auto kb = killing_fields(basis, grams);
    return {std::move(chart), std::move(basis), std::move(grams), std::move(kb)};
}

}  // namespace

TEST(Korn, FlatTorusConstant)
{
    const auto s = setup(build_flat_torus(2 * pi, 2 * pi, 16, 16));
    const auto res = korn_constant(*s.basis, s.grams, s.kb);
    EXPECT_NEAR(res.constant, 2.0, 1e-10);
    EXPECT_EQ(res.complement_dimension, s.basis->size() - 2);
    EXPECT_NEAR(korn_constant(s.chart, s.kb, *s.basis), 2.0, 1e-10);
}

TEST(Korn, LargerFlatTorus)
{
    const auto s = setup(build_flat_torus(4 * pi, 4 * pi, 16, 16));
    EXPECT_NEAR(korn_constant(*s.basis, s.grams, s.kb).constant, std::sqrt(10.0), 1e-10);
}

TEST(Korn, ExtremalFieldAttainsConstant)
{
    const auto s = setup(build_torus_of_revolution(2, 1, 16, 16));
    const auto res = korn_constant(*s.basis, s.grams, s.kb);
    const auto v = s.basis->synthesize(res.minimizer);
    EXPECT_NEAR(h1_norm(s.chart, v) / std::sqrt(deformation_norm_sq(s.chart, v)), res.constant, 1e-8 * res.constant);
    EXPECT_LE(korn_sample_ratio(s.chart, s.kb, 20, 1), res.constant * 1.01);
}

TEST(Korn, EnlargingExclusionDoesNotIncreaseConstant)
{
    const auto s = setup(build_torus_of_revolution(2, 1, 16, 16));
    const auto base = korn_constant(*s.basis, s.grams, s.kb);
    const auto more = korn_constant(*s.basis, s.grams, s.kb, {s.basis->synthesize(base.minimizer), s.basis->field(9)});
    EXPECT_LE(more.constant, base.constant * (1 + 1e-12));
    EXPECT_EQ(more.complement_dimension, base.complement_dimension - 2);
}

TEST(Korn, KillingLeakIsReported)
{
    const auto s = setup(build_flat_torus(2 * pi, 2 * pi, 8, 8));
    KillingBasis empty;
    empty.coefficients.resize(s.basis->size(), 0);
    EXPECT_THROW(korn_constant(*s.basis, s.grams, empty), std::runtime_error);
}

TEST(Korn, IntermediateCheck)
{
    const auto chart = build_flat_torus(2 * pi, 2 * pi, 16, 16);
    const auto report = korn_intermediate_check(chart, 10, 3);
    EXPECT_EQ(report.samples, 10);
    EXPECT_LE(report.max_ratio, 4.0);
    EXPECT_LE(report.max_identity_residual, 1e-8);
    EXPECT_THROW(korn_intermediate_check(chart, 5, 3), std::invalid_argument);
}
