#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "surfstokes/fields.hpp"
#include "surfstokes/geometry.hpp"

using namespace surfstokes;
using std::numbers::pi;

namespace {

double closed_form_k(double R, double r, double theta)
{
    return std::cos(theta) / (r * (R + r * std::cos(theta)));
}

}  // namespace

TEST(FlatTorus, UnitMetric)
{
    const auto chart = build_flat_torus(2 * pi, 2 * pi, 16, 16);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            EXPECT_LT((chart.g(i, j) - (i == j ? 1.0 : 0.0)).abs().maxCoeff(), 1e-15);
            for (int k = 0; k < 2; ++k) EXPECT_EQ(chart.christoffel(k, i, j).abs().maxCoeff(), 0.0);
        }
    EXPECT_EQ(chart.gauss_curvature().abs().maxCoeff(), 0.0);
}

TEST(FlatTorus, Area)
{
    const auto chart = build_flat_torus(4 * pi, 2 * pi, 16, 16);
    EXPECT_NEAR(chart.g(0, 0)(0), 4.0, 1e-14);
    EXPECT_NEAR(chart.g(1, 1)(0), 1.0, 1e-14);
    EXPECT_NEAR(integrate_scalar(chart, ScalarField::constant(chart.grid(), 1.0)), 8 * pi * pi, 1e-12);
}

TEST(FlatTorus, Rejections)
{
    EXPECT_THROW(build_flat_torus(0.0, 1.0, 16, 16), std::invalid_argument);
    EXPECT_THROW(build_flat_torus(1.0, -1.0, 16, 16), std::invalid_argument);
    EXPECT_THROW(build_flat_torus(1.0, 1.0, 15, 16), std::invalid_argument);
    EXPECT_THROW(build_flat_torus(1.0, 1.0, 16, 6), std::invalid_argument);
}

TEST(TorusOfRevolution, AreaAndGaussBonnet)
{
    const auto chart = build_torus_of_revolution(2, 1, 64, 64);
    EXPECT_NEAR(chart.area(), 8 * pi * pi, 1e-10);
    EXPECT_NEAR(integrate_scalar(chart, gaussian_curvature(chart)), 0.0, 1e-10);
}

TEST(TorusOfRevolution, CurvatureMatchesClosedForm)
{
    const double R = 2, r = 1;
    const auto chart = build_torus_of_revolution(R, r, 64, 64);
    const Grid& grid = chart.grid();
    double worst = 0.0;
    for (int j = 0; j < grid.n_theta; ++j)
        for (int l = 0; l < grid.n_phi; ++l)
            worst = std::max(worst, std::abs(chart.gauss_curvature()(grid.index(j, l)) -
                                             closed_form_k(R, r, grid.theta(j))));
    EXPECT_LE(worst, 1e-8);
    EXPECT_NEAR(chart.gauss_curvature()(grid.index(0, 0)), 1.0 / 3.0, 1e-8);
    EXPECT_NEAR(chart.gauss_curvature()(grid.index(32, 0)), -1.0, 1e-8);
}

TEST(TorusOfRevolution, Christoffel)
{
    const auto chart = build_torus_of_revolution(2, 1, 64, 64);
    const Grid& grid = chart.grid();
    // θ = π/2 at j = 16
    EXPECT_NEAR(chart.christoffel(0, 1, 1)(grid.index(16, 5)), 2.0, 1e-8);
    for (int k = 0; k < 2; ++k)
        EXPECT_EQ((chart.christoffel(k, 0, 1) - chart.christoffel(k, 1, 0)).abs().maxCoeff(), 0.0);
    // Γ^φ_θφ = −r sinθ/(R + r cosθ)
    double worst = 0.0;
    for (int j = 0; j < grid.n_theta; ++j) {
        const double t = grid.theta(j);
        worst = std::max(worst, std::abs(chart.christoffel(1, 0, 1)(grid.index(j, 0)) + std::sin(t) / (2 + std::cos(t))));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(TorusOfRevolution, Rejections)
{
    EXPECT_THROW(build_torus_of_revolution(1, 1, 16, 16), std::invalid_argument);
    EXPECT_THROW(build_torus_of_revolution(1, 2, 16, 16), std::invalid_argument);
    EXPECT_THROW(build_torus_of_revolution(2, 0, 16, 16), std::invalid_argument);
}

TEST(Geometry, MetricInverseAndRefinement)
{
    for (const auto& chart : {build_torus_of_revolution(2, 1, 32, 32), build_flat_torus(3, 5, 32, 32)}) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const Eigen::ArrayXd id = chart.g(i, 0) * chart.g_inv(0, j) + chart.g(i, 1) * chart.g_inv(1, j);
                EXPECT_LE((id - (i == j ? 1.0 : 0.0)).abs().maxCoeff(), 1e-12);
            }
        EXPECT_NEAR(integrate_scalar(chart, gaussian_curvature(chart)), 0.0, 1e-10);
    }
    const double a32 = build_torus_of_revolution(2, 1, 32, 32).area();
    const double a64 = build_torus_of_revolution(2, 1, 64, 64).area();
    EXPECT_LE(std::abs(a32 - a64), 1e-12);
}

TEST(Geometry, IntegrateCosine)
{
    const auto chart = build_flat_torus(2 * pi, 2 * pi, 16, 16);
    ScalarField f{chart.grid(), chart.theta().cos()};
    EXPECT_NEAR(integrate_scalar(chart, f), 0.0, 1e-14);
    ScalarField wrong = ScalarField::zeros(Grid{8, 8});
    EXPECT_THROW(integrate_scalar(chart, wrong), std::invalid_argument);
}

TEST(Geometry, CustomMetricRejectsSingular)
{
    const Grid grid{16, 16};
    MetricSamples m{grid, Eigen::ArrayXd::Ones(grid.size()), Eigen::ArrayXd::Ones(grid.size()),
                    Eigen::ArrayXd::Ones(grid.size())};
    EXPECT_THROW(SurfaceChart::from_metric(m), std::invalid_argument);
    m.g12.setZero();
    m.g22.setConstant(1e-13);
    EXPECT_THROW(SurfaceChart::from_metric(m), std::invalid_argument);
}

TEST(Geometry, CustomMetricMatchesBuiltIn)
{
    // Skewed flat metric: constant, so Γ = 0 and K = 0.
    const Grid grid{16, 16};
    MetricSamples m{grid, Eigen::ArrayXd::Constant(grid.size(), 2.0), Eigen::ArrayXd::Constant(grid.size(), 0.5),
                    Eigen::ArrayXd::Constant(grid.size(), 1.0)};
    const auto chart = SurfaceChart::from_metric(m, "skew");
    EXPECT_LE(chart.gauss_curvature().abs().maxCoeff(), 1e-14);
    EXPECT_NEAR(chart.area(), 4 * pi * pi * std::sqrt(1.75), 1e-12);
}
