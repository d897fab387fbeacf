#pragma once

#include <array>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "surfstokes/grid.hpp"
#include "surfstokes/spectral.hpp"

namespace surfstokes {

struct ScalarField;

/// Metric samples g_11, g_12, g_22 on a grid.
struct MetricSamples {
    Grid grid;
    Eigen::ArrayXd g11, g12, g22;
};

/// Γ^k_ij per node, indexed [k][i][j]; symmetric in (i,j) by construction.
using ChristoffelSamples = std::array<std::array<std::array<Eigen::ArrayXd, 2>, 2>, 2>;

/// A closed surface described by one doubly periodic metric chart on
/// [0,2π)² together with its derived geometry.
///
/// The chart is an immutable value with shared internals, so copies are cheap
/// and may be handed to other threads.
class SurfaceChart {
public:
    /// Builds a chart from user supplied metric samples.
    static SurfaceChart from_metric(const MetricSamples& metric, std::string name = "custom");

    const std::string& name() const { return data_->name; }
    const Grid& grid() const { return data_->grid; }
    const SpectralOps& spectral() const { return *data_->spectral; }

    /// Covariant metric g_ij (i,j in {0,1}).
    const Eigen::ArrayXd& g(int i, int j) const { return data_->g[i][j]; }
    /// Inverse metric g^ij.
    const Eigen::ArrayXd& g_inv(int i, int j) const { return data_->g_inv[i][j]; }
    /// √det g.
    const Eigen::ArrayXd& area_density() const { return data_->sqrt_det; }
    /// Γ^k_ij.
    const Eigen::ArrayXd& christoffel(int k, int i, int j) const { return data_->christoffel[k][i][j]; }
    const ChristoffelSamples& christoffel() const { return data_->christoffel; }
    const Eigen::ArrayXd& gauss_curvature() const { return data_->gauss; }

    /// Rectangle-rule weight per node times √g: ∫ f dΣ ≈ Σ f·weights.
    const Eigen::ArrayXd& area_weights() const { return data_->weights; }

    /// Coordinates of every node, in storage order.
    const Eigen::ArrayXd& theta() const { return data_->theta; }
    const Eigen::ArrayXd& phi() const { return data_->phi; }

    double area() const { return data_->area; }

    /// Smallest physical spacing between neighbouring nodes along a coordinate line.
    double min_spacing() const { return data_->min_spacing; }

    /// Same metric sampled on the same grid, scaled by a positive constant.
    SurfaceChart scaled(double factor) const;

private:
    struct Data {
        std::string name;
        Grid grid;
        std::shared_ptr<const SpectralOps> spectral;
        std::array<std::array<Eigen::ArrayXd, 2>, 2> g, g_inv;
        Eigen::ArrayXd sqrt_det, weights, gauss, theta, phi;
        ChristoffelSamples christoffel;
        double area = 0.0;
        double min_spacing = 0.0;
    };
    explicit SurfaceChart(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
    std::shared_ptr<const Data> data_;
};

/// Flat torus with side lengths L1, L2: g = diag((L1/2π)², (L2/2π)²).
SurfaceChart build_flat_torus(double L1, double L2, int n_theta, int n_phi);

/// Torus of revolution with tube radius r around a circle of radius R:
/// g = diag(r², (R + r cos θ)²).
SurfaceChart build_torus_of_revolution(double R, double r, int n_theta, int n_phi);

/// Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij) with spectral derivatives.
/// Throws std::invalid_argument if the metric is not SPD or its condition
/// number exceeds 1e12 anywhere.
ChristoffelSamples christoffel_from_metric(const MetricSamples& metric);

/// Gaussian curvature from the Gauss equation K = R_1212 / det g, with the
/// Riemann tensor built from spectrally differentiated Christoffel symbols.
Eigen::ArrayXd gaussian_curvature(const MetricSamples& metric, const ChristoffelSamples& christoffel);
ScalarField gaussian_curvature(const SurfaceChart& chart);

/// ∫_Σ f dΣ by the rectangle rule, spectrally accurate for smooth periodic f.
double integrate_scalar(const SurfaceChart& chart, const ScalarField& f);
double integrate_scalar(const SurfaceChart& chart, const Eigen::ArrayXd& f);

}  // namespace surfstokes
