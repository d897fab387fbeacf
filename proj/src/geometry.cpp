#include "surfstokes/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "surfstokes/fields.hpp"

namespace surfstokes {

namespace {

constexpr double kMaxCondition = 1e12;

void check_metric(const MetricSamples& m)
{
    validate_grid(m.grid);
    const auto n = static_cast<Eigen::Index>(m.grid.size());
    if (m.g11.size() != n || m.g12.size() != n || m.g22.size() != n)
        throw std::invalid_argument("metric samples do not match grid " + to_string(m.grid));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = m.g11[i], b = m.g12[i], c = m.g22[i];
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            throw std::invalid_argument("metric has non-finite entries at node " + std::to_string(i));
        const double half_tr = 0.5 * (a + c);
        const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        const double lo = half_tr - disc, hi = half_tr + disc;
        if (!(lo > 0.0))
            throw std::invalid_argument("metric is not positive definite at node " + std::to_string(i));
        if (hi / lo > kMaxCondition)
            throw std::invalid_argument("metric is near-singular (condition number > 1e12) at node " +
                                        std::to_string(i));
    }
}

std::array<std::array<Eigen::ArrayXd, 2>, 2> as_matrix(const MetricSamples& m)
{
    return {{{m.g11, m.g12}, {m.g12, m.g22}}};
}

}  // namespace

ChristoffelSamples christoffel_from_metric(const MetricSamples& metric)
{
    check_metric(metric);
    const auto ops = spectral_ops(metric.grid);
    const auto g = as_matrix(metric);
    const Eigen::ArrayXd det = metric.g11 * metric.g22 - metric.g12 * metric.g12;
    const std::array<std::array<Eigen::ArrayXd, 2>, 2> ginv{{{metric.g22 / det, -metric.g12 / det},
                                                             {-metric.g12 / det, metric.g11 / det}}};

    // dg[l][i][j] = ∂_l g_ij
    std::array<std::array<std::array<Eigen::ArrayXd, 2>, 2>, 2> dg;
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            ops->gradient(g[i][j], dg[0][i][j], dg[1][i][j]);
            dg[0][j][i] = dg[0][i][j];
            dg[1][j][i] = dg[1][i][j];
        }
    }

    ChristoffelSamples gamma;
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
            for (int j = i; j < 2; ++j) {
                Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(det.size());
                for (int l = 0; l < 2; ++l) acc += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                gamma[k][i][j] = 0.5 * acc;
                gamma[k][j][i] = gamma[k][i][j];
            }
        }
    }
    return gamma;
}

Eigen::ArrayXd gaussian_curvature(const MetricSamples& metric, const ChristoffelSamples& G)
{
    const auto ops = spectral_ops(metric.grid);
    // R^a_{1 0 1} = ∂_0 Γ^a_11 − ∂_1 Γ^a_10 + Γ^a_0m Γ^m_11 − Γ^a_1m Γ^m_10
    std::array<Eigen::ArrayXd, 2> riemann;
    for (int a = 0; a < 2; ++a) {
        Eigen::ArrayXd r = ops->d_theta(G[a][1][1]) - ops->d_phi(G[a][1][0]);
        for (int m = 0; m < 2; ++m) r += G[a][0][m] * G[m][1][1] - G[a][1][m] * G[m][1][0];
        riemann[a] = std::move(r);
    }
    const Eigen::ArrayXd r0101 = metric.g11 * riemann[0] + metric.g12 * riemann[1];
    const Eigen::ArrayXd det = metric.g11 * metric.g22 - metric.g12 * metric.g12;
    return r0101 / det;
}

SurfaceChart SurfaceChart::from_metric(const MetricSamples& metric, std::string name)
{
    check_metric(metric);
    auto d = std::make_shared<Data>();
    d->name = std::move(name);
    d->grid = metric.grid;
    d->spectral = spectral_ops(metric.grid);
    d->g = as_matrix(metric);
    const Eigen::ArrayXd det = metric.g11 * metric.g22 - metric.g12 * metric.g12;
    d->g_inv = {{{metric.g22 / det, -metric.g12 / det}, {-metric.g12 / det, metric.g11 / det}}};
    d->sqrt_det = det.sqrt();
    d->weights = metric.grid.cell_area() * d->sqrt_det;
    d->area = d->weights.sum();
    d->christoffel = christoffel_from_metric(metric);
    d->gauss = gaussian_curvature(metric, d->christoffel);

    const Grid& grid = metric.grid;
    d->theta.resize(grid.size());
    d->phi.resize(grid.size());
    for (int j = 0; j < grid.n_theta; ++j) {
        for (int l = 0; l < grid.n_phi; ++l) {
            d->theta[grid.index(j, l)] = grid.theta(j);
            d->phi[grid.index(j, l)] = grid.phi(l);
        }
    }
    const double ht = 2.0 * std::numbers::pi / grid.n_theta;
    const double hp = 2.0 * std::numbers::pi / grid.n_phi;
    d->min_spacing = std::min((metric.g11.sqrt() * ht).minCoeff(), (metric.g22.sqrt() * hp).minCoeff());
    return SurfaceChart(std::move(d));
}

SurfaceChart SurfaceChart::scaled(double factor) const
{
    if (!(factor > 0.0)) throw std::invalid_argument("metric scale factor must be positive");
    MetricSamples m{grid(), factor * g(0, 0), factor * g(0, 1), factor * g(1, 1)};
    return from_metric(m, name() + " (scaled)");
}

SurfaceChart build_flat_torus(double L1, double L2, int n_theta, int n_phi)
{
    if (!(L1 > 0.0)) throw std::invalid_argument("L1 must be positive");
    if (!(L2 > 0.0)) throw std::invalid_argument("L2 must be positive");
    const Grid grid{n_theta, n_phi};
    validate_grid(grid);
    const double s1 = L1 / (2.0 * std::numbers::pi);
    const double s2 = L2 / (2.0 * std::numbers::pi);
    const auto n = static_cast<Eigen::Index>(grid.size());
    MetricSamples m{grid, Eigen::ArrayXd::Constant(n, s1 * s1), Eigen::ArrayXd::Zero(n),
                    Eigen::ArrayXd::Constant(n, s2 * s2)};
    return SurfaceChart::from_metric(m, "flat_torus");
}

SurfaceChart build_torus_of_revolution(double R, double r, int n_theta, int n_phi)
{
    if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
    if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
    if (!(R > r)) throw std::invalid_argument("R must exceed r (otherwise the torus self-intersects)");
    const Grid grid{n_theta, n_phi};
    validate_grid(grid);
    const auto n = static_cast<Eigen::Index>(grid.size());
    MetricSamples m{grid, Eigen::ArrayXd::Constant(n, r * r), Eigen::ArrayXd::Zero(n), Eigen::ArrayXd(n)};
    for (int j = 0; j < n_theta; ++j) {
        const double rho = R + r * std::cos(grid.theta(j));
        for (int l = 0; l < n_phi; ++l) m.g22[grid.index(j, l)] = rho * rho;
    }
    return SurfaceChart::from_metric(m, "torus_of_revolution");
}

ScalarField gaussian_curvature(const SurfaceChart& chart) { return {chart.grid(), chart.gauss_curvature()}; }

double integrate_scalar(const SurfaceChart& chart, const Eigen::ArrayXd& f)
{
    if (static_cast<std::size_t>(f.size()) != chart.grid().size())
        throw std::invalid_argument("integrate_scalar: shape mismatch");
    return (f * chart.area_weights()).sum();
}

double integrate_scalar(const SurfaceChart& chart, const ScalarField& f)
{
    require_same_grid(chart.grid(), f.grid, "integrate_scalar");
    return integrate_scalar(chart, f.values);
}

}  // namespace surfstokes
