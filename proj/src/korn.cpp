#include "surfstokes/korn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "surfstokes/fieldcalc.hpp"

namespace surfstokes {

KornResult korn_constant(const DivFreeBasis& basis, const FormGrams& grams, const KillingBasis& kb,
                         const std::vector<VectorField>& excluded)
{
    const Eigen::Index dim = basis.size();
    Eigen::MatrixXd removed(dim, kb.coefficients.cols() + static_cast<Eigen::Index>(excluded.size()));
    removed.leftCols(kb.coefficients.cols()) = kb.coefficients;
    for (std::size_t e = 0; e < excluded.size(); ++e)
        removed.col(kb.coefficients.cols() + static_cast<Eigen::Index>(e)) = basis.coefficients(excluded[e]);

    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(dim, dim);
    if (removed.cols() > 0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(removed);
        const Eigen::MatrixXd q = qr.householderQ();
        z = q.rightCols(dim - qr.rank());
    }

    const Eigen::MatrixXd a = z.transpose() * grams.deformation * z;
    Eigen::MatrixXd h1 = grams.gradient;
    h1.diagonal().array() += 1.0;
    const Eigen::MatrixXd b = z.transpose() * h1 * z;

    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b);
    if (es.info() != Eigen::Success) throw std::runtime_error("korn_constant: eigensolver failed");
    KornResult out;
    out.lambda_min = es.eigenvalues()(0);
    out.complement_dimension = z.cols();
    if (!(out.lambda_min > 1e-10)) {
        throw std::runtime_error("korn_constant: Killing field leaked into complement (lambda_min " +
                                 std::to_string(out.lambda_min) + ")");
    }
    out.constant = 1.0 / std::sqrt(out.lambda_min);
    out.minimizer = z * es.eigenvectors().col(0);
    return out;
}

double korn_constant(const SurfaceChart& chart, const KillingBasis& kb, const DivFreeBasis& basis)
{
    require_same_grid(chart.grid(), basis.chart().grid(), "korn_constant");
    return korn_constant(basis, form_grams(basis), kb).constant;
}

KornSampleReport korn_intermediate_check(const SurfaceChart& chart, int sample_count, std::uint64_t seed)
{
    if (sample_count < 10) throw std::invalid_argument("korn_intermediate_check: need at least 10 samples");
    const HelmholtzProjector projector(chart);
    Rng rng(seed);
    KornSampleReport report;
    report.samples = sample_count;
    for (int s = 0; s < sample_count; ++s) {
        const VectorField u = random_divfree_field(projector, rng);
        const double l2 = l2_inner(chart, u, u);
        const double grad = gradient_norm_sq(chart, u);
        const double def = deformation_norm_sq(chart, u);
        const double h1 = l2 + grad;
        const double curvature = integrate_scalar(chart, chart.gauss_curvature() * pointwise_inner(chart, u, u));
        report.max_ratio = std::max(report.max_ratio, h1 / (def + l2));
        report.max_identity_residual =
            std::max(report.max_identity_residual, std::abs(2.0 * def - grad + curvature) / h1);
    }
    return report;
}

double korn_sample_ratio(const SurfaceChart& chart, const KillingBasis& kb, int sample_count, std::uint64_t seed)
{
    const HelmholtzProjector projector(chart);
    Rng rng(seed);
    double worst = 0.0;
    for (int s = 0; s < sample_count; ++s) {
        VectorField v = random_divfree_field(projector, rng);
        v -= project_onto_equilibria(chart, v, kb);
        worst = std::max(worst, std::sqrt((l2_inner(chart, v, v) + gradient_norm_sq(chart, v)) /
                                          deformation_norm_sq(chart, v)));
    }
    return worst;
}

}  // namespace surfstokes
