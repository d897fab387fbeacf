#include "surfstokes/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include <Eigen/Dense>

#include "surfstokes/fieldcalc.hpp"
#include "surfstokes/parallel.hpp"

namespace surfstokes {

namespace {

using Arr = Eigen::ArrayXd;
using Complex = std::complex<double>;

// Per-node 2×2 matrices stored as four arrays, row-major.
struct NodeMatrix {
    Arr m00, m01, m10, m11;
};

// out = A T B for per-node matrices.
std::array<Arr, 4> sandwich(const NodeMatrix& a, const std::array<std::array<Arr, 2>, 2>& t, const NodeMatrix& b)
{
    const Arr at00 = a.m00 * t[0][0] + a.m01 * t[1][0];
    const Arr at01 = a.m00 * t[0][1] + a.m01 * t[1][1];
    const Arr at10 = a.m10 * t[0][0] + a.m11 * t[1][0];
    const Arr at11 = a.m10 * t[0][1] + a.m11 * t[1][1];
    return {at00 * b.m00 + at01 * b.m10, at00 * b.m01 + at01 * b.m11, at10 * b.m00 + at11 * b.m10,
            at10 * b.m01 + at11 * b.m11};
}

void require_divergence_free(const SurfaceChart& chart, const VectorField& u, const char* op)
{
    const double residual = divergence_residual(chart, u);
    const double scale = std::max(1.0, l2_norm(chart, u));
    if (!(residual <= kStokesDivergenceTol * scale)) {
        throw std::invalid_argument(std::string(op) + ": input is not divergence free (divergence residual " +
                                    std::to_string(residual) + ")");
    }
}

double max_abs_entry(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd gram(const Eigen::MatrixXd& x)
{
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    return g.selfadjointView<Eigen::Lower>();
}

}  // namespace

VectorField tensor_divergence(const SurfaceChart& chart, const TensorField& t)
{
    if (t.variance != Variance::Covariant02)
        throw std::invalid_argument("tensor_divergence: expected a (0,2) tensor");
    require_same_grid(chart.grid(), t.grid, "tensor_divergence");
    const double scale = std::max({t.comp[0][1].abs().maxCoeff(), t.comp[0][0].abs().maxCoeff(),
                                   t.comp[1][1].abs().maxCoeff(), 1.0});
    if ((t.comp[0][1] - t.comp[1][0]).abs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("tensor_divergence: tensor is not symmetric");
    return covariant_divergence(chart, t);
}

VectorField apply_stokes_div_form(const HelmholtzProjector& projector, double mu_s, const VectorField& u)
{
    const SurfaceChart& chart = projector.chart();
    require_same_grid(chart.grid(), u.grid, "apply_stokes_div_form");
    require_divergence_free(chart, u, "apply_stokes_div_form");
    VectorField out = projector.project(tensor_divergence(chart, deformation(chart, u)));
    out *= -2.0 * mu_s;
    return out;
}

VectorField apply_stokes_div_form(const SurfaceChart& chart, double mu_s, const VectorField& u)
{
    return apply_stokes_div_form(HelmholtzProjector(chart), mu_s, u);
}

VectorField apply_stokes_bochner_form(const HelmholtzProjector& projector, double mu_s, const VectorField& u)
{
    const SurfaceChart& chart = projector.chart();
    require_same_grid(chart.grid(), u.grid, "apply_stokes_bochner_form");
    require_divergence_free(chart, u, "apply_stokes_bochner_form");
    VectorField lu = bochner_laplacian(chart, u);
    for (int i = 0; i < 2; ++i) lu.comp[i] += chart.gauss_curvature() * u.comp[i];
    VectorField out = projector.project(lu);
    out *= -mu_s;
    return out;
}

VectorField apply_stokes_bochner_form(const SurfaceChart& chart, double mu_s, const VectorField& u)
{
    return apply_stokes_bochner_form(HelmholtzProjector(chart), mu_s, u);
}

// ---------------------------------------------------------------------------

MetricFrames::MetricFrames(const SurfaceChart& chart) : grid_(chart.grid())
{
    sqrt_w_ = chart.area_weights().sqrt();
    l00_ = chart.g(0, 0).sqrt();
    l10_ = chart.g(0, 1) / l00_;
    l11_ = (chart.g(1, 1) - l10_ * l10_).sqrt();
}

void MetricFrames::whiten_vector(const VectorField& u, Eigen::Ref<Eigen::VectorXd> out) const
{
    const auto n = static_cast<Eigen::Index>(grid_.size());
    out.head(n) = (sqrt_w_ * (l00_ * u.comp[0] + l10_ * u.comp[1])).matrix();
    out.tail(n) = (sqrt_w_ * l11_ * u.comp[1]).matrix();
}

VectorField MetricFrames::unwhiten_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    const auto n = static_cast<Eigen::Index>(grid_.size());
    VectorField u{grid_, {}};
    u.comp[1] = x.tail(n).array() / (sqrt_w_ * l11_);
    u.comp[0] = (x.head(n).array() / sqrt_w_ - l10_ * u.comp[1]) / l00_;
    return u;
}

void MetricFrames::whiten_mixed(const TensorField& t, Eigen::Ref<Eigen::VectorXd> out) const
{
    if (t.variance != Variance::Mixed11) throw std::invalid_argument("whiten_mixed: expected a (1,1) tensor");
    // Lᵀ T L⁻ᵀ; Lᵀ = [[l00, l10], [0, l11]].
    const Arr zero = Arr::Zero(l00_.size());
    const NodeMatrix lt{l00_, l10_, zero, l11_};
    const NodeMatrix lit{1.0 / l00_, -l10_ / (l00_ * l11_), zero, 1.0 / l11_};
    const auto m = sandwich(lt, t.comp, lit);
    const auto n = static_cast<Eigen::Index>(grid_.size());
    for (int c = 0; c < 4; ++c) out.segment(c * n, n) = (sqrt_w_ * m[c]).matrix();
}

void MetricFrames::whiten_symmetric(const TensorField& t, Eigen::Ref<Eigen::VectorXd> out) const
{
    if (t.variance != Variance::Covariant02)
        throw std::invalid_argument("whiten_symmetric: expected a (0,2) tensor");
    // L⁻¹ T L⁻ᵀ
    const Arr zero = Arr::Zero(l00_.size());
    const NodeMatrix li{1.0 / l00_, zero, -l10_ / (l00_ * l11_), 1.0 / l11_};
    const NodeMatrix lit{1.0 / l00_, -l10_ / (l00_ * l11_), zero, 1.0 / l11_};
    const auto m = sandwich(li, t.comp, lit);
    const auto n = static_cast<Eigen::Index>(grid_.size());
    out.segment(0, n) = (sqrt_w_ * m[0]).matrix();
    out.segment(n, n) = (sqrt_w_ * std::numbers::sqrt2 * 0.5 * (m[1] + m[2])).matrix();
    out.segment(2 * n, n) = (sqrt_w_ * m[3]).matrix();
}

// ---------------------------------------------------------------------------

DivFreeBasis::DivFreeBasis(const SurfaceChart& chart, double tol) : chart_(chart), frames_(chart)
{
    if (!(tol > 0.0)) throw std::invalid_argument("divfree_basis: tolerance must be positive");
    const Grid& grid = chart.grid();
    const int nt = grid.n_theta, np = grid.n_phi;
    const int kt_max = nt / 2 - 1, kp_max = np / 2 - 1;

    std::vector<std::pair<int, int>> modes;
    for (int kt = 0; kt <= kt_max; ++kt)
        for (int kp = -kp_max; kp <= kp_max; ++kp)
            if (kt > 0 || kp > 0) modes.emplace_back(kt, kp);
    std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
        return std::make_tuple(a.first * a.first + a.second * a.second, a.first, a.second) <
               std::make_tuple(b.first * b.first + b.second * b.second, b.first, b.second);
    });

    const auto n = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index dim = 2 + 2 * static_cast<Eigen::Index>(modes.size());
    columns_.resize(2 * n, dim);

    const Arr inv_sg = 1.0 / chart.area_density();
    // Harmonic fields ε c/√g for c = e_θ, e_φ.
    frames_.whiten_vector(VectorField{grid, {Arr::Zero(n), -inv_sg}}, columns_.col(0));
    frames_.whiten_vector(VectorField{grid, {inv_sg, Arr::Zero(n)}}, columns_.col(1));

    // ψ = cos(k·x)/|k| and sin(k·x)/|k|; ε∇ψ/√g = (∂_φψ, −∂_θψ)/√g.
    const Arr& th = chart.theta();
    const Arr& ph = chart.phi();
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const auto [kt, kp] = modes[m];
        const double norm = std::hypot(kt, kp);
        const Arr arg = kt * th + kp * ph;
        const Arr c = arg.cos() / norm, s = arg.sin() / norm;
        const auto col = 2 + 2 * static_cast<Eigen::Index>(m);
        // ∂(cos) = −k sin, ∂(sin) = k cos
        frames_.whiten_vector(VectorField{grid, {-kp * s * inv_sg, kt * s * inv_sg}}, columns_.col(col));
        frames_.whiten_vector(VectorField{grid, {kp * c * inv_sg, -kt * c * inv_sg}}, columns_.col(col + 1));
    }

    // Two rounds of Cholesky orthonormalization.
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd g = gram(columns_);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
        const Eigen::VectorXd d = ldlt.vectorD();
        if (ldlt.info() != Eigen::Success || !(d.minCoeff() > tol * tol * d.maxCoeff()))
            throw std::runtime_error("divfree_basis: rank deficiency in the divergence-free span");
        const Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("divfree_basis: rank deficiency in the divergence-free span");
        llt.matrixU().solveInPlace<Eigen::OnTheRight>(columns_);
    }
    defect_ = max_abs_entry(gram(columns_) - Eigen::MatrixXd::Identity(dim, dim));
    if (defect_ > tol) throw std::runtime_error("divfree_basis: orthonormalization failed");
}

VectorField DivFreeBasis::field(Eigen::Index a) const { return frames_.unwhiten_vector(columns_.col(a)); }

VectorField DivFreeBasis::synthesize(const Eigen::Ref<const Eigen::VectorXd>& coefficients) const
{
    if (coefficients.size() != size()) throw std::invalid_argument("synthesize: coefficient count mismatch");
    return frames_.unwhiten_vector(columns_ * coefficients);
}

Eigen::VectorXd DivFreeBasis::coefficients(const VectorField& v) const
{
    require_same_grid(chart_.grid(), v.grid, "basis coefficients");
    Eigen::VectorXd x(columns_.rows());
    frames_.whiten_vector(v, x);
    return columns_.transpose() * x;
}

std::shared_ptr<const DivFreeBasis> divfree_basis(const SurfaceChart& chart, double tol)
{
    return std::make_shared<const DivFreeBasis>(chart, tol);
}

// ---------------------------------------------------------------------------

OperatorMatrix assemble_operator(const SurfaceChart& chart, double mu_s, std::shared_ptr<const DivFreeBasis> basis,
                                 int threads)
{
    if (!basis) throw std::invalid_argument("assemble_operator: missing basis");
    if (!(mu_s > 0.0)) throw std::invalid_argument("assemble_operator: mu_s must be positive");
    require_same_grid(chart.grid(), basis->chart().grid(), "assemble_operator");
    const Eigen::Index dim = basis->size();
    // Basis fields already lie in the range of the (self-adjoint) projection,
    // so (P y | b_a) = (y | b_a) and the projection can be skipped.
    Eigen::MatrixXd images(basis->columns().rows(), dim);
    parallel_for(static_cast<std::size_t>(dim), threads, [&](std::size_t a) {
        const auto col = static_cast<Eigen::Index>(a);
        const VectorField b = basis->field(col);
        VectorField y = bochner_laplacian(chart, b);
        for (int i = 0; i < 2; ++i) y.comp[i] = -mu_s * (y.comp[i] + chart.gauss_curvature() * b.comp[i]);
        basis->frames().whiten_vector(y, images.col(col));
    });
    OperatorMatrix op;
    op.basis = std::move(basis);
    op.mu_s = mu_s;
    op.entries = op.basis->columns().transpose() * images;
    const double scale = max_abs_entry(op.entries);
    op.asymmetry = scale > 0.0 ? max_abs_entry(op.entries - op.entries.transpose()) / scale : 0.0;
    if (op.asymmetry > 1e-6)
        throw std::runtime_error("assemble_operator: assembled matrix is not symmetric (relative asymmetry " +
                                 std::to_string(op.asymmetry) + ")");
    op.symmetric = op.asymmetry <= 1e-8;
    return op;
}

KernelSplit split_kernel(const Eigen::VectorXd& ascending)
{
    KernelSplit split;
    const Eigen::Index n = ascending.size();
    if (n == 0) return split;
    const Eigen::Index decile = std::max<Eigen::Index>(1, (n + 9) / 10);
    std::vector<double> top(ascending.data() + (n - decile), ascending.data() + n);
    std::sort(top.begin(), top.end());
    const double median =
        decile % 2 == 1 ? top[decile / 2] : 0.5 * (top[decile / 2 - 1] + top[decile / 2]);
    split.threshold = kKernelRelativeThreshold * median;
    while (split.dimension < n && std::abs(ascending(split.dimension)) <= split.threshold) ++split.dimension;
    double kernel_max = 0.0;
    for (Eigen::Index i = 0; i < split.dimension; ++i) kernel_max = std::max(kernel_max, std::abs(ascending(i)));
    if (split.dimension < n) {
        split.first_nonzero = ascending(split.dimension);
        split.gap_ratio = kernel_max > 0.0 ? split.first_nonzero / kernel_max
                                           : std::numeric_limits<double>::infinity();
    }
    return split;
}

Spectrum spectrum(const OperatorMatrix& op)
{
    if (!op.symmetric && op.asymmetry > 1e-6) throw std::invalid_argument("spectrum: operator is not symmetric");
    const Eigen::MatrixXd sym = 0.5 * (op.entries + op.entries.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
    Spectrum out;
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    out.spectral_bound = -out.eigenvalues(0);
    out.kernel = split_kernel(out.eigenvalues);
    return out;
}

// ---------------------------------------------------------------------------

FormGrams form_grams(const DivFreeBasis& basis, int threads)
{
    const SurfaceChart& chart = basis.chart();
    const auto n = static_cast<Eigen::Index>(chart.grid().size());
    const Eigen::Index dim = basis.size();
    FormGrams out;
    {
        Eigen::MatrixXd x(3 * n, dim);
        parallel_for(static_cast<std::size_t>(dim), threads, [&](std::size_t a) {
            const auto col = static_cast<Eigen::Index>(a);
            basis.frames().whiten_symmetric(deformation(chart, basis.field(col)), x.col(col));
        });
        out.deformation = gram(x);
    }
    {
        Eigen::MatrixXd x(4 * n, dim);
        parallel_for(static_cast<std::size_t>(dim), threads, [&](std::size_t a) {
            const auto col = static_cast<Eigen::Index>(a);
            basis.frames().whiten_mixed(covariant_derivative(chart, basis.field(col)), x.col(col));
        });
        out.gradient = gram(x);
    }
    return out;
}

KillingBasis killing_fields(std::shared_ptr<const DivFreeBasis> basis, const FormGrams& grams, double tol)
{
    if (!basis) throw std::invalid_argument("killing_fields: missing basis");
    const Eigen::MatrixXd form = 2.0 * grams.deformation;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form);
    if (es.info() != Eigen::Success) throw std::runtime_error("killing_fields: eigensolver failed");
    KillingBasis kb;
    kb.form_eigenvalues = es.eigenvalues();
    kb.kernel = split_kernel(kb.form_eigenvalues);
    if (tol > 0.0) {
        // Caller supplied relative threshold replaces the default factor.
        const Eigen::VectorXd& ev = kb.form_eigenvalues;
        kb.kernel.threshold *= tol / kKernelRelativeThreshold;
        Eigen::Index dim = 0;
        while (dim < ev.size() && std::abs(ev(dim)) <= kb.kernel.threshold) ++dim;
        double kernel_max = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) kernel_max = std::max(kernel_max, std::abs(ev(i)));
        kb.kernel.dimension = dim;
        if (dim < ev.size()) {
            kb.kernel.first_nonzero = ev(dim);
            kb.kernel.gap_ratio =
                kernel_max > 0.0 ? ev(dim) / kernel_max : std::numeric_limits<double>::infinity();
        }
    }
    if (kb.kernel.dimension > 0 && kb.kernel.gap_ratio < kRequiredSpectralGap) {
        throw std::runtime_error("killing_fields: ambiguous spectral gap (ratio " +
                                 std::to_string(kb.kernel.gap_ratio) + "); refine the grid");
    }
    kb.coefficients = es.eigenvectors().leftCols(kb.kernel.dimension);
    for (Eigen::Index j = 0; j < kb.coefficients.cols(); ++j) {
        auto col = kb.coefficients.col(j);
        Eigen::Index big = 0;
        col.cwiseAbs().maxCoeff(&big);
        if (col(big) < 0.0) col = -col;
        kb.fields.push_back(basis->synthesize(col));
    }
    return kb;
}

KillingBasis killing_fields(const SurfaceChart& chart, double tol, int threads)
{
    auto basis = divfree_basis(chart);
    const FormGrams grams = form_grams(*basis, threads);
    return killing_fields(std::move(basis), grams, tol);
}

VectorField project_onto_equilibria(const SurfaceChart& chart, const VectorField& u, const KillingBasis& kb)
{
    require_same_grid(chart.grid(), u.grid, "project_onto_equilibria");
    VectorField out = VectorField::zeros(u.grid);
    for (const auto& z : kb.fields) out = axpy(l2_inner(chart, u, z), z, std::move(out));
    return out;
}

double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.rows() != b.rows()) throw std::invalid_argument("subspace_angle: dimension mismatch");
    if (a.cols() == 0 && b.cols() == 0) return 0.0;
    if (a.cols() != b.cols()) return std::numbers::pi / 2;
    const Eigen::MatrixXd residual = b - a * (a.transpose() * b);
    const double s = residual.cols() > 0 ? residual.jacobiSvd().singularValues()(0) : 0.0;
    return std::asin(std::min(1.0, s));
}

// ---------------------------------------------------------------------------

double default_shift(const Spectrum& spec)
{
    return spec.spectral_bound + 0.1 * spec.kernel.first_nonzero;
}

std::vector<Eigen::VectorXd> random_probes(Eigen::Index dimension, int count, Rng& rng)
{
    std::vector<Eigen::VectorXd> out;
    for (int p = 0; p < count; ++p) {
        Eigen::VectorXd f(dimension);
        for (Eigen::Index i = 0; i < dimension; ++i) f(i) = rng.normal();
        out.push_back(f / f.norm());
    }
    return out;
}

ResolventTable resolvent_probe(const OperatorMatrix& op, const Spectrum& spec, double omega, double angle,
                               const std::vector<double>& magnitudes, const std::vector<Eigen::VectorXd>& probes)
{
    if (!(omega > spec.spectral_bound))
        throw std::invalid_argument("resolvent_probe: omega must exceed the spectral bound");
    if (!(angle > 0.0 && angle < std::numbers::pi / 2))
        throw std::invalid_argument("resolvent_probe: angle must lie in (0, pi/2)");
    if (probes.empty()) throw std::invalid_argument("resolvent_probe: no probe vectors");
    const Eigen::Index dim = op.entries.rows();
    for (const auto& f : probes)
        if (f.size() != dim || !(f.norm() > 0.0)) throw std::invalid_argument("resolvent_probe: bad probe vector");

    ResolventTable table;
    table.omega = omega;
    table.angle = angle;
    table.min_q = std::numeric_limits<double>::infinity();
    const Eigen::MatrixXcd a = op.entries.cast<Complex>();
    const Eigen::MatrixXcd vectors = spec.eigenvectors.cast<Complex>();

    for (const double m : magnitudes) {
        if (!(m > 0.0)) throw std::invalid_argument("resolvent_probe: magnitudes must be positive");
        double best = 0.0;
        for (const double sign : {1.0, -1.0}) {
            const Complex lambda = std::polar(m, sign * (std::numbers::pi - angle));
            const Complex shift = lambda + omega;
            Eigen::MatrixXcd z = a;
            z.diagonal().array() += shift;
            const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(z);
            if (!(lu.rcond() > 1e-14)) throw std::runtime_error("resolvent_probe: shifted matrix is singular");
            ResolventSample sample{lambda, 0.0, 0.0};
            for (const auto& f : probes) {
                const Eigen::VectorXcd fc = (f / f.norm()).cast<Complex>();
                const double q = (m + 1.0) * lu.solve(fc).norm();
                const Eigen::VectorXcd c = vectors.adjoint() * fc;
                const Eigen::VectorXcd denom = (spec.eigenvalues.cast<Complex>().array() + shift).matrix();
                const double q_oracle = (m + 1.0) * c.cwiseQuotient(denom).norm();
                sample.q = std::max(sample.q, q);
                sample.q_oracle = std::max(sample.q_oracle, q_oracle);
                table.max_oracle_mismatch = std::max(table.max_oracle_mismatch, std::abs(q - q_oracle) / q_oracle);
            }
            best = std::max(best, sample.q);
            table.samples.push_back(sample);
        }
        table.max_q = std::max(table.max_q, best);
        table.min_q = std::min(table.min_q, best);
    }
    if (magnitudes.empty()) table.min_q = 0.0;
    return table;
}

}  // namespace surfstokes
