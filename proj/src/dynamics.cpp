#include "surfstokes/dynamics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "surfstokes/fieldcalc.hpp"

namespace surfstokes {

namespace {

constexpr double kPostStepDivergenceTol = 1e-6;
constexpr double kImplicitRelTol = 1e-12;
constexpr int kImplicitMaxIterations = 500;

VectorField dealiased(const SurfaceChart& chart, const VectorField& u, bool on) { return on ? dealias(chart, u) : u; }

}  // namespace

std::string to_string(SurfaceKind kind)
{
    return kind == SurfaceKind::FlatTorus ? "flat_torus" : "torus_of_revolution";
}

std::string to_string(Integrator integrator) { return integrator == Integrator::Imex1 ? "imex1" : "imex2"; }

void validate(const SimConfig& c)
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    if (c.surface == SurfaceKind::FlatTorus) {
        positive(c.L1, "L1");
        positive(c.L2, "L2");
    } else {
        positive(c.R, "R");
        positive(c.r, "r");
        if (!(c.R > c.r)) throw std::invalid_argument("R must exceed r");
    }
    validate_grid(Grid{c.n_theta, c.n_phi});
    positive(c.mu_s, "mu_s");
    positive(c.rho, "rho");
    positive(c.dt, "dt");
    positive(c.t_end, "t_end");
    if (c.sample_every < 1) throw std::invalid_argument("sample_every must be at least 1");
}

SurfaceChart build_chart(const SimConfig& c)
{
    return c.surface == SurfaceKind::FlatTorus ? build_flat_torus(c.L1, c.L2, c.n_theta, c.n_phi)
                                               : build_torus_of_revolution(c.R, c.r, c.n_theta, c.n_phi);
}

VectorField nonlinearity(const HelmholtzProjector& projector, const VectorField& u, bool dealias_product)
{
    const SurfaceChart& chart = projector.chart();
    const VectorField uf = dealiased(chart, u, dealias_product);
    VectorField f = projector.project(dealiased(chart, advect(chart, uf, uf), dealias_product));
    f *= -1.0;
    return f;
}

double dt_max(const SurfaceChart& chart, const VectorField& u)
{
    const double speed = std::sqrt(pointwise_inner(chart, u, u).maxCoeff());
    if (!(speed > 0.0)) return std::numeric_limits<double>::infinity();
    return 0.5 * chart.min_spacing() / speed;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const SimConfig& config, SurfaceChart chart, std::shared_ptr<const OperatorMatrix> op,
                 std::shared_ptr<const KillingBasis> kb)
    : config_(config), chart_(std::move(chart)), projector_(chart_), op_(std::move(op)), kb_(std::move(kb)),
      nu_(config.mu_s / config.rho)
{
    validate(config_);
    if (op_) require_same_grid(chart_.grid(), op_->basis->chart().grid(), "stepper operator");
}

VectorField Stepper::apply_operator(const VectorField& u) const
{
    VectorField lu = bochner_laplacian(chart_, u);
    for (int i = 0; i < 2; ++i) lu.comp[i] += chart_.gauss_curvature() * u.comp[i];
    VectorField out = projector_.project(lu);
    out *= -nu_;
    return out;
}

VectorField Stepper::implicit_solve(const VectorField& rhs, double tau) const
{
    // CG for (I + τA)x = rhs on divergence-free fields.
    auto apply = [&](const VectorField& x) { return axpy(tau, apply_operator(x), x); };
    VectorField x = rhs;
    VectorField r = rhs - apply(x);
    VectorField p = r;
    double rr = l2_inner(chart_, r, r);
    const double target = kImplicitRelTol * kImplicitRelTol * std::max(l2_inner(chart_, rhs, rhs), 1e-300);
    int it = 0;
    while (rr > target) {
        if (it >= kImplicitMaxIterations)
            throw StepError("implicit solve did not converge (residual " + std::to_string(std::sqrt(rr)) + ")");
        const VectorField ap = apply(p);
        const double alpha = rr / l2_inner(chart_, p, ap);
        x = axpy(alpha, p, std::move(x));
        r = axpy(-alpha, ap, std::move(r));
        const double rr_new = l2_inner(chart_, r, r);
        p = axpy(rr_new / rr, p, r);
        rr = rr_new;
        ++it;
    }
    max_cg_iterations_ = std::max(max_cg_iterations_, it);
    return projector_.project(x);
}

Eigen::VectorXd Stepper::explicit_term_coefficients(const VectorField& u) const
{
    // The basis spans the range of P, so the coefficients of −P(∇_u u) are
    // those of −∇_u u.
    const VectorField uf = dealiased(chart_, u, config_.dealias);
    return -op_->basis->coefficients(dealiased(chart_, advect(chart_, uf, uf), config_.dealias));
}

VectorField Stepper::explicit_term(const VectorField& u) const { return nonlinearity(projector_, u, config_.dealias); }

SimState Stepper::diagnostics(double t, VectorField u) const
{
    SimState s;
    s.t = t;
    s.energy = 0.5 * l2_inner(chart_, u, u);
    s.dissipation = 2.0 * nu_ * deformation_norm_sq(chart_, u);
    s.divergence = divergence_residual(chart_, u);
    if (kb_) {
        for (const auto& z : kb_->fields) s.killing_moments.push_back(l2_inner(chart_, u, z));
        VectorField rest = u;
        for (std::size_t j = 0; j < kb_->fields.size(); ++j)
            rest = axpy(-s.killing_moments[j], kb_->fields[j], std::move(rest));
        s.distance_to_equilibrium = l2_norm(chart_, rest);
    } else {
        s.distance_to_equilibrium = std::sqrt(2.0 * s.energy);
    }
    s.u = std::move(u);
    return s;
}

SimState Stepper::initial_state(const VectorField& u0) const
{
    require_same_grid(chart_.grid(), u0.grid, "initial state");
    if (op_) return diagnostics(0.0, op_->basis->synthesize(op_->basis->coefficients(u0)));
    return diagnostics(0.0, projector_.project(u0));
}

SimState Stepper::step(const SimState& state)
{
    const double dt = config_.dt;
    const bool second_order = config_.integrator == Integrator::Imex2 && steps_ > 0;
    const double tau = second_order ? 0.5 * dt : dt;
    VectorField next;

    if (op_) {
        const DivFreeBasis& basis = *op_->basis;
        const Eigen::VectorXd a = basis.coefficients(state.u);
        const double scale = nu_ / op_->mu_s;
        Eigen::VectorXd f = Eigen::VectorXd::Zero(a.size());
        if (config_.nonlinear) f = explicit_term_coefficients(state.u);
        Eigen::VectorXd rhs = a;
        if (second_order) {
            rhs.noalias() -= tau * scale * (op_->entries * a);
            rhs += dt * (1.5 * f - 0.5 * *previous_f_coeffs_);
        } else {
            rhs += dt * f;
        }
        previous_f_coeffs_ = f;

        std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> llt;
        for (const auto& [t, fac] : factorizations_)
            if (t == tau) llt = fac;
        if (!llt) {
            Eigen::MatrixXd m = tau * scale * 0.5 * (op_->entries + op_->entries.transpose());
            m.diagonal().array() += 1.0;
            llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(m);
            if (llt->info() != Eigen::Success) throw StepError("implicit factorization failed");
            factorizations_.emplace_back(tau, llt);
        }
        next = basis.synthesize(llt->solve(rhs));
    } else {
        VectorField f = config_.nonlinear ? explicit_term(state.u) : VectorField::zeros(state.u.grid);
        VectorField rhs = state.u;
        if (second_order) {
            rhs = axpy(-tau, apply_operator(state.u), std::move(rhs));
            rhs = axpy(1.5 * dt, f, std::move(rhs));
            rhs = axpy(-0.5 * dt, *previous_f_, std::move(rhs));
        } else {
            rhs = axpy(dt, f, std::move(rhs));
        }
        previous_f_ = std::move(f);
        next = implicit_solve(rhs, tau);
    }
    ++steps_;

    SimState out = diagnostics(state.t + dt, std::move(next));
    if (!std::isfinite(out.energy)) throw StepError("non-finite energy after step");
    if (out.divergence > kPostStepDivergenceTol)
        throw StepError("divergence residual " + std::to_string(out.divergence) + " after step");
    return out;
}

// ---------------------------------------------------------------------------

Trajectory simulate(Stepper& stepper, const SimConfig& config, const VectorField& u0)
{
    validate(config);
    Trajectory traj;
    SimState state = stepper.initial_state(u0);
    const double limit = dt_max(stepper.chart(), state.u);
    if (config.dt > limit) {
        throw std::invalid_argument("dt " + std::to_string(config.dt) + " exceeds the CFL bound " +
                                    std::to_string(limit));
    }
    const auto steps = static_cast<long>(std::ceil(config.t_end / config.dt - 1e-9));
    traj.samples.push_back(state);
    for (long n = 1; n <= steps; ++n) {
        try {
            state = stepper.step(state);
        } catch (const std::exception& e) {
            traj.error = "step " + std::to_string(n) + ": " + e.what();
            return traj;
        }
        if (n % config.sample_every == 0 || n == steps) traj.samples.push_back(state);
    }
    traj.completed = true;
    return traj;
}

Trajectory simulate(const SimConfig& config, const VectorField& u0, std::shared_ptr<const OperatorMatrix> op,
                    std::shared_ptr<const KillingBasis> kb)
{
    Stepper stepper(config, build_chart(config), std::move(op), std::move(kb));
    return simulate(stepper, config, u0);
}

DecayFit decay_rate_fit(const Trajectory& trajectory, double t_from)
{
    if (trajectory.samples.empty()) throw std::runtime_error("decay_rate_fit: empty trajectory");
    const SimState& first = trajectory.samples.front();
    const double floor = 1e-10 * std::max(first.distance_to_equilibrium, std::sqrt(2.0 * first.energy));
    std::vector<double> ts, ys;
    for (const auto& s : trajectory.samples) {
        if (s.t + 1e-12 < t_from || !(s.distance_to_equilibrium > floor)) continue;
        ts.push_back(s.t);
        ys.push_back(std::log(s.distance_to_equilibrium));
    }
    if (ts.size() < 10)
        throw std::runtime_error("decay_rate_fit: fewer than 10 samples above the signal floor");
    const auto n = static_cast<Eigen::Index>(ts.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = ts[static_cast<std::size_t>(i)];
        y(i) = ys[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
    DecayFit fit;
    fit.alpha = -coef(1);
    fit.residual = std::sqrt((a * coef - y).squaredNorm() / static_cast<double>(n));
    fit.used_samples = ts.size();
    if (!(fit.alpha > 0.0)) throw std::runtime_error("decay_rate_fit: signal is not decaying");
    return fit;
}

}  // namespace surfstokes
