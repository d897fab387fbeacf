#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "surfstokes/stokes.hpp"

namespace surfstokes {

enum class SurfaceKind { FlatTorus, TorusOfRevolution };
enum class Integrator { Imex1, Imex2 };

std::string to_string(SurfaceKind kind);
std::string to_string(Integrator integrator);

struct SimConfig {
    SurfaceKind surface = SurfaceKind::TorusOfRevolution;
    double L1 = 2.0 * 3.141592653589793;
    double L2 = 2.0 * 3.141592653589793;
    double R = 2.0;
    double r = 1.0;
    int n_theta = 32;
    int n_phi = 32;
    double mu_s = 1.0;
    double rho = 1.0;
    double dt = 1e-2;
    double t_end = 1.0;
    Integrator integrator = Integrator::Imex2;
    bool dealias = true;
    std::uint64_t seed = 1;
    bool nonlinear = true;      ///< false drops F (linear Stokes flow)
    int sample_every = 1;       ///< record every k-th step
};

/// Checks ranges; throws std::invalid_argument naming the offending field.
void validate(const SimConfig& config);

SurfaceChart build_chart(const SimConfig& config);

struct SimState {
    double t = 0.0;
    VectorField u;
    double energy = 0.0;       ///< ½‖u‖²
    double dissipation = 0.0;  ///< 2ν‖D(u)‖², ν = μ_s/ρ
    std::vector<double> killing_moments;
    double divergence = 0.0;   ///< ‖div u‖
    double distance_to_equilibrium = 0.0;  ///< ‖u − P_E u‖
};

/// F(u) = −P(∇_u u). With dealias set, u is 2/3-truncated before the product
/// and the product is truncated again.
VectorField nonlinearity(const HelmholtzProjector& projector, const VectorField& u, bool dealias = false);

/// dt_max = 0.5 · min grid spacing / max |u|.
double dt_max(const SurfaceChart& chart, const VectorField& u);

/// Error raised by a failing step; carries the step index.
class StepError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// IMEX time stepper for ∂_t u + (1/ρ) A u = F(u).
///
/// With an attached OperatorMatrix the implicit solve uses a cached
/// Cholesky factorization in basis coefficients; otherwise it runs CG on the
/// divergence-free space with the projection inside the operator.
class Stepper {
public:
    Stepper(const SimConfig& config, SurfaceChart chart, std::shared_ptr<const OperatorMatrix> op = nullptr,
            std::shared_ptr<const KillingBasis> kb = nullptr);

    const SurfaceChart& chart() const { return chart_; }
    const HelmholtzProjector& projector() const { return projector_; }

    /// Projects u0 and fills diagnostics.
    SimState initial_state(const VectorField& u0) const;
    /// Advances by dt. Throws StepError on solver failure or if the
    /// post-step divergence residual exceeds 1e-6.
    SimState step(const SimState& state);
    SimState diagnostics(double t, VectorField u) const;

    /// Implicit solve count and the largest CG iteration count so far.
    int max_cg_iterations() const { return max_cg_iterations_; }

private:
    VectorField apply_operator(const VectorField& u) const;  // (ν/μ_s)·A u
    VectorField implicit_solve(const VectorField& rhs, double tau) const;
    Eigen::VectorXd explicit_term_coefficients(const VectorField& u) const;
    VectorField explicit_term(const VectorField& u) const;

    SimConfig config_;
    SurfaceChart chart_;
    HelmholtzProjector projector_;
    std::shared_ptr<const OperatorMatrix> op_;
    std::shared_ptr<const KillingBasis> kb_;
    double nu_;
    int steps_ = 0;
    // AB2 history
    std::optional<VectorField> previous_f_;
    std::optional<Eigen::VectorXd> previous_f_coeffs_;
    // Dense factorizations keyed by τ.
    mutable std::vector<std::pair<double, std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>>>> factorizations_;
    mutable int max_cg_iterations_ = 0;
};

struct Trajectory {
    std::vector<SimState> samples;
    bool completed = false;
    std::string error;  ///< set when a step failed; samples hold the partial run
};

/// Runs to t_end from u0 (projected first). Checks dt against dt_max(u0).
Trajectory simulate(const SimConfig& config, const VectorField& u0, std::shared_ptr<const OperatorMatrix> op = nullptr,
                    std::shared_ptr<const KillingBasis> kb = nullptr);
Trajectory simulate(Stepper& stepper, const SimConfig& config, const VectorField& u0);

struct DecayFit {
    double alpha = 0.0;     ///< decay rate of ‖u − P_E u‖
    double residual = 0.0;  ///< RMS residual of the log-linear fit
    std::size_t used_samples = 0;
};

/// Least-squares fit of log‖u(t) − P_E u(t)‖ on samples with t >= t_from.
/// Samples whose signal has fallen below 1e-10 of the initial one are
/// dropped. Throws std::runtime_error with fewer than 10 usable samples or a
/// non-decaying signal.
DecayFit decay_rate_fit(const Trajectory& trajectory, double t_from);

}  // namespace surfstokes
