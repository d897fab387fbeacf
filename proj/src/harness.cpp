#include "surfstokes/harness.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "surfstokes/fieldcalc.hpp"
#include "surfstokes/korn.hpp"
#include "surfstokes/parallel.hpp"

namespace surfstokes {

namespace {

using std::numbers::pi;
using Clock = std::chrono::steady_clock;

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// config parsing

struct LineError {
    std::string source;
    int line;
    std::string text;
};

[[noreturn]] void fail(const LineError& where, const std::string& message)
{
    throw std::invalid_argument("line " + std::to_string(where.line) + ": " + message + " (" + where.source +
                                ": '" + where.text + "')");
}

double parse_double(const LineError& where, const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        fail(where, "cannot parse number '" + v + "' for " + key);
    return out;
}

long long parse_integer(const LineError& where, const std::string& key, const std::string& v)
{
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(where, "cannot parse integer '" + v + "' for " + key);
    return out;
}

double positive(const LineError& where, const std::string& key, double v)
{
    if (!(v > 0.0)) fail(where, key + " must be positive");
    return v;
}

// ---------------------------------------------------------------------------
// shared scenario plumbing

struct Timer {
    Clock::time_point start = Clock::now();
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

std::filesystem::path scenario_dir(const RunConfig& cfg, const std::string& name)
{
    if (cfg.out_dir.empty()) return {};
    std::filesystem::path dir = std::filesystem::path(cfg.out_dir) / name;
    std::filesystem::create_directories(dir);
    return dir;
}

void maybe_csv(const std::filesystem::path& dir, const std::string& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows)
{
    if (!dir.empty()) emit_csv(dir / file, header, rows);
}

std::string describe(const SimConfig& c)
{
    std::ostringstream os;
    if (c.surface == SurfaceKind::FlatTorus)
        os << "flat_torus(L1=" << c.L1 << ", L2=" << c.L2 << ")";
    else
        os << "torus_of_revolution(R=" << c.R << ", r=" << c.r << ")";
    return os.str();
}

ScenarioReport new_report(const std::string& name, const RunConfig& cfg)
{
    ScenarioReport r;
    r.scenario = name;
    r.surface = describe(cfg.sim);
    r.grid = Grid{cfg.sim.n_theta, cfg.sim.n_phi};
    return r;
}

std::size_t expected_killing_dimension(const SimConfig& c) { return c.surface == SurfaceKind::FlatTorus ? 2 : 1; }

// Truncates to |k_i| <= kmax so triple products stay resolved on the grid.
ScalarField band_limited(const SurfaceChart& chart, ScalarField f, int kmax)
{
    f.values = chart.spectral().apply_symbol(f.values, [kmax](int kt, int kp, bool nt, bool np) {
        return (!nt && !np && std::abs(kt) <= kmax && std::abs(kp) <= kmax) ? 1.0 : 0.0;
    });
    return f;
}

VectorField band_limited(const SurfaceChart& chart, VectorField u, int kmax)
{
    for (auto& c : u.comp) c = band_limited(chart, ScalarField{u.grid, c}, kmax).values;
    return u;
}

double max_abs(const Eigen::ArrayXd& a) { return a.abs().maxCoeff(); }

struct DenseContext {
    std::shared_ptr<const DivFreeBasis> basis;
    std::shared_ptr<const OperatorMatrix> op;
    Spectrum spec;
    std::shared_ptr<const KillingBasis> kb;
};

DenseContext dense_context(const SurfaceChart& chart, double mu_s, bool with_killing)
{
    const int threads = configured_threads();
    DenseContext ctx;
    ctx.basis = divfree_basis(chart);
    ctx.op = std::make_shared<const OperatorMatrix>(assemble_operator(chart, mu_s, ctx.basis, threads));
    ctx.spec = spectrum(*ctx.op);
    if (with_killing)
        ctx.kb = std::make_shared<const KillingBasis>(killing_fields(ctx.basis, form_grams(*ctx.basis, threads)));
    return ctx;
}

// Sorted Stokes eigenvalues of a flat torus: μ(k₁²/a² + k₂²/b²) twice per
// half-plane wavenumber, plus the two harmonic zeros.
std::vector<double> flat_oracle(const SimConfig& c, std::size_t count)
{
    const double a = c.L1 / (2 * pi), b = c.L2 / (2 * pi);
    std::vector<double> out{0.0, 0.0};
    for (int kt = 0; kt < c.n_theta / 2; ++kt)
        for (int kp = -(c.n_phi / 2 - 1); kp < c.n_phi / 2; ++kp) {
            if (kt == 0 && kp <= 0) continue;
            const double ev = c.mu_s * (kt * kt / (a * a) + kp * kp / (b * b));
            out.push_back(ev);
            out.push_back(ev);
        }
    std::sort(out.begin(), out.end());
    out.resize(std::min(count, out.size()));
    return out;
}

// Unit vector field used as the reference Killing direction.
std::vector<VectorField> reference_killing(const SurfaceChart& chart, const SimConfig& c)
{
    std::vector<VectorField> out;
    if (c.surface == SurfaceKind::FlatTorus) {
        out.push_back(VectorField::constant(chart.grid(), 1, 0));
        out.push_back(VectorField::constant(chart.grid(), 0, 1));
    } else {
        out.push_back(VectorField::constant(chart.grid(), 0, 1));
    }
    for (auto& z : out) z *= 1.0 / l2_norm(chart, z);
    return out;
}

VectorField random_initial(const HelmholtzProjector& projector, std::uint64_t seed)
{
    Rng rng(seed);
    return random_divfree_field(projector, rng);
}

// Scales u so dt meets the CFL bound with 10% headroom.
VectorField fit_to_cfl(const SurfaceChart& chart, VectorField u, double dt)
{
    const double limit = dt_max(chart, u);
    if (dt > 0.9 * limit) u *= 0.9 * limit / dt;
    return u;
}

double energy_law_residual(const Trajectory& tr)
{
    double integral = 0.0, worst = 0.0;
    const auto& s = tr.samples;
    for (std::size_t i = 1; i < s.size(); ++i) {
        integral += 0.5 * (s[i].dissipation + s[i - 1].dissipation) * (s[i].t - s[i - 1].t);
        worst = std::max(worst, std::abs(s[i].energy - s[0].energy + integral));
    }
    return worst;
}

std::vector<std::vector<double>> trajectory_rows(const Trajectory& tr)
{
    std::vector<std::vector<double>> rows;
    for (const auto& s : tr.samples) {
        std::vector<double> row{s.t, s.energy, s.dissipation, s.distance_to_equilibrium, s.divergence};
        row.insert(row.end(), s.killing_moments.begin(), s.killing_moments.end());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> trajectory_header(const Trajectory& tr)
{
    std::vector<std::string> h{"t", "energy", "dissipation", "distance_to_equilibrium", "divergence"};
    if (!tr.samples.empty())
        for (std::size_t j = 0; j < tr.samples.front().killing_moments.size(); ++j)
            h.push_back("killing_moment_" + std::to_string(j + 1));
    return h;
}

void require_completed(const Trajectory& tr)
{
    if (!tr.completed) throw std::runtime_error("simulation aborted: " + tr.error);
}

// ---------------------------------------------------------------------------
// scenarios

ScenarioReport scenario_identities(const RunConfig& cfg)
{
    ScenarioReport rep = geometry_checks(cfg);
    rep.scenario = "identities";
    const SurfaceChart chart = build_chart(cfg.sim);
    const HelmholtzProjector projector(chart);
    Rng rng(cfg.sim.seed);
    const int kmax = std::max(1, cfg.sim.n_theta / 6);

    double div_thm = 0.0, duality = 0.0, trace_res = 0.0, ibp = 0.0, compat = 0.0, antisym = 0.0;
    for (int s = 0; s < 5; ++s) {
        const VectorField u = random_smooth_vector(chart.grid(), rng);
        const ScalarField psi = random_smooth_scalar(chart.grid(), rng);
        const ScalarField div = divergence(chart, u);
        div_thm = std::max(div_thm, std::abs(integrate_scalar(chart, div)));
        const double lhs = l2_inner(chart, grad_scalar(chart, psi), u);
        duality = std::max(duality, std::abs(lhs + integrate_scalar(chart, psi.values * div.values)) / std::abs(lhs));
        const VectorField ub = band_limited(chart, u, kmax);
        trace_res = std::max(trace_res,
                             max_abs(divergence(chart, ub).values - trace(chart, deformation(chart, ub)).values));
        const double grad = gradient_norm_sq(chart, u);
        ibp = std::max(ibp, std::abs(l2_inner(chart, bochner_laplacian(chart, u), u) + grad) / grad);

        const VectorField a = band_limited(chart, random_smooth_vector(chart.grid(), rng), kmax);
        const VectorField b = band_limited(chart, random_smooth_vector(chart.grid(), rng), kmax);
        const VectorField w = band_limited(chart, random_smooth_vector(chart.grid(), rng), kmax);
        const Eigen::ArrayXd ab = pointwise_inner(chart, a, b);
        const Eigen::ArrayXd cl = directional_derivative(chart, w, {chart.grid(), ab}).values;
        const Eigen::ArrayXd cr = pointwise_inner(chart, advect(chart, w, a), b) + pointwise_inner(chart, a, advect(chart, w, b));
        compat = std::max(compat, std::abs(integrate_scalar(chart, cl - cr)));

        for (const auto& z : reference_killing(chart, cfg.sim))
            antisym = std::max(antisym, max_abs(2.0 * pointwise_inner(chart, advect(chart, u, z), u)));
    }
    rep.rows.push_back(make_row("divergence_theorem", div_thm, "<=", 1e-10));
    rep.rows.push_back(make_row("gradient_divergence_duality_rel", duality, "<=", 1e-8));
    rep.rows.push_back(make_row("trace_deformation_minus_divergence", trace_res, "<=", 1e-10));
    rep.rows.push_back(make_row("bochner_integration_by_parts_rel", ibp, "<=", 1e-8));
    rep.rows.push_back(make_row("metric_compatibility", compat, "<=", 1e-10));
    rep.rows.push_back(make_row("killing_antisymmetry", antisym, "<=", 1e-10));

    const int samples = 20;
    double form_diff = 0.0, quad = 0.0;
    std::vector<std::vector<double>> csv;
    for (int s = 0; s < samples; ++s) {
        const VectorField u = random_divfree_field(projector, rng);
        const VectorField a_div = apply_stokes_div_form(projector, cfg.sim.mu_s, u);
        const VectorField a_boch = apply_stokes_bochner_form(projector, cfg.sim.mu_s, u);
        const double norm = l2_norm(chart, u);
        const double diff = l2_norm(chart, a_div - a_boch) / norm;
        const double form = l2_inner(chart, a_boch, u);
        const double dform = 2.0 * cfg.sim.mu_s * deformation_norm_sq(chart, u);
        const double qrel = std::abs(form - dform) / std::abs(dform);
        form_diff = std::max(form_diff, diff);
        quad = std::max(quad, qrel);
        csv.push_back({static_cast<double>(s), norm, diff, qrel});
    }
    rep.rows.push_back(make_row("stokes_form_equivalence_rel", form_diff, "<=", 1e-6));
    rep.rows.push_back(make_row("quadratic_form_identity_rel", quad, "<=", 1e-8));
    maybe_csv(scenario_dir(cfg, "identities"), "stokes_forms.csv",
              {"sample", "l2_norm_u", "div_minus_bochner_rel", "quadratic_form_rel"}, csv);
    return rep;
}

ScenarioReport scenario_helmholtz(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("helmholtz", cfg);
    const double tol = kDefaultProjectionTol;
    const SurfaceChart chart = build_chart(cfg.sim);
    const HelmholtzProjector p(chart, tol);
    Rng rng(cfg.sim.seed);

    double idem = 0.0, adj = 0.0, annih = 0.0, divres = 0.0, route = 0.0;
    int iterations = 0;
    std::vector<std::vector<double>> csv;
    for (int s = 0; s < 5; ++s) {
        const VectorField u = random_smooth_vector(chart.grid(), rng);
        const VectorField v = random_smooth_vector(chart.grid(), rng);
        SolveStats st;
        const LerayResult ru = p.decompose(u);
        const VectorField pv = p.project(v, &st);
        iterations = std::max({iterations, st.iterations, ru.stats.iterations});
        const double i = l2_norm(chart, p.project(ru.projected) - ru.projected);
        const double a = std::abs(l2_inner(chart, ru.projected, v) - l2_inner(chart, u, pv)) /
                         (l2_norm(chart, u) * l2_norm(chart, v));
        const double g = l2_norm(chart, p.project(grad_scalar(chart, random_smooth_scalar(chart.grid(), rng))));
        const double d = divergence_residual(chart, ru.projected);
        const double rt =
            l2_norm(chart, u - grad_scalar(chart, ru.potential) - ru.projected) / l2_norm(chart, u);
        idem = std::max(idem, i);
        adj = std::max(adj, a);
        annih = std::max(annih, g);
        divres = std::max(divres, d);
        route = std::max(route, rt);
        csv.push_back({static_cast<double>(s), i, a, g, d, rt});
    }
    rep.rows.push_back(make_row("idempotence", idem, "<=", 1e-8));
    rep.rows.push_back(make_row("self_adjointness_rel", adj, "<=", 1e-8));
    rep.rows.push_back(make_row("gradient_annihilation", annih, "<=", 1e-8));
    rep.rows.push_back(make_row("divergence_residual", divres, "<=", 1e-8));
    rep.rows.push_back(make_row("cg_iterations", iterations, "<=", 10.0 * cfg.sim.n_theta));

    double keep = 0.0;
    for (const auto& z : reference_killing(chart, cfg.sim))
        if (cfg.sim.surface == SurfaceKind::TorusOfRevolution) keep = std::max(keep, l2_norm(chart, p.project(z) - z));
    rep.rows.push_back(make_row("divergence_free_preserved", keep, "<=", 1e-8));
    const double killing_pressure =
        max_abs(recover_pressure(p, reference_killing(chart, cfg.sim).back(), cfg.sim.mu_s).values);
    rep.rows.push_back(make_row("killing_pressure", killing_pressure, "<=", 1e-8));

    // Pressure estimate ‖π‖ <= C‖u‖_{H¹}: C from the same seeded fields on two grids.
    auto pressure_constant = [&](int n) {
        SimConfig c = cfg.sim;
        c.n_theta = c.n_phi = n;
        const SurfaceChart ch = build_chart(c);
        const HelmholtzProjector pr(ch);
        Rng r(cfg.sim.seed + 1);
        double worst = 0.0;
        for (int s = 0; s < 5; ++s) {
            const VectorField u = random_divfree_field(pr, r);
            worst = std::max(worst, l2_norm(ch, recover_pressure(pr, u, cfg.sim.mu_s)) / h1_norm(ch, u));
        }
        return worst;
    };
    const double c48 = pressure_constant(48), c64 = pressure_constant(64);
    const double spread = std::abs(c48 - c64);
    rep.rows.push_back(make_row("pressure_constant_refinement_rel", spread > 0.0 ? spread / c64 : 0.0, "<=", 0.05));
    csv.push_back({-1.0, c48, c64, 0, 0, 0});
    maybe_csv(scenario_dir(cfg, "helmholtz"), "projection.csv",
              {"sample", "idempotence", "self_adjointness_rel", "gradient_annihilation", "divergence_residual",
               "route_consistency_rel"},
              csv);
    return rep;
}

ScenarioReport scenario_equilibria(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("equilibria", cfg);
    const SurfaceChart chart = build_chart(cfg.sim);
    const DenseContext ctx = dense_context(chart, cfg.sim.mu_s, true);
    const KillingBasis& kb = *ctx.kb;

    rep.rows.push_back(make_row("killing_dimension", static_cast<double>(kb.size()), "==",
                                static_cast<double>(expected_killing_dimension(cfg.sim))));
    rep.rows.push_back(make_row("killing_spectral_gap", kb.kernel.gap_ratio, ">=", kRequiredSpectralGap));
    rep.rows.push_back(make_row("killing_dimension_bound", static_cast<double>(kb.size()), "<=", 3.0));
    double ortho = 0.0, defect = 0.0;
    for (std::size_t i = 0; i < kb.size(); ++i) {
        for (std::size_t j = 0; j < kb.size(); ++j)
            ortho = std::max(ortho, std::abs(l2_inner(chart, kb.fields[i], kb.fields[j]) - (i == j ? 1.0 : 0.0)));
        defect = std::max(defect, std::sqrt(deformation_norm_sq(chart, kb.fields[i])) / h1_norm(chart, kb.fields[i]));
    }
    rep.rows.push_back(make_row("killing_orthonormality", ortho, "<=", 1e-10));
    rep.rows.push_back(make_row("killing_deformation_rel", defect, "<=", 1e-6));
    rep.rows.push_back(make_row("operator_kernel_dimension", static_cast<double>(ctx.spec.kernel.dimension), "==",
                                static_cast<double>(kb.size())));
    rep.rows.push_back(make_row("kernel_equals_killing_angle",
                                subspace_angle(ctx.spec.kernel_vectors(), kb.coefficients), "<=", 1e-6));
    double align = 0.0;
    for (const auto& w : reference_killing(chart, cfg.sim))
        align = std::max(align, l2_norm(chart, w - project_onto_equilibria(chart, w, kb)));
    rep.rows.push_back(make_row("killing_matches_isometries", align, "<=", 1e-8));

    std::vector<std::vector<double>> spec_rows;
    const Eigen::Index shown = std::min<Eigen::Index>(50, kb.form_eigenvalues.size());
    for (Eigen::Index i = 0; i < shown; ++i) spec_rows.push_back({static_cast<double>(i), kb.form_eigenvalues(i)});
    const auto dir = scenario_dir(cfg, "equilibria");
    maybe_csv(dir, "deformation_form_spectrum.csv", {"index", "eigenvalue"}, spec_rows);
    std::vector<std::string> header{"theta", "phi"};
    for (std::size_t j = 0; j < kb.size(); ++j) {
        header.push_back("z" + std::to_string(j + 1) + "_u1");
        header.push_back("z" + std::to_string(j + 1) + "_u2");
    }
    std::vector<std::vector<double>> field_rows;
    for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(chart.grid().size()); ++n) {
        std::vector<double> row{chart.theta()(n), chart.phi()(n)};
        for (const auto& z : kb.fields) {
            row.push_back(z.comp[0](n));
            row.push_back(z.comp[1](n));
        }
        field_rows.push_back(std::move(row));
    }
    maybe_csv(dir, "killing_fields.csv", header, field_rows);
    return rep;
}

ScenarioReport scenario_spectrum(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("spectrum", cfg);
    const SurfaceChart chart = build_chart(cfg.sim);
    const DenseContext ctx = dense_context(chart, cfg.sim.mu_s, false);
    const Eigen::VectorXd& ev = ctx.spec.eigenvalues;
    const double lmax = ev(ev.size() - 1);

    rep.rows.push_back(make_row("basis_dimension", static_cast<double>(ctx.basis->size()), "==",
                                static_cast<double>((cfg.sim.n_theta - 1) * (cfg.sim.n_phi - 1) + 1)));
    rep.rows.push_back(make_row("basis_orthonormality", ctx.basis->orthonormality_defect(), "<=", 1e-10));
    rep.rows.push_back(make_row("operator_asymmetry_rel", ctx.op->asymmetry, "<=", 1e-8));
    rep.rows.push_back(make_row("positive_semidefinite", ev(0) / lmax, ">=", -1e-8));
    rep.rows.push_back(make_row("spectral_bound_rel", std::abs(ctx.spec.spectral_bound) / lmax, "<=", 1e-8));
    rep.rows.push_back(make_row("nontrivial_kernel", static_cast<double>(ctx.spec.kernel.dimension), ">=", 1.0));
    rep.rows.push_back(make_row("kernel_spectral_gap", ctx.spec.kernel.gap_ratio, ">=", kRequiredSpectralGap));

    std::vector<double> oracle;
    if (cfg.sim.surface == SurfaceKind::FlatTorus) {
        oracle = flat_oracle(cfg.sim, static_cast<std::size_t>(ev.size()));
        double worst = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(12, oracle.size()); ++i)
            worst = std::max(worst, std::abs(ev(static_cast<Eigen::Index>(i)) - oracle[i]));
        rep.rows.push_back(make_row("flat_fourier_eigenvalues", worst, "<=", 1e-8 * std::max(1.0, cfg.sim.mu_s)));
    }
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        rows.push_back({static_cast<double>(i), ev(i),
                        oracle.empty() ? std::nan("") : oracle[static_cast<std::size_t>(i)]});
    maybe_csv(scenario_dir(cfg, "spectrum"), "eigenvalues.csv", {"index", "eigenvalue", "fourier_oracle"}, rows);
    return rep;
}

ScenarioReport scenario_sectoriality(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("sectoriality", cfg);
    const SurfaceChart chart = build_chart(cfg.sim);
    const DenseContext ctx = dense_context(chart, cfg.sim.mu_s, false);
    const double omega = default_shift(ctx.spec);
    const double angle = pi / 4;
    const std::vector<double> magnitudes{1.0, 10.0, 100.0, 1000.0};
    Rng rng(cfg.sim.seed);
    const auto probes = random_probes(ctx.basis->size(), 8, rng);
    const ResolventTable table = resolvent_probe(*ctx.op, ctx.spec, omega, angle, magnitudes, probes);

    // Spectral-calculus bound over the half line: ‖(λ+ω+A)⁻¹‖ <= 1/min_{s>=0}|λ+ω+s|.
    double bound_ratio = 0.0;
    std::vector<std::vector<double>> rows;
    std::map<double, double> per_magnitude;
    for (const auto& s : table.samples) {
        const std::complex<double> z = s.lambda + omega;
        const double dist = z.real() >= 0.0 ? std::abs(z) : std::abs(z.imag());
        const double bound = (std::abs(s.lambda) + 1.0) / dist;
        bound_ratio = std::max(bound_ratio, s.q / bound);
        const double m = std::abs(s.lambda);
        per_magnitude[m] = std::max(per_magnitude[m], s.q);
        rows.push_back({m, s.lambda.real(), s.lambda.imag(), s.q, s.q_oracle, bound});
    }
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (const auto& [m, q] : per_magnitude)
        if (m >= 10.0 - 1e-9) {
            hi = std::max(hi, q);
            lo = std::min(lo, q);
        }
    rep.rows.push_back(make_row("oracle_mismatch_rel", table.max_oracle_mismatch, "<=", 1e-8));
    rep.rows.push_back(make_row("sector_bound_ratio", bound_ratio, "<=", 1.0));
    rep.rows.push_back(make_row("q_variation_1_to_1000", table.variation(), "<=", 0.2));
    const auto dir = scenario_dir(cfg, "sectoriality");
    maybe_csv(dir, "resolvent.csv", {"magnitude", "lambda_re", "lambda_im", "q", "q_oracle", "sector_bound"}, rows);
    maybe_csv(dir, "resolvent_summary.csv",
              {"omega", "angle", "max_q", "min_q", "variation", "variation_from_10"},
              {{omega, angle, table.max_q, table.min_q, table.variation(), hi > 0.0 ? (hi - lo) / hi : 0.0}});
    return rep;
}

double korn_at(const SimConfig& base, int n, KornResult* out_result = nullptr)
{
    SimConfig c = base;
    c.n_theta = c.n_phi = n;
    const SurfaceChart chart = build_chart(c);
    const int threads = configured_threads();
    auto basis = divfree_basis(chart);
    const FormGrams grams = form_grams(*basis, threads);
    const KillingBasis kb = killing_fields(basis, grams);
    const KornResult res = korn_constant(*basis, grams, kb);
    if (out_result != nullptr) *out_result = res;
    return res.constant;
}

ScenarioReport scenario_korn(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("korn", cfg);
    const SimConfig& c = cfg.sim;
    const SurfaceChart chart = build_chart(c);
    const int threads = configured_threads();
    auto basis = divfree_basis(chart);
    const FormGrams grams = form_grams(*basis, threads);
    const KillingBasis kb = killing_fields(basis, grams);
    const KornResult res = korn_constant(*basis, grams, kb);
    std::vector<std::vector<double>> csv{{static_cast<double>(c.n_theta), res.constant, res.lambda_min,
                                          static_cast<double>(res.complement_dimension)}};

    if (c.surface == SurfaceKind::FlatTorus) {
        // Smallest nonzero wavenumber κ gives the extremal ratio (1+κ²)/(κ²/2).
        const double kappa = std::min(2 * pi / c.L1, 2 * pi / c.L2);
        const double oracle = std::sqrt(2.0 * (1.0 + kappa * kappa)) / kappa;
        rep.rows.push_back(make_row("flat_korn_constant_rel", std::abs(res.constant - oracle) / oracle, "<=", 0.01));
    }
    const int refined = 2 * ((3 * c.n_theta / 2 + 1) / 2);
    KornResult fine;
    const double c_fine = korn_at(c, refined, &fine);
    csv.push_back({static_cast<double>(refined), fine.constant, fine.lambda_min,
                   static_cast<double>(fine.complement_dimension)});
    rep.rows.push_back(make_row("refinement_stability_rel", std::abs(res.constant - c_fine) / c_fine, "<=", 0.02));

    const double sample_ratio = korn_sample_ratio(chart, kb, 100, c.seed);
    rep.rows.push_back(make_row("sampled_inequality_ratio", sample_ratio / res.constant, "<=", 1.01));

    const KornResult enlarged = korn_constant(*basis, grams, kb, {basis->synthesize(res.minimizer)});
    rep.rows.push_back(make_row("enlarged_exclusion_increase_rel", (enlarged.constant - res.constant) / res.constant, "<=", 1e-12));

    const KornSampleReport inter = korn_intermediate_check(chart, 100, c.seed);
    rep.rows.push_back(make_row("intermediate_constant", inter.max_ratio, "<=",
                                c.surface == SurfaceKind::FlatTorus ? 4.0 : 1e6));
    rep.rows.push_back(make_row("curvature_identity_rel", inter.max_identity_residual, "<=", 1e-8));
    maybe_csv(scenario_dir(cfg, "korn"), "korn.csv", {"n", "constant", "lambda_min", "complement_dimension"}, csv);
    return rep;
}

ScenarioReport scenario_decay(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("decay", cfg);
    const SimConfig& base = cfg.sim;
    const SurfaceChart chart = build_chart(base);
    const auto dir = scenario_dir(cfg, "decay");
    const HelmholtzProjector projector(chart);

    // Short runs for the time-stepping order (and the exact decay on flat tori).
    VectorField u0 = VectorField::zeros(chart.grid());
    double exact_rate = -1.0;
    if (base.surface == SurfaceKind::FlatTorus) {
        u0.comp[1] = chart.theta().sin();
        const double a = base.L1 / (2 * pi);
        exact_rate = base.mu_s / base.rho / (a * a);
    } else {
        u0 = fit_to_cfl(chart, random_initial(projector, base.seed), base.dt);
    }
    SimConfig short_run = base;
    short_run.t_end = 1.0;
    short_run.sample_every = 1;
    short_run.nonlinear = base.surface == SurfaceKind::FlatTorus && base.nonlinear;
    std::array<double, 2> residuals{};
    for (int k = 0; k < 2; ++k) {
        SimConfig c = short_run;
        c.dt = base.dt / (k + 1);
        Stepper stepper(c, chart);
        const Trajectory tr = simulate(stepper, c, u0);
        require_completed(tr);
        residuals[k] = energy_law_residual(tr);
        if (k == 0) {
            if (exact_rate > 0.0) {
                const double ratio = std::sqrt(tr.samples.back().energy / tr.samples.front().energy);
                const double err = std::abs(ratio - std::exp(-exact_rate * tr.samples.back().t));
                const double p = base.integrator == Integrator::Imex2 ? 2.0 : 1.0;
                rep.rows.push_back(make_row("single_mode_exact_decay", err, "<=",
                                            1e-6 * std::max(1.0, std::pow(base.dt / 1e-3, p))));
            }
            auto rows = trajectory_rows(tr);
            for (auto& row : rows)
                row.push_back(exact_rate > 0.0 ? std::sqrt(2 * tr.samples.front().energy) * std::exp(-exact_rate * row[0])
                                               : std::nan(""));
            auto header = trajectory_header(tr);
            header.push_back("exact_norm");
            maybe_csv(dir, "short_run.csv", header, rows);
        }
    }
    const double order = base.integrator == Integrator::Imex2 ? 2.0 : 1.0;
    const double observed = std::log2(residuals[0] / residuals[1]);
    rep.rows.push_back(make_row("energy_law_order_error", std::abs(observed - order), "<=", 0.25));
    maybe_csv(dir, "energy_law.csv", {"dt", "residual"}, {{base.dt, residuals[0]}, {base.dt / 2, residuals[1]}});

    // Linear Stokes decay against the spectral gap.
    const DenseContext ctx = dense_context(chart, base.mu_s, true);
    const double gap = ctx.spec.kernel.first_nonzero / base.rho;
    SimConfig lin = base;
    lin.nonlinear = false;
    lin.sample_every = 1;
    lin.t_end = std::max(base.t_end, 12.0 / gap);
    Stepper stepper(lin, chart, ctx.op, ctx.kb);
    const Trajectory tr = simulate(stepper, lin, fit_to_cfl(chart, random_initial(projector, base.seed + 1), lin.dt));
    require_completed(tr);
    const DecayFit fit = decay_rate_fit(tr, lin.t_end / 2);
    rep.rows.push_back(make_row("linear_decay_rate_vs_gap_rel", std::abs(fit.alpha - gap) / gap, "<=", 0.02));
    maybe_csv(dir, "linear_decay.csv", trajectory_header(tr), trajectory_rows(tr));
    maybe_csv(dir, "decay_fit.csv", {"alpha_fit", "fit_residual", "spectral_gap", "samples"},
              {{fit.alpha, fit.residual, gap, static_cast<double>(fit.used_samples)}});
    return rep;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"identities", "helmholtz", "equilibria", "spectrum",
                                                "sectoriality", "korn", "decay", "convergence"};
    return names;
}

RunConfig parse_config_text(const std::string& text, const std::string& source)
{
    RunConfig cfg;
    SimConfig& s = cfg.sim;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool have_big_r = false;
    LineError big_r_line{source, 0, ""};
    while (std::getline(in, raw)) {
        ++line_no;
        const LineError where{source, line_no, trim(raw)};
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(where, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) fail(where, "missing value for " + key);

        if (key == "surface") {
            if (value == "flat_torus")
                s.surface = SurfaceKind::FlatTorus;
            else if (value == "torus_of_revolution")
                s.surface = SurfaceKind::TorusOfRevolution;
            else
                fail(where, "unknown surface '" + value + "' (flat_torus|torus_of_revolution)");
        } else if (key == "L1") {
            s.L1 = positive(where, key, parse_double(where, key, value));
        } else if (key == "L2") {
            s.L2 = positive(where, key, parse_double(where, key, value));
        } else if (key == "R") {
            s.R = positive(where, key, parse_double(where, key, value));
            have_big_r = true;
            big_r_line = where;
        } else if (key == "r") {
            s.r = positive(where, key, parse_double(where, key, value));
        } else if (key == "n_theta" || key == "n_phi") {
            const long long n = parse_integer(where, key, value);
            if (n < 8 || n % 2 != 0 || n > 4096) fail(where, key + " must be an even integer >= 8");
            (key == "n_theta" ? s.n_theta : s.n_phi) = static_cast<int>(n);
        } else if (key == "mu_s") {
            s.mu_s = positive(where, key, parse_double(where, key, value));
        } else if (key == "rho") {
            s.rho = positive(where, key, parse_double(where, key, value));
        } else if (key == "dt") {
            s.dt = positive(where, key, parse_double(where, key, value));
        } else if (key == "t_end") {
            s.t_end = positive(where, key, parse_double(where, key, value));
        } else if (key == "integrator") {
            if (value == "imex1")
                s.integrator = Integrator::Imex1;
            else if (value == "imex2")
                s.integrator = Integrator::Imex2;
            else
                fail(where, "unknown integrator '" + value + "' (imex1|imex2)");
        } else if (key == "dealias") {
            if (value == "true" || value == "on" || value == "1")
                s.dealias = true;
            else if (value == "false" || value == "off" || value == "0")
                s.dealias = false;
            else
                fail(where, "dealias must be true or false");
        } else if (key == "seed") {
            const long long seed = parse_integer(where, key, value);
            if (seed < 0) fail(where, "seed must be non-negative");
            s.seed = static_cast<std::uint64_t>(seed);
        } else if (key == "scenario") {
            const auto& names = scenario_names();
            if (value != "all" && std::find(names.begin(), names.end(), value) == names.end())
                fail(where, "unknown scenario '" + value + "'");
            cfg.scenario = value;
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else {
            fail(where, "unknown key '" + key + "'");
        }
    }
    if (s.surface == SurfaceKind::TorusOfRevolution && !(s.R > s.r)) {
        const std::string msg = "R must exceed r (R = " + fmt17(s.R) + ", r = " + fmt17(s.r) + ")";
        if (have_big_r) fail(big_r_line, msg);
        throw std::invalid_argument(source + ": " + msg);
    }
    validate(s);
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path.string());
}

CriterionRow make_row(std::string name, double measured, std::string relation, double threshold)
{
    CriterionRow row{std::move(name), measured, std::move(relation), threshold, false};
    if (row.relation == "<=")
        row.passed = measured <= threshold;
    else if (row.relation == ">=")
        row.passed = measured >= threshold;
    else if (row.relation == "==")
        row.passed = measured == threshold;
    else
        throw std::invalid_argument("make_row: unknown relation " + row.relation);
    return row;
}

bool ScenarioReport::passed() const
{
    return error.empty() && !rows.empty() &&
           std::all_of(rows.begin(), rows.end(), [](const CriterionRow& r) { return r.passed; });
}

ScenarioReport geometry_checks(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("geometry", cfg);
    const SimConfig& c = cfg.sim;
    const SurfaceChart chart = build_chart(c);
    const Grid& grid = chart.grid();

    double inverse = 0.0, symmetric = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const Eigen::ArrayXd id = chart.g(i, 0) * chart.g_inv(0, j) + chart.g(i, 1) * chart.g_inv(1, j);
            inverse = std::max(inverse, max_abs(id - (i == j ? 1.0 : 0.0)));
            for (int k = 0; k < 2; ++k)
                symmetric = std::max(symmetric, max_abs(chart.christoffel(k, i, j) - chart.christoffel(k, j, i)));
        }
    rep.rows.push_back(make_row("metric_inverse", inverse, "<=", 1e-12));
    rep.rows.push_back(make_row("christoffel_symmetry", symmetric, "<=", 0.0));
    rep.rows.push_back(make_row("gauss_bonnet", std::abs(integrate_scalar(chart, chart.gauss_curvature())), "<=", 1e-10));

    double area_oracle = 0.0, k_err = 0.0;
    if (c.surface == SurfaceKind::FlatTorus) {
        area_oracle = c.L1 * c.L2;
        k_err = max_abs(chart.gauss_curvature());
    } else {
        area_oracle = 4 * pi * pi * c.R * c.r;
        for (int j = 0; j < grid.n_theta; ++j) {
            const double t = grid.theta(j);
            const double exact = std::cos(t) / (c.r * (c.R + c.r * std::cos(t)));
            for (int l = 0; l < grid.n_phi; ++l)
                k_err = std::max(k_err, std::abs(chart.gauss_curvature()(grid.index(j, l)) - exact));
        }
    }
    rep.rows.push_back(make_row("area_vs_closed_form", std::abs(chart.area() - area_oracle), "<=", 1e-10 * std::max(1.0, area_oracle)));
    rep.rows.push_back(make_row("curvature_vs_closed_form", k_err, "<=", 1e-8));
    return rep;
}

ScenarioReport convergence_moderate(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("convergence", cfg);
    const SimConfig& base = cfg.sim;
    const SurfaceChart chart = build_chart(base);
    const DenseContext ctx = dense_context(chart, base.mu_s, true);
    const HelmholtzProjector projector(chart);

    SimConfig c = base;
    c.sample_every = 1;
    c.nonlinear = true;
    const VectorField u0 = fit_to_cfl(chart, random_initial(projector, base.seed), c.dt);
    Stepper stepper(c, chart, ctx.op, ctx.kb);
    const Trajectory tr = simulate(stepper, c, u0);
    require_completed(tr);

    const SimState& first = tr.samples.front();
    const double norm0 = std::sqrt(2.0 * first.energy);
    double drift = 0.0, growth = -std::numeric_limits<double>::infinity(), distance_growth = 0.0;
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        const SimState& s = tr.samples[i];
        for (std::size_t j = 0; j < s.killing_moments.size(); ++j)
            drift = std::max(drift, std::abs(s.killing_moments[j] - first.killing_moments[j]));
        growth = std::max(growth, s.energy - tr.samples[i - 1].energy);
        distance_growth = std::max(distance_growth, s.distance_to_equilibrium - tr.samples[i - 1].distance_to_equilibrium);
    }
    rep.rows.push_back(make_row("killing_moment_drift_rel", drift / norm0, "<=", 1e-6));
    rep.rows.push_back(make_row("max_energy_growth_per_step_rel", growth / first.energy, "<=", 1e-10));
    rep.rows.push_back(make_row("distance_monotone_increase_rel", distance_growth / first.distance_to_equilibrium,
                                "<=", 1e-10));
    const double order = c.integrator == Integrator::Imex2 ? 2.0 : 1.0;
    // Trapezoid quadrature of the dissipation is the dominant error; its size
    // is dt^p <(νA)^p u0, u0>.
    const Eigen::VectorXd a0 = ctx.basis->coefficients(first.u);
    const Eigen::VectorXd a1 = (base.mu_s / base.rho / ctx.op->mu_s) * (ctx.op->entries * a0);
    const double scale = order == 2.0 ? a1.squaredNorm() : a0.dot(a1);
    rep.rows.push_back(make_row("energy_law_residual", energy_law_residual(tr), "<=", std::pow(c.dt, order) * scale));
    const DecayFit fit = decay_rate_fit(tr, c.t_end / 2);
    const SimState& last = tr.samples.back();
    const double target = first.distance_to_equilibrium * std::exp(-fit.alpha * last.t / 2);
    rep.rows.push_back(make_row("convergence_target_ratio", last.distance_to_equilibrium / target, "<=", 1.0));
    maybe_csv(scenario_dir(cfg, "convergence"), "nonlinear_run.csv", trajectory_header(tr), trajectory_rows(tr));
    return rep;
}

ScenarioReport convergence_small_data(const RunConfig& cfg)
{
    ScenarioReport rep = new_report("convergence", cfg);
    const SimConfig& base = cfg.sim;
    const SurfaceChart chart = build_chart(base);
    const DenseContext ctx = dense_context(chart, base.mu_s, true);
    const HelmholtzProjector projector(chart);
    const double gap = ctx.spec.kernel.first_nonzero / base.rho;

    SimConfig c = base;
    c.sample_every = 1;
    c.nonlinear = true;
    c.t_end = std::max(base.t_end, 12.0 / gap);
    VectorField u0 = random_initial(projector, base.seed + 2);
    u0 *= 1e-3;
    Stepper stepper(c, chart, ctx.op, ctx.kb);
    const Trajectory tr = simulate(stepper, c, u0);
    require_completed(tr);
    const DecayFit fit = decay_rate_fit(tr, c.t_end / 2);
    rep.rows.push_back(make_row("small_data_rate_vs_gap_rel", std::abs(fit.alpha - gap) / gap, "<=", 0.05));

    // Distance ratio at T = 10/α_fit, log-linear between samples.
    const double t_star = 10.0 / fit.alpha;
    const auto& s = tr.samples;
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i].t + 1e-12 < t_star) continue;
        const double w = (t_star - s[i - 1].t) / (s[i].t - s[i - 1].t);
        const double logd = (1 - w) * std::log(s[i - 1].distance_to_equilibrium) + w * std::log(s[i].distance_to_equilibrium);
        ratio = std::exp(logd) / s.front().distance_to_equilibrium;
        break;
    }
    rep.rows.push_back(make_row("distance_ratio_at_10_over_alpha", ratio, "<=", 1e-3));
    maybe_csv(scenario_dir(cfg, "convergence"), "small_data_run.csv", trajectory_header(tr), trajectory_rows(tr));
    maybe_csv(scenario_dir(cfg, "convergence"), "small_data_fit.csv",
              {"alpha_fit", "fit_residual", "spectral_gap", "t_star", "distance_ratio"},
              {{fit.alpha, fit.residual, gap, t_star, ratio}});
    return rep;
}

ScenarioReport run_scenario(const std::string& name, const RunConfig& config)
{
    const Timer timer;
    ScenarioReport rep;
    try {
        if (name == "identities") {
            rep = scenario_identities(config);
        } else if (name == "helmholtz") {
            rep = scenario_helmholtz(config);
        } else if (name == "equilibria") {
            rep = scenario_equilibria(config);
        } else if (name == "spectrum") {
            rep = scenario_spectrum(config);
        } else if (name == "sectoriality") {
            rep = scenario_sectoriality(config);
        } else if (name == "korn") {
            rep = scenario_korn(config);
        } else if (name == "decay") {
            rep = scenario_decay(config);
        } else if (name == "convergence") {
            rep = convergence_moderate(config);
            ScenarioReport small = convergence_small_data(config);
            rep.rows.insert(rep.rows.end(), small.rows.begin(), small.rows.end());
        } else {
            throw std::invalid_argument("unknown scenario '" + name + "'");
        }
    } catch (const std::exception& e) {
        rep = new_report(name, config);
        rep.error = e.what();
    }
    rep.wall_seconds = timer.seconds();
    if (!config.out_dir.empty()) write_report(std::filesystem::path(config.out_dir) / name, rep);
    return rep;
}

std::vector<ScenarioReport> run_scenarios(const RunConfig& config)
{
    std::vector<ScenarioReport> out;
    if (config.scenario == "all") {
        for (const auto& name : scenario_names()) out.push_back(run_scenario(name, config));
    } else {
        out.push_back(run_scenario(config.scenario, config));
    }
    return out;
}

void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows)
{
    for (const auto& row : rows)
        if (row.size() != header.size()) throw std::invalid_argument("emit_csv: ragged row for " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt17(row[i]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path.string());
}

void write_report(const std::filesystem::path& dir, const ScenarioReport& report)
{
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "summary.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
    csv << "criterion,measured,relation,threshold,passed\n";
    for (const auto& r : report.rows)
        csv << r.name << ',' << fmt17(r.measured) << ',' << r.relation << ',' << fmt17(r.threshold) << ','
            << (r.passed ? "true" : "false") << '\n';
    std::ofstream txt(dir / "report.txt", std::ios::binary);
    if (!txt) throw std::runtime_error("cannot write " + (dir / "report.txt").string());
    txt << format_report(report);
}

std::string format_report(const ScenarioReport& report)
{
    std::ostringstream os;
    os << "scenario " << report.scenario << " on " << report.surface << ", grid " << to_string(report.grid) << '\n';
    for (const auto& r : report.rows) {
        char line[256];
        std::snprintf(line, sizeof line, "  %-4s %-36s %.6e %s %.3e\n", r.passed ? "ok" : "FAIL", r.name.c_str(),
                      r.measured, r.relation.c_str(), r.threshold);
        os << line;
    }
    if (!report.error.empty()) os << "  error: " << report.error << '\n';
    char tail[128];
    std::snprintf(tail, sizeof tail, "  %s in %.2f s\n", report.passed() ? "PASS" : "FAIL", report.wall_seconds);
    os << tail;
    return os.str();
}

}  // namespace surfstokes
