#include "surfstokes/fieldcalc.hpp"

#include <cmath>

namespace surfstokes {

namespace {

using Arr = Eigen::ArrayXd;

void check(const SurfaceChart& chart, const Grid& g, const char* op) { require_same_grid(chart.grid(), g, op); }

}  // namespace

CovectorField lower(const SurfaceChart& chart, const VectorField& u)
{
    check(chart, u.grid, "lower");
    CovectorField w{u.grid, {}};
    for (int i = 0; i < 2; ++i) w.comp[i] = chart.g(i, 0) * u.comp[0] + chart.g(i, 1) * u.comp[1];
    return w;
}

VectorField raise(const SurfaceChart& chart, const CovectorField& w)
{
    check(chart, w.grid, "raise");
    VectorField u{w.grid, {}};
    for (int i = 0; i < 2; ++i) u.comp[i] = chart.g_inv(i, 0) * w.comp[0] + chart.g_inv(i, 1) * w.comp[1];
    return u;
}

TensorField to_mixed(const SurfaceChart& chart, const TensorField& t)
{
    check(chart, t.grid, "to_mixed");
    if (t.variance == Variance::Mixed11) return t;
    TensorField m{t.grid, Variance::Mixed11, {}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.comp[i][j] = chart.g_inv(i, 0) * t.comp[0][j] + chart.g_inv(i, 1) * t.comp[1][j];
    return m;
}

TensorField to_covariant(const SurfaceChart& chart, const TensorField& t)
{
    check(chart, t.grid, "to_covariant");
    if (t.variance == Variance::Covariant02) return t;
    TensorField c{t.grid, Variance::Covariant02, {}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c.comp[i][j] = chart.g(i, 0) * t.comp[0][j] + chart.g(i, 1) * t.comp[1][j];
    return c;
}

VectorField grad_scalar(const SurfaceChart& chart, const ScalarField& phi)
{
    check(chart, phi.grid, "grad_scalar");
    CovectorField d{phi.grid, {}};
    chart.spectral().gradient(phi.values, d.comp[0], d.comp[1]);
    return raise(chart, d);
}

ScalarField divergence(const SurfaceChart& chart, const VectorField& u)
{
    check(chart, u.grid, "divergence");
    const auto& ops = chart.spectral();
    const Arr& sg = chart.area_density();
    Arr flux = ops.d_theta(sg * u.comp[0]) + ops.d_phi(sg * u.comp[1]);
    return {u.grid, flux / sg};
}

ScalarField directional_derivative(const SurfaceChart& chart, const VectorField& u, const ScalarField& f)
{
    check(chart, u.grid, "directional_derivative");
    require_same_grid(u.grid, f.grid, "directional_derivative");
    Arr d0, d1;
    chart.spectral().gradient(f.values, d0, d1);
    return {f.grid, u.comp[0] * d0 + u.comp[1] * d1};
}

TensorField covariant_derivative(const SurfaceChart& chart, const VectorField& u)
{
    check(chart, u.grid, "covariant_derivative");
    TensorField t{u.grid, Variance::Mixed11, {}};
    for (int i = 0; i < 2; ++i) {
        chart.spectral().gradient(u.comp[i], t.comp[i][0], t.comp[i][1]);
        for (int j = 0; j < 2; ++j)
            t.comp[i][j] += chart.christoffel(i, j, 0) * u.comp[0] + chart.christoffel(i, j, 1) * u.comp[1];
    }
    return t;
}

VectorField advect(const SurfaceChart& chart, const VectorField& u, const VectorField& v)
{
    require_same_grid(u.grid, v.grid, "advect");
    const TensorField dv = covariant_derivative(chart, v);
    VectorField out{u.grid, {}};
    for (int i = 0; i < 2; ++i) out.comp[i] = u.comp[0] * dv.comp[i][0] + u.comp[1] * dv.comp[i][1];
    return out;
}

TensorField deformation(const SurfaceChart& chart, const VectorField& u)
{
    const TensorField lowered = to_covariant(chart, covariant_derivative(chart, u));
    TensorField d{u.grid, Variance::Covariant02, {}};
    d.comp[0][0] = lowered.comp[0][0];
    d.comp[1][1] = lowered.comp[1][1];
    d.comp[0][1] = 0.5 * (lowered.comp[0][1] + lowered.comp[1][0]);
    d.comp[1][0] = d.comp[0][1];
    return d;
}

VectorField covariant_divergence(const SurfaceChart& chart, const TensorField& t)
{
    // With Q_k^l = √g g_ki g^{jl} T^i_j the discrete pairing is
    //   (T : ∇v) = Σ_nodes w Q_k^l (∂_l v^k + Γ^k_lm v^m) = Σ_nodes w v^k c_k,
    //   c_k = −∂_l Q_k^l + Q_m^l Γ^m_lk,
    // using that the spectral derivative is antisymmetric. Raising −c/√g
    // gives the field whose L² pairing with v is −(T : ∇v).
    const TensorField m = to_mixed(chart, t);
    const auto& ops = chart.spectral();
    const Arr& sg = chart.area_density();

    std::array<std::array<Arr, 2>, 2> q;  // q[k][l] = Q_k^l
    for (int k = 0; k < 2; ++k) {
        std::array<Arr, 2> a;  // a[j] = g_ki T^i_j
        for (int j = 0; j < 2; ++j) a[j] = chart.g(k, 0) * m.comp[0][j] + chart.g(k, 1) * m.comp[1][j];
        for (int l = 0; l < 2; ++l) q[k][l] = sg * (a[0] * chart.g_inv(0, l) + a[1] * chart.g_inv(1, l));
    }

    CovectorField c{t.grid, {}};
    for (int k = 0; k < 2; ++k) {
        Arr ck = -(ops.d_theta(q[k][0]) + ops.d_phi(q[k][1]));
        for (int mm = 0; mm < 2; ++mm)
            for (int l = 0; l < 2; ++l) ck += q[mm][l] * chart.christoffel(mm, l, k);
        c.comp[k] = -ck / sg;
    }
    return raise(chart, c);
}

VectorField bochner_laplacian(const SurfaceChart& chart, const VectorField& u)
{
    return covariant_divergence(chart, covariant_derivative(chart, u));
}

ScalarField trace(const SurfaceChart& chart, const TensorField& t)
{
    const TensorField m = to_mixed(chart, t);
    return {t.grid, m.comp[0][0] + m.comp[1][1]};
}

Eigen::ArrayXd pointwise_inner(const SurfaceChart& chart, const VectorField& u, const VectorField& v)
{
    check(chart, u.grid, "pointwise_inner");
    require_same_grid(u.grid, v.grid, "pointwise_inner");
    return chart.g(0, 0) * u.comp[0] * v.comp[0] + chart.g(0, 1) * (u.comp[0] * v.comp[1] + u.comp[1] * v.comp[0]) +
           chart.g(1, 1) * u.comp[1] * v.comp[1];
}

Eigen::ArrayXd pointwise_tensor_inner(const SurfaceChart& chart, const TensorField& s, const TensorField& t)
{
    require_same_grid(s.grid, t.grid, "pointwise_tensor_inner");
    // Contract S_kj (covariant) against T^k_l raised on the second slot: g^{jl} S_kj T^k_l.
    const TensorField sc = to_covariant(chart, s);
    const TensorField tm = to_mixed(chart, t);
    Arr acc = Arr::Zero(s.grid.size());
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l) acc += chart.g_inv(j, l) * sc.comp[k][j] * tm.comp[k][l];
    return acc;
}

double l2_inner(const SurfaceChart& chart, const VectorField& u, const VectorField& v)
{
    return integrate_scalar(chart, pointwise_inner(chart, u, v));
}

double l2_norm(const SurfaceChart& chart, const VectorField& u) { return std::sqrt(l2_inner(chart, u, u)); }

double l2_norm(const SurfaceChart& chart, const ScalarField& f)
{
    return std::sqrt(integrate_scalar(chart, f.values * f.values));
}

double tensor_inner(const SurfaceChart& chart, const TensorField& s, const TensorField& t)
{
    return integrate_scalar(chart, pointwise_tensor_inner(chart, s, t));
}

double tensor_norm(const SurfaceChart& chart, const TensorField& t) { return std::sqrt(tensor_inner(chart, t, t)); }

double gradient_norm_sq(const SurfaceChart& chart, const VectorField& u)
{
    const TensorField t = covariant_derivative(chart, u);
    return tensor_inner(chart, t, t);
}

double deformation_norm_sq(const SurfaceChart& chart, const VectorField& u)
{
    const TensorField d = deformation(chart, u);
    return tensor_inner(chart, d, d);
}

double h1_norm(const SurfaceChart& chart, const VectorField& u)
{
    return std::sqrt(l2_inner(chart, u, u) + gradient_norm_sq(chart, u));
}

VectorField dealias(const SurfaceChart& chart, const VectorField& u)
{
    check(chart, u.grid, "dealias");
    return {u.grid, {chart.spectral().dealias(u.comp[0]), chart.spectral().dealias(u.comp[1])}};
}

}  // namespace surfstokes
