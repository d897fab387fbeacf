#pragma once

#include "surfstokes/fields.hpp"
#include "surfstokes/geometry.hpp"

namespace surfstokes {

// Index gymnastics. Vector fields are contravariant everywhere else; these are
// the only places where indices move.
CovectorField lower(const SurfaceChart& chart, const VectorField& u);
VectorField raise(const SurfaceChart& chart, const CovectorField& w);
/// (0,2) -> (1,1) by raising the first index; (1,1) input is returned unchanged.
TensorField to_mixed(const SurfaceChart& chart, const TensorField& t);
/// (1,1) -> (0,2) by lowering the first index; (0,2) input is returned unchanged.
TensorField to_covariant(const SurfaceChart& chart, const TensorField& t);

/// (∇_Σφ)^i = g^{ij} ∂_j φ.
VectorField grad_scalar(const SurfaceChart& chart, const ScalarField& phi);

/// div u = (1/√g) ∂_i(√g u^i).
ScalarField divergence(const SurfaceChart& chart, const VectorField& u);

/// u^j ∂_j f.
ScalarField directional_derivative(const SurfaceChart& chart, const VectorField& u, const ScalarField& f);

/// (∇u)^i_j = ∂_j u^i + Γ^i_{jk} u^k, returned as a (1,1) tensor.
TensorField covariant_derivative(const SurfaceChart& chart, const VectorField& u);

/// (∇_u v)^i = u^j (∇v)^i_j.
VectorField advect(const SurfaceChart& chart, const VectorField& u, const VectorField& v);

/// D_ij = ½(∇_i u_j + ∇_j u_i), returned as a symmetric (0,2) tensor.
TensorField deformation(const SurfaceChart& chart, const VectorField& u);

/// Covariant divergence of a rank-two tensor on its second slot, (div T)^i = ∇_j T^{ij}.
///
/// Implemented as the exact negative adjoint of covariant_derivative under the
/// discrete L² pairings, so that (div T | v)_Σ = −(T : ∇v)_Σ holds to
/// round-off. Accepts either variance.
VectorField covariant_divergence(const SurfaceChart& chart, const TensorField& t);

/// Bochner (connection) Laplacian Δ_Σ u = tr ∇²u, in the self-adjoint form
/// covariant_divergence(covariant_derivative(u)).
VectorField bochner_laplacian(const SurfaceChart& chart, const VectorField& u);

/// Mixed trace T^i_i (raises the first index of a (0,2) tensor first).
ScalarField trace(const SurfaceChart& chart, const TensorField& t);

/// Pointwise g_ij u^i v^j.
Eigen::ArrayXd pointwise_inner(const SurfaceChart& chart, const VectorField& u, const VectorField& v);
/// Pointwise full metric contraction of two tensors of any variance.
Eigen::ArrayXd pointwise_tensor_inner(const SurfaceChart& chart, const TensorField& s, const TensorField& t);

/// (u|v)_Σ = ∫ g_ij u^i v^j dΣ.
double l2_inner(const SurfaceChart& chart, const VectorField& u, const VectorField& v);
double l2_norm(const SurfaceChart& chart, const VectorField& u);
double l2_norm(const SurfaceChart& chart, const ScalarField& f);
double tensor_inner(const SurfaceChart& chart, const TensorField& s, const TensorField& t);
double tensor_norm(const SurfaceChart& chart, const TensorField& t);
/// ‖∇u‖²_{L₂}.
double gradient_norm_sq(const SurfaceChart& chart, const VectorField& u);
/// ‖D_Σ(u)‖²_{L₂}.
double deformation_norm_sq(const SurfaceChart& chart, const VectorField& u);
/// ‖u‖²_{H¹} = ‖u‖²_{L₂} + ‖∇u‖²_{L₂}.
double h1_norm(const SurfaceChart& chart, const VectorField& u);

/// 2/3-rule truncation of every component.
VectorField dealias(const SurfaceChart& chart, const VectorField& u);

}  // namespace surfstokes
