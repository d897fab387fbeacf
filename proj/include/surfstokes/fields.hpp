#pragma once

#include <array>

#include <Eigen/Core>

#include "surfstokes/grid.hpp"

namespace surfstokes {

/// Grid-sampled scalar.
struct ScalarField {
    Grid grid;
    Eigen::ArrayXd values;

    static ScalarField zeros(const Grid& grid) { return {grid, Eigen::ArrayXd::Zero(grid.size())}; }
    static ScalarField constant(const Grid& grid, double c) { return {grid, Eigen::ArrayXd::Constant(grid.size(), c)}; }
};

/// Tangent vector field stored by contravariant components u^1 (θ), u^2 (φ).
struct VectorField {
    Grid grid;
    std::array<Eigen::ArrayXd, 2> comp;

    static VectorField zeros(const Grid& grid)
    {
        return {grid, {Eigen::ArrayXd::Zero(grid.size()), Eigen::ArrayXd::Zero(grid.size())}};
    }
    static VectorField constant(const Grid& grid, double u1, double u2)
    {
        return {grid, {Eigen::ArrayXd::Constant(grid.size(), u1), Eigen::ArrayXd::Constant(grid.size(), u2)}};
    }

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);
/// a + s·b without temporaries at the call site.
VectorField axpy(double s, const VectorField& b, VectorField a);

/// One-form stored by covariant components u_1, u_2.
struct CovectorField {
    Grid grid;
    std::array<Eigen::ArrayXd, 2> comp;
};

enum class Variance {
    Mixed11,     ///< T^i_j
    Covariant02  ///< T_ij
};

/// Rank-two tensor; comp[i][j] holds T^i_j or T_ij depending on variance.
struct TensorField {
    Grid grid;
    Variance variance = Variance::Mixed11;
    std::array<std::array<Eigen::ArrayXd, 2>, 2> comp;

    static TensorField zeros(const Grid& grid, Variance variance);
};

/// Throws std::invalid_argument naming the operation when grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* operation);

bool all_finite(const VectorField& u);

}  // namespace surfstokes
