#pragma once

#include <cstddef>
#include <numbers>
#include <string>

namespace surfstokes {

/// Equispaced doubly periodic grid on the chart domain [0,2π)².
/// Node (j,l) sits at (2πj/n_theta, 2πl/n_phi) and is stored at j*n_phi + l.
struct Grid {
    int n_theta = 0;
    int n_phi = 0;

    std::size_t size() const { return static_cast<std::size_t>(n_theta) * n_phi; }
    std::size_t index(int j, int l) const { return static_cast<std::size_t>(j) * n_phi + l; }

    double theta(int j) const { return 2.0 * std::numbers::pi * j / n_theta; }
    double phi(int l) const { return 2.0 * std::numbers::pi * l / n_phi; }

    /// Rectangle-rule weight of one node; exact for trigonometric polynomials
    /// of degree below the grid size.
    double cell_area() const { return 4.0 * std::numbers::pi * std::numbers::pi / static_cast<double>(size()); }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws std::invalid_argument unless both sizes are even and at least 8.
void validate_grid(const Grid& grid);

std::string to_string(const Grid& grid);

}  // namespace surfstokes
