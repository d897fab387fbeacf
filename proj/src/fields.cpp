#include "surfstokes/fields.hpp"

#include <stdexcept>
#include <string>

namespace surfstokes {

VectorField& VectorField::operator+=(const VectorField& o)
{
    require_same_grid(grid, o.grid, "vector addition");
    comp[0] += o.comp[0];
    comp[1] += o.comp[1];
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o)
{
    require_same_grid(grid, o.grid, "vector subtraction");
    comp[0] -= o.comp[0];
    comp[1] -= o.comp[1];
    return *this;
}

VectorField& VectorField::operator*=(double s)
{
    comp[0] *= s;
    comp[1] *= s;
    return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

VectorField axpy(double s, const VectorField& b, VectorField a)
{
    require_same_grid(a.grid, b.grid, "axpy");
    a.comp[0] += s * b.comp[0];
    a.comp[1] += s * b.comp[1];
    return a;
}

TensorField TensorField::zeros(const Grid& grid, Variance variance)
{
    TensorField t{grid, variance, {}};
    for (auto& row : t.comp)
        for (auto& c : row) c = Eigen::ArrayXd::Zero(grid.size());
    return t;
}

void require_same_grid(const Grid& a, const Grid& b, const char* operation)
{
    if (!(a == b))
        throw std::invalid_argument(std::string(operation) + ": shape mismatch (" + to_string(a) + " vs " +
                                    to_string(b) + ")");
}

bool all_finite(const VectorField& u) { return u.comp[0].allFinite() && u.comp[1].allFinite(); }

}  // namespace surfstokes
