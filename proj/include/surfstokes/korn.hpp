#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "surfstokes/stokes.hpp"

namespace surfstokes {

struct KornResult {
    double constant = 0.0;    ///< C = 1/√λ_min
    double lambda_min = 0.0;  ///< min ‖D(v)‖² / ‖v‖²_{H¹} over the complement
    Eigen::Index complement_dimension = 0;
    Eigen::VectorXd minimizer;  ///< basis coefficients of an extremal field
};

/// Smallest ratio ‖D(v)‖²/‖v‖²_{H¹} over divergence-free v orthogonal to the
/// Killing fields and to any extra excluded fields. Throws std::runtime_error
/// if λ_min <= 1e-10 (a Killing field leaked into the complement).
KornResult korn_constant(const DivFreeBasis& basis, const FormGrams& grams, const KillingBasis& kb,
                         const std::vector<VectorField>& excluded = {});
double korn_constant(const SurfaceChart& chart, const KillingBasis& kb, const DivFreeBasis& basis);

struct KornSampleReport {
    int samples = 0;
    double max_ratio = 0.0;              ///< max ‖u‖²_{H¹}/(‖D(u)‖² + ‖u‖²)
    double max_identity_residual = 0.0;  ///< max |2‖D‖² − ‖∇u‖² + ∫K|u|²| / ‖u‖²_{H¹}
};

/// Random smooth divergence-free fields (seeded). Requires sample_count >= 10.
KornSampleReport korn_intermediate_check(const SurfaceChart& chart, int sample_count, std::uint64_t seed);

/// Largest ‖v‖_{H¹}/‖D(v)‖ over random smooth divergence-free v with their
/// Killing components removed.
double korn_sample_ratio(const SurfaceChart& chart, const KillingBasis& kb, int sample_count, std::uint64_t seed);

}  // namespace surfstokes
