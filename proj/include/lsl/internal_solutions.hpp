#pragma once

#include "lsl/forward_solver.hpp"
#include "lsl/lanczos.hpp"
#include "lsl/rom.hpp"
#include "lsl/spectral_data.hpp"

#include <span>
#include <vector>

namespace lsl {

// Everything derived from the known p = 0 background at the data shifts.
struct BackgroundModel {
    ArrayLayout layout;
    BackgroundFields solutions;      // all L array elements used as sources
    SpectralDataset data;            // background transfer data, K x L
    Rom rom;                         // from the symmetric part of `data`
    LanczosFactorization lanczos;    // Q0 lives here
    Matrix v0;                       // n x mK snapshots, column j*K + a = u0^(a)(lambda_j)
    Matrix basis;                    // V0 Q0, orthonormal in the quadrature inner product

    const Grid& grid() const noexcept { return solutions.op.grid(); }
    int K() const noexcept { return layout.K; }
    int m() const noexcept { return rom.m; }
};

BackgroundModel build_background(const Grid& grid, const ArrayLayout& layout,
                                 std::span<const double> lambdas);

// Internal field samples for the K sources at one shift.
struct InternalFieldSet {
    double lambda = 0.0;
    Matrix fields;   // n x K
    Matrix dfields;  // n x K
};

// U(lambda) = V0 Q0 (T + lambda)^{-1} E_1 R0 with T, R0 from the measured data,
// and its analytic lambda-derivative.
InternalFieldSet internal_field(const BackgroundModel& bg, const LanczosFactorization& f,
                                double lambda);
std::vector<InternalFieldSet> internal_fields(const BackgroundModel& bg,
                                              const LanczosFactorization& f,
                                              std::span<const double> lambdas);

// Exact forward solutions of the true medium, packaged like internal_field.
// Validation only.
std::vector<InternalFieldSet> cheated_fields(const Medium& medium, const ArrayLayout& layout,
                                             std::span<const double> lambdas);
InternalFieldSet cheated_field(const Medium& medium, const ArrayLayout& layout, double lambda);

// Background solutions of the K sources, packaged like internal_field (the
// Born substitution).
std::vector<InternalFieldSet> born_fields(const BackgroundModel& bg);

// Convenience: symmetric part -> ROM -> Lanczos for measured data.
LanczosFactorization measured_lanczos(const SpectralDataset& d);

}  // namespace lsl
