#pragma once

#include "lsl/forward_solver.hpp"
#include "lsl/internal_solutions.hpp"
#include "lsl/spectral_data.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lsl {

enum class RowKind { Value, Derivative };

struct RowTag {
    int shift;
    int source;
    int receiver;
    RowKind kind;

    bool operator==(const RowTag&) const = default;
};

// delta F = rows * p. One row per measured (shift, source, receiver) entry
// and kind; within the K x K block only source <= receiver is used. Rows are
// ordered by kind (values first), then shift, source, receiver. `basis` is
// empty for the per-node parameterization; otherwise rows act on basis
// coefficients and p = basis * c.
struct LslSystem {
    Matrix rows;
    Vector rhs;
    std::vector<RowTag> row_index;
    Matrix basis;

    Eigen::Index unknowns() const noexcept { return rows.cols(); }
};

// Lexicographic row tags for the measured entries of `d`.
std::vector<RowTag> row_layout(const SpectralDataset& d);

// Rows W = u0^(r) * U^(i) * weight (value) and d/dlambda of the product
// (derivative); rhs = F0 - F and d/dlambda (F0 - F). `background` holds the
// p = 0 fields for all L receivers at each shift, `internal` the K internal
// fields substituted for the unknown solution.
LslSystem assemble(const SpectralDataset& d, const SpectralDataset& d0,
                   std::span<const FieldSet> background, std::span<const InternalFieldSet> internal,
                   const Vector& weights);

// Born linearization: the internal fields are the background fields themselves.
LslSystem assemble_born(const SpectralDataset& d, const SpectralDataset& d0,
                        std::span<const FieldSet> background, const Vector& weights);

// Replaces the node unknowns by coefficients in `basis` (n x q).
LslSystem restrict_basis(const LslSystem& sys, const Matrix& basis);

// Scales every row and its rhs entry to unit row norm. Rows that are
// identically zero are left alone.
LslSystem equilibrate_rows(const LslSystem& sys);

inline constexpr double kDefaultRelThreshold = 1e-3;

// Keep the top `rank` singular triplets if given, else those with
// sigma >= rel_threshold * sigma_max.
struct Truncation {
    std::optional<int> rank;
    double rel_threshold = kDefaultRelThreshold;
};

struct ReconstructionResult {
    Vector p_hat;
    Vector coefficients;
    Vector singular_values;
    int rank_used = 0;
    double residual_norm = 0.0;
};

// Truncated-SVD pseudoinverse of the rectangular system.
ReconstructionResult solve_truncated(const LslSystem& sys, const Truncation& truncation = {});

// Residual ||rows c - rhs|| for every truncation rank 0..min(rows, cols).
std::vector<double> residual_profile(const LslSystem& sys);

}  // namespace lsl
