#pragma once

#include "lsl/grid.hpp"
#include "lsl/spectral_data.hpp"
#include "lsl/types.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <span>
#include <vector>

namespace lsl {

// Coefficient p sampled at the grid nodes.
struct Medium {
    Grid grid;
    Vector p;

    // Throws on size mismatch or negative values unless allow_negative is set,
    // in which case a warning is printed once per construction.
    Medium(Grid grid, Vector p, bool allow_negative = false);

    static Medium background(const Grid& grid) { return Medium(grid, Vector::Zero(grid.size())); }
};

// Discrete -Laplace + p with homogeneous Neumann conditions. The stored
// stiffness is the operator premultiplied by the quadrature weights W, which
// makes it an ordinary symmetric matrix: A = W^{-1} K, and A is self-adjoint
// in <w, v> = sum_i w_i v_i weight_i.
class DiscreteOperator {
public:
    DiscreteOperator(Grid grid, SparseMatrix stiffness);

    const Grid& grid() const noexcept { return grid_; }
    const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    const Vector& weights() const noexcept { return grid_.weights(); }
    Eigen::Index size() const noexcept { return grid_.size(); }

    // A v.
    Vector apply(const Vector& v) const;

private:
    Grid grid_;
    SparseMatrix stiffness_;
};

// Second-order finite differences with ghost-node Neumann closure, scaled by
// the trapezoidal weights, plus the diagonal W p term.
DiscreteOperator assemble_operator(const Medium& medium);

// Condition estimates above this reject a shift.
inline constexpr double kMaxShiftCondition = 1e14;

// Sparse LU of K + lambda W, reused for every right-hand side at one shift.
class ShiftedSolver {
public:
    ShiftedSolver(const DiscreteOperator& op, double lambda);

    double lambda() const noexcept { return lambda_; }
    // 1-norm condition estimate of K + lambda W.
    double condition_estimate() const noexcept { return cond_; }

    // Solves (A + lambda) X = rhs column by column, refined against a
    // compensated residual until the correction stops shrinking.
    Matrix solve(const Matrix& rhs) const;

private:
    Matrix solve_weighted(const Matrix& weighted_rhs) const;
    // W rhs - (K + lambda W) x, each entry in extended precision.
    Matrix residual(const Matrix& rhs, const Matrix& x) const;

    SparseMatrix stiffness_;
    Vector weights_;
    double lambda_;
    double cond_ = 0.0;
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

// Solutions of (A + lambda) u = g for each column g of `sources`, together
// with du/dlambda, which solves (A + lambda) u' = -u.
struct FieldSet {
    double lambda = 0.0;
    Matrix fields;
    Matrix dfields;
};

FieldSet solve_shifted(const DiscreteOperator& op, double lambda, const Matrix& sources);
// Sources are the K transmitter distributions of the layout.
FieldSet solve_shifted(const DiscreteOperator& op, double lambda, const ArrayLayout& layout);

// Solves at every shift (shifts are independent and may run concurrently).
std::vector<FieldSet> solve_all_shifts(const DiscreteOperator& op, std::span<const double> lambdas,
                                       const Matrix& sources);

// Transfer data F_ir = <g^(r), u^(i)> from fields solved for the first K
// distributions. `fields` must come from solve_all_shifts with at least K
// source columns.
SpectralDataset transfer_data(const Grid& grid, const Matrix& distributions, int K,
                              std::span<const FieldSet> fields);

SpectralDataset synthesize_dataset(const Medium& medium, const ArrayLayout& layout,
                                   std::span<const double> lambdas);

// p = 0 operator and its fields at every shift with all L receivers used as
// sources (column r solves with g^(r)); the first K columns are the
// transmitter snapshots.
struct BackgroundFields {
    DiscreteOperator op;
    Matrix distributions;
    std::vector<FieldSet> fields;

    // Data at the first K sources, all L receivers.
    SpectralDataset dataset(int K) const;
};

BackgroundFields background_model(const Grid& grid, const ArrayLayout& layout,
                                  std::span<const double> lambdas);

}  // namespace lsl
