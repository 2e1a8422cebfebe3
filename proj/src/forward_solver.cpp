#include "lsl/forward_solver.hpp"

#include "lsl/compensated.hpp"
#include "lsl/parallel.hpp"
#include "lsl/simd.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace lsl {

Medium::Medium(Grid g, Vector coefficient, bool allow_negative)
    : grid(std::move(g)), p(std::move(coefficient)) {
    if (p.size() != grid.size()) throw InvalidArgument("medium", "coefficient size != grid size");
    if (!p.allFinite()) throw InvalidArgument("medium", "non-finite coefficient");
    if (p.size() > 0 && p.minCoeff() < 0.0) {
        if (!allow_negative) throw InvalidArgument("medium", "negative coefficient (p >= 0 required)");
        std::cerr << "warning: medium has negative coefficient values; the shifted operator "
                     "may be indefinite\n";
    }
}

DiscreteOperator::DiscreteOperator(Grid grid, SparseMatrix stiffness)
    : grid_(std::move(grid)), stiffness_(std::move(stiffness)) {
    if (stiffness_.rows() != grid_.size() || stiffness_.cols() != grid_.size()) {
        throw InvalidArgument("forward_solver", "stiffness size != grid size");
    }
    stiffness_.makeCompressed();
}

Vector DiscreteOperator::apply(const Vector& v) const {
    return (stiffness_ * v).cwiseQuotient(weights());
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Weighted 1D Neumann Laplacian: h * (ghost-node second difference) with half
// weights at the ends, i.e. the symmetric matrix with rows (1, -1)/h at the
// boundary and (-1, 2, -1)/h inside.
std::vector<Triplet> laplacian_1d(int n, double h) {
    std::vector<Triplet> t;
    if (n < 2) return t;
    const double c = 1.0 / h;
    for (int i = 0; i + 1 < n; ++i) {
        t.emplace_back(i, i, c);
        t.emplace_back(i + 1, i + 1, c);
        t.emplace_back(i, i + 1, -c);
        t.emplace_back(i + 1, i, -c);
    }
    return t;
}

Vector axis_weights(const Grid& grid, int axis) {
    const int n = grid.nodes()[axis];
    if (n == 1) return Vector::Constant(1, grid.extents()[axis] > 0.0 ? grid.extents()[axis] : 1.0);
    const double h = grid.spacing(axis);
    Vector w = Vector::Constant(n, h);
    w(0) = w(n - 1) = 0.5 * h;
    return w;
}

}  // namespace

DiscreteOperator assemble_operator(const Medium& medium) {
    const Grid& grid = medium.grid;
    const Eigen::Index n = grid.size();
    std::vector<Triplet> triplets;
    if (grid.dimension() == 1) {
        triplets = laplacian_1d(grid.nx(), grid.spacing(0));
    } else {
        const int nx = grid.nx();
        const int ny = grid.ny();
        const Vector wx = axis_weights(grid, 0);
        const Vector wy = axis_weights(grid, 1);
        for (const auto& t : laplacian_1d(nx, grid.spacing(0))) {
            for (int iy = 0; iy < ny; ++iy) {
                triplets.emplace_back(grid.index(t.row(), iy), grid.index(t.col(), iy), t.value() * wy(iy));
            }
        }
        for (const auto& t : laplacian_1d(ny, grid.spacing(1))) {
            for (int ix = 0; ix < nx; ++ix) {
                triplets.emplace_back(grid.index(ix, t.row()), grid.index(ix, t.col()), t.value() * wx(ix));
            }
        }
    }
    const Vector& w = grid.weights();
    for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, w(i) * medium.p(i));
    SparseMatrix k(n, n);
    k.setFromTriplets(triplets.begin(), triplets.end());
    return DiscreteOperator(grid, std::move(k));
}

// ---------------------------------------------------------------------------

namespace {

// Hager's 1-norm estimate of ||H^{-1}||_1 for symmetric H.
template <class Solve>
double inverse_norm1_estimate(Eigen::Index n, const Solve& solve) {
    Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
    double estimate = 0.0;
    Eigen::Index last = -1;
    for (int iter = 0; iter < 5; ++iter) {
        const Vector y = solve(x);
        estimate = y.lpNorm<1>();
        const Vector xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        const Vector z = solve(xi);
        Eigen::Index j = 0;
        const double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= z.dot(x) || j == last) break;
        x.setZero();
        x(j) = 1.0;
        last = j;
    }
    // Higham's alternating test vector guards against the rare underestimate.
    Vector alt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        alt(i) = sign * (1.0 + static_cast<double>(i) / std::max<Eigen::Index>(n - 1, 1));
    }
    const Vector alt_solution = solve(alt);
    const double alt_estimate = 2.0 * alt_solution.lpNorm<1>() / (3.0 * static_cast<double>(n));
    return std::max(estimate, alt_estimate);
}

double norm1(const SparseMatrix& a) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
        double col = 0.0;
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
        best = std::max(best, col);
    }
    return best;
}

}  // namespace

ShiftedSolver::ShiftedSolver(const DiscreteOperator& op, double lambda)
    : stiffness_(op.stiffness()), weights_(op.weights()), lambda_(lambda), lu_(std::make_unique<Eigen::SparseLU<SparseMatrix>>()) {
    SparseMatrix shifted = op.stiffness();
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += lambda * weights_(i);
    shifted.makeCompressed();
    lu_->analyzePattern(shifted);
    lu_->factorize(shifted);
    if (lu_->info() != Eigen::Success) {
        throw ShiftTooCloseToSpectrum(lambda, std::numeric_limits<double>::infinity());
    }
    const double inv = inverse_norm1_estimate(shifted.rows(), [&](const Vector& v) {
        return Vector(lu_->solve(v));
    });
    cond_ = norm1(shifted) * inv;
    if (!std::isfinite(cond_) || cond_ > kMaxShiftCondition) throw ShiftTooCloseToSpectrum(lambda, cond_);
}

Matrix ShiftedSolver::solve_weighted(const Matrix& weighted_rhs) const {
    Matrix x = lu_->solve(weighted_rhs);
    if (lu_->info() != Eigen::Success) throw Error("forward_solver", "sparse solve failed");
    return x;
}

Matrix ShiftedSolver::residual(const Matrix& rhs, const Matrix& x) const {
    Matrix r(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            compensated::Accumulator acc;
            acc.add_product(weights_(i), rhs(i, j));
            // K is symmetric, so column i doubles as row i.
            for (SparseMatrix::InnerIterator it(stiffness_, i); it; ++it) acc.add_product(-it.value(), x(it.row(), j));
            const double lw = lambda_ * weights_(i);
            acc.add_product(-lw, x(i, j));
            acc.add_product(-std::fma(lambda_, weights_(i), -lw), x(i, j));
            r(i, j) = acc.value();
        }
    }
    return r;
}

Matrix ShiftedSolver::solve(const Matrix& rhs) const {
    if (rhs.rows() != weights_.size()) throw InvalidArgument("forward_solver", "rhs size mismatch");
    Matrix x = solve_weighted(weights_.asDiagonal() * rhs);
    double last = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 4; ++iter) {
        const Matrix d = solve_weighted(residual(rhs, x));
        const double step = d.norm();
        if (!(step < last)) break;
        x += d;
        last = step;
        if (step <= std::numeric_limits<double>::epsilon() * x.norm()) break;
    }
    return x;
}

FieldSet solve_shifted(const DiscreteOperator& op, double lambda, const Matrix& sources) {
    const ShiftedSolver solver(op, lambda);
    FieldSet out;
    out.lambda = lambda;
    out.fields = solver.solve(sources);
    out.dfields = -solver.solve(out.fields);
    return out;
}

FieldSet solve_shifted(const DiscreteOperator& op, double lambda, const ArrayLayout& layout) {
    const Matrix g = layout.distributions(op.grid());
    return solve_shifted(op, lambda, Matrix(g.leftCols(layout.K)));
}

std::vector<FieldSet> solve_all_shifts(const DiscreteOperator& op, std::span<const double> lambdas,
                                       const Matrix& sources) {
    std::vector<FieldSet> out(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t j) { out[j] = solve_shifted(op, lambdas[j], sources); });
    return out;
}

SpectralDataset transfer_data(const Grid& grid, const Matrix& distributions, int K,
                              std::span<const FieldSet> fields) {
    const Eigen::Index L = distributions.cols();
    const std::span<const double> w(grid.weights().data(), static_cast<std::size_t>(grid.size()));
    auto column = [&](const Matrix& x, Eigen::Index c) {
        return std::span<const double>(x.col(c).data(), static_cast<std::size_t>(x.rows()));
    };
    std::vector<SpectralPoint> points;
    points.reserve(fields.size());
    for (const auto& fs : fields) {
        if (fs.fields.cols() < K) throw InvalidArgument("forward_solver", "fewer fields than sources");
        SpectralPoint p{fs.lambda, Matrix(K, L), Matrix(K, L)};
        for (int i = 0; i < K; ++i) {
            for (Eigen::Index r = 0; r < L; ++r) {
                p.F(i, r) = simd::weighted_dot(column(distributions, r), column(fs.fields, i), w);
                p.dF(i, r) = simd::weighted_dot(column(distributions, r), column(fs.dfields, i), w);
            }
        }
        // Reciprocity holds exactly in exact arithmetic; remove solver round-off.
        const Matrix fb = p.F.leftCols(K);
        const Matrix db = p.dF.leftCols(K);
        p.F.leftCols(K) = 0.5 * (fb + fb.transpose());
        p.dF.leftCols(K) = 0.5 * (db + db.transpose());
        points.push_back(std::move(p));
    }
    return SpectralDataset(std::move(points), K, static_cast<int>(L));
}

SpectralDataset synthesize_dataset(const Medium& medium, const ArrayLayout& layout,
                                   std::span<const double> lambdas) {
    const DiscreteOperator op = assemble_operator(medium);
    const Matrix g = layout.distributions(medium.grid);
    const auto fields = solve_all_shifts(op, lambdas, Matrix(g.leftCols(layout.K)));
    return transfer_data(medium.grid, g, layout.K, fields);
}

SpectralDataset BackgroundFields::dataset(int K) const {
    return transfer_data(op.grid(), distributions, K, fields);
}

BackgroundFields background_model(const Grid& grid, const ArrayLayout& layout,
                                  std::span<const double> lambdas) {
    DiscreteOperator op = assemble_operator(Medium::background(grid));
    Matrix g = layout.distributions(grid);
    auto fields = solve_all_shifts(op, lambdas, g);
    return BackgroundFields{std::move(op), std::move(g), std::move(fields)};
}

}  // namespace lsl
