#pragma once

// Shared oracles for the unit tests. Everything here is built from the
// finite-difference formulas directly, without going through the library's
// assembly, so it can serve as an independent reference.

#include "lsl/forward_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace lsl::test {

// Dense stiffness K (symmetric, includes W p) and weights for a grid.
struct DenseOperator {
    Matrix K;
    Vector w;
};

inline Vector axis_weights(int n, double h, double length) {
    if (n == 1) return Vector::Constant(1, length);
    Vector w = Vector::Constant(n, h);
    w(0) = w(n - 1) = h / 2;
    return w;
}

inline Matrix axis_stiffness(int n, double h) {
    Matrix k = Matrix::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        k(i, i) += 1 / h;
        k(i + 1, i + 1) += 1 / h;
        k(i, i + 1) -= 1 / h;
        k(i + 1, i) -= 1 / h;
    }
    return k;
}

inline DenseOperator dense_operator(const Grid& g, const Vector& p) {
    const int nx = g.nx();
    const int ny = g.ny();
    const double hx = nx > 1 ? g.extents()[0] / (nx - 1) : g.extents()[0];
    const Vector wx = axis_weights(nx, hx, g.extents()[0]);
    const Matrix kx = axis_stiffness(nx, hx);
    DenseOperator op;
    if (g.dimension() == 1) {
        op.w = wx;
        op.K = kx;
    } else {
        const double hy = ny > 1 ? g.extents()[1] / (ny - 1) : g.extents()[1];
        const Vector wy = axis_weights(ny, hy, g.extents()[1]);
        const Matrix ky = axis_stiffness(ny, hy);
        const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;
        op.K = Matrix::Zero(n, n);
        op.w = Vector(n);
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const Eigen::Index a = ix + static_cast<Eigen::Index>(nx) * iy;
                op.w(a) = wx(ix) * wy(iy);
                for (int jy = 0; jy < ny; ++jy) {
                    for (int jx = 0; jx < nx; ++jx) {
                        const Eigen::Index b = jx + static_cast<Eigen::Index>(nx) * jy;
                        double v = 0.0;
                        if (iy == jy) v += kx(ix, jx) * wy(iy);
                        if (ix == jx) v += wx(ix) * ky(iy, jy);
                        op.K(a, b) = v;
                    }
                }
            }
        }
    }
    op.K.diagonal() += op.w.cwiseProduct(p);
    return op;
}

// Same operator, sparse, assembled as the Kronecker sum of the axis matrices.
// For desk-scale 2D grids where the dense form no longer fits.
struct SparseOperator {
    SparseMatrix K;
    Vector w;
};

inline SparseOperator sparse_operator(const Grid& g, const Vector& p) {
    const int nx = g.nx();
    const int ny = g.ny();
    const double hx = nx > 1 ? g.extents()[0] / (nx - 1) : g.extents()[0];
    const Vector wx = axis_weights(nx, hx, g.extents()[0]);
    const Matrix kx = axis_stiffness(nx, hx);
    Vector wy = Vector::Ones(1);
    Matrix ky = Matrix::Zero(1, 1);
    if (g.dimension() == 2) {
        const double hy = ny > 1 ? g.extents()[1] / (ny - 1) : g.extents()[1];
        wy = axis_weights(ny, hy, g.extents()[1]);
        ky = axis_stiffness(ny, hy);
    }
    const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;
    std::vector<Eigen::Triplet<double>> t;
    SparseOperator op;
    op.w = Vector(n);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const Eigen::Index a = ix + static_cast<Eigen::Index>(nx) * iy;
            op.w(a) = wx(ix) * wy(iy);
            for (int jx = std::max(0, ix - 1); jx <= std::min(nx - 1, ix + 1); ++jx)
                t.emplace_back(a, jx + static_cast<Eigen::Index>(nx) * iy, kx(ix, jx) * wy(iy));
            for (int jy = std::max(0, iy - 1); jy <= std::min(ny - 1, iy + 1); ++jy)
                t.emplace_back(a, ix + static_cast<Eigen::Index>(nx) * jy, wx(ix) * ky(iy, jy));
            t.emplace_back(a, a, op.w(a) * p(a));
        }
    }
    op.K.resize(n, n);
    op.K.setFromTriplets(t.begin(), t.end());
    return op;
}

inline Matrix sparse_solve(const SparseOperator& op, double lambda, const Matrix& g) {
    SparseMatrix h = op.K;
    for (Eigen::Index i = 0; i < h.rows(); ++i) h.coeffRef(i, i) += lambda * op.w(i);
    h.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu(h);
    return lu.solve(Matrix(op.w.asDiagonal() * g));
}

// (A + lambda) U = G solved densely: (K + lambda W) U = W G.
inline Matrix dense_solve(const DenseOperator& op, double lambda, const Matrix& g) {
    Matrix h = op.K;
    h.diagonal() += lambda * op.w;
    return h.fullPivLu().solve(op.w.asDiagonal() * g);
}

// Nodal delta normalized to unit quadrature integral.
inline Vector nodal_source(const Grid& g, Eigen::Index node) {
    Vector v = Vector::Zero(g.size());
    v(node) = 1.0 / g.weights()(node);
    return v;
}

inline Vector random_profile(std::mt19937_64& rng, Eigen::Index n, double max) {
    std::uniform_real_distribution<double> u(0.0, max);
    Vector p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = u(rng);
    return p;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lsl_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace lsl::test
