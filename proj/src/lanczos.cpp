#include "lsl/lanczos.hpp"

#include "lsl/compensated.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lsl {

namespace {

constexpr double kSqrtFloor = 1e-13;
// A new block whose M-norm falls below this fraction of ||A q_k||_M is
// treated as a breakdown.
constexpr double kBreakdownRatio = 1e-12;

struct SymmetricRoot {
    Matrix root;
    Matrix inverse_root;
};

// Square root of a symmetric positive definite matrix and its inverse via the
// eigendecomposition. Returns false if an eigenvalue is below floor.
bool symmetric_root(const Matrix& a, double floor, SymmetricRoot& out) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
    const Vector& values = eig.eigenvalues();
    if (!(values.minCoeff() > floor)) return false;
    const Matrix& v = eig.eigenvectors();
    out.root = v * values.cwiseSqrt().asDiagonal() * v.transpose();
    out.inverse_root = v * values.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    return true;
}

}  // namespace

// M-inner products and M^{-1} applications go through compensated products
// and refined Cholesky solves: with cond(M) ~ 1e10 plain double arithmetic
// would leave Q^T M Q - I at the 1e-7 level.
LanczosFactorization block_lanczos(const Rom& rom) {
    using compensated::product;
    using compensated::transpose_product;
    const int K = rom.K;
    const int m = rom.m;
    const int n = m * K;
    if (rom.M.rows() != n || rom.S.rows() != n || rom.B.rows() != n || rom.B.cols() != K) {
        throw InvalidArgument("lanczos", "ROM dimensions inconsistent");
    }
    const compensated::RefinedCholesky chol(rom.M);
    if (!chol.ok()) throw Error("lanczos", "mass matrix is not positive definite");

    LanczosFactorization f;
    f.K = K;
    f.m = m;
    f.T = Matrix::Zero(n, n);
    f.Q = Matrix::Zero(n, n);

    const Matrix minv_b = chol.solve(rom.B);
    const Matrix gram = transpose_product(rom.B, minv_b);
    SymmetricRoot r0;
    if (!symmetric_root(gram, kSqrtFloor * gram.trace(), r0)) {
        throw Error("lanczos", "B^T M^{-1} B is rank deficient (step 0)");
    }
    f.R0 = r0.root;
    f.Q.leftCols(K) = minv_b * r0.inverse_root;

    Matrix beta_prev;
    for (int k = 0; k < m; ++k) {
        const Matrix qk = f.Q.middleCols(k * K, K);
        const Matrix s_qk = product(rom.S, qk);
        Matrix w = chol.solve(s_qk);
        Matrix alpha = transpose_product(qk, s_qk);
        alpha = 0.5 * (alpha + alpha.transpose()).eval();
        f.T.block(k * K, k * K, K, K) = alpha;
        if (k + 1 == m) break;

        const double reference = transpose_product(w, s_qk).trace();
        w -= qk * alpha;
        if (k > 0) w -= f.Q.middleCols((k - 1) * K, K) * beta_prev.transpose();
        const Matrix basis = f.Q.leftCols((k + 1) * K);
        for (int pass = 0; pass < 2; ++pass) {
            w -= basis * transpose_product(basis, product(rom.M, w));
        }
        const Matrix norm2 = transpose_product(w, product(rom.M, w));
        SymmetricRoot beta;
        if (!symmetric_root(norm2, kBreakdownRatio * kBreakdownRatio * std::abs(reference), beta)) {
            throw Error("lanczos", "breakdown at step " + std::to_string(k + 1) +
                                       ": new Lanczos block has deficient M-norm");
        }
        f.Q.middleCols((k + 1) * K, K) = w * beta.inverse_root;
        f.T.block((k + 1) * K, k * K, K, K) = beta.root;
        f.T.block(k * K, (k + 1) * K, K, K) = beta.root.transpose();
        beta_prev = beta.root;
    }
    return f;
}

namespace {

Eigen::PartialPivLU<Matrix> shifted_t(const LanczosFactorization& f, double lambda) {
    const Matrix shifted = f.T + lambda * Matrix::Identity(f.T.rows(), f.T.cols());
    // Singular relative to the scale of T and lambda, not of T + lambda I.
    const Eigen::JacobiSVD<Matrix> svd(shifted);
    const double scale = std::max(f.T.norm(), std::abs(lambda));
    if (!(svd.singularValues().minCoeff() > 64 * std::numeric_limits<double>::epsilon() * scale)) {
        throw Error("lanczos", "T + lambda I is singular (lambda is a negated Ritz value)");
    }
    return Eigen::PartialPivLU<Matrix>(shifted);
}

Matrix first_block(const LanczosFactorization& f) {
    Matrix e = Matrix::Zero(f.T.rows(), f.K);
    e.topRows(f.K) = f.R0;
    return e;
}

}  // namespace

Matrix reduced_solve(const LanczosFactorization& f, double lambda) {
    return shifted_t(f, lambda).solve(first_block(f));
}

Matrix reduced_solve_derivative(const LanczosFactorization& f, double lambda) {
    const auto lu = shifted_t(f, lambda);
    return -lu.solve(lu.solve(first_block(f)));
}

LanczosDiagnostics diagnose(const LanczosFactorization& f, const Rom& rom) {
    using compensated::product;
    using compensated::transpose_product;
    const Eigen::Index n = f.Q.rows();
    const int K = f.K;
    LanczosDiagnostics d{};
    d.orthogonality =
        (transpose_product(f.Q, product(rom.M, f.Q)) - Matrix::Identity(n, n)).norm();

    const double tnorm = f.T.norm();
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(i / K - j / K) > 1) off = std::max(off, std::abs(f.T(i, j)));
        }
    }
    d.off_band = tnorm > 0.0 ? off / tnorm : off;
    d.symmetry = tnorm > 0.0 ? (f.T - f.T.transpose()).norm() / tnorm : 0.0;

    const compensated::RefinedCholesky chol(rom.M);
    const Matrix aq = chol.solve(product(rom.S, f.Q));
    d.factorization = relative_frobenius(product(f.Q, f.T), aq);

    const Matrix minv_b = chol.solve(rom.B);
    SymmetricRoot r0;
    if (symmetric_root(f.R0 * f.R0, 0.0, r0)) {
        d.start_block = relative_frobenius(minv_b * r0.inverse_root, f.Q.leftCols(K));
    } else {
        d.start_block = std::numeric_limits<double>::infinity();
    }
    return d;
}

}  // namespace lsl
