#pragma once

#include "lsl/rom.hpp"
#include "lsl/types.hpp"

namespace lsl {

// Full m-step block Lanczos factorization of A = M^{-1} S:
//   A Q = Q T,  Q^T M Q = I,  q_1 = M^{-1} B R0^{-1},  R0 = (B^T M^{-1} B)^{1/2}.
// T is block tridiagonal with K x K blocks and symmetric.
struct LanczosFactorization {
    Matrix T;
    Matrix Q;
    Matrix R0;
    int K = 0;
    int m = 0;
};

// M-orthonormal block Lanczos with two passes of full reorthogonalization per
// step. Throws on breakdown (no deflation) naming the step.
LanczosFactorization block_lanczos(const Rom& rom);

// Coefficient block (T + lambda I)^{-1} E_1 R0 (mK x K).
Matrix reduced_solve(const LanczosFactorization& f, double lambda);
// Its lambda-derivative, -(T + lambda I)^{-2} E_1 R0.
Matrix reduced_solve_derivative(const LanczosFactorization& f, double lambda);

struct LanczosDiagnostics {
    double orthogonality;       // ||Q^T M Q - I||_F
    double off_band;            // max |T_ij| outside the block band / ||T||_F
    double factorization;       // ||M^{-1} S Q - Q T||_F / ||M^{-1} S Q||_F
    double symmetry;            // ||T - T^T||_F / ||T||_F
    double start_block;         // ||Q E_1 - M^{-1} B R0^{-1}||_F / ||Q E_1||_F
};

LanczosDiagnostics diagnose(const LanczosFactorization& f, const Rom& rom);

}  // namespace lsl
