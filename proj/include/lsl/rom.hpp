#pragma once

#include "lsl/spectral_data.hpp"
#include "lsl/types.hpp"

#include <vector>

namespace lsl {

// Data-driven Galerkin system (S + lambda M) C = B on the span of the m
// snapshot blocks. M and S are mK x mK, partitioned into m x m blocks of size
// K x K (block (i, j) couples shifts i and j); B is mK x K.
struct Rom {
    Matrix M;
    Matrix S;
    Matrix B;
    std::vector<double> lambdas;
    int K = 0;
    int m = 0;
};

// build_rom rejects data whose mass matrix has lambda_min(M) below this
// fraction of lambda_max(M).
inline constexpr double kSpdFloor = 1e-12;

// Loewner divided differences of the symmetric data:
//   M(i,j) = (F(l_i) - F(l_j)) / (l_j - l_i),          M(i,i) = -F'(l_i)
//   S(i,j) = (l_j F(l_j) - l_i F(l_i)) / (l_j - l_i),  S(i,i) = F(l_i) + l_i F'(l_i)
//   B(j)   = F(l_j)
// Requires K == L (use symmetric_part first).
Rom build_rom(const SpectralDataset& symmetric_data);

// B^T (S + lambda M)^{-1} B.
Matrix rom_transfer(const Rom& rom, double lambda);

}  // namespace lsl
