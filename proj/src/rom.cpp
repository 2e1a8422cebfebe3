#include "lsl/rom.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <sstream>

namespace lsl {

Rom build_rom(const SpectralDataset& d) {
    if (d.K() != d.L()) {
        throw InvalidArgument("rom_builder", "ROM needs square data; apply symmetric_part first");
    }
    const int K = d.K();
    const int m = d.m();
    Rom rom;
    rom.K = K;
    rom.m = m;
    rom.lambdas = d.lambdas();
    rom.M.resize(m * K, m * K);
    rom.S.resize(m * K, m * K);
    rom.B.resize(m * K, K);

    for (int i = 0; i < m; ++i) {
        const auto& pi = d.point(i);
        const double li = pi.lambda;
        rom.B.middleRows(i * K, K) = pi.F;
        for (int j = 0; j < m; ++j) {
            auto mblock = rom.M.block(i * K, j * K, K, K);
            auto sblock = rom.S.block(i * K, j * K, K, K);
            if (i == j) {
                mblock = -pi.dF;
                sblock = pi.F + li * pi.dF;
                continue;
            }
            const auto& pj = d.point(j);
            const double lj = pj.lambda;
            mblock = (pi.F - pj.F) / (lj - li);
            sblock = (lj * pj.F - li * pi.F) / (lj - li);
        }
    }
    rom.M = 0.5 * (rom.M + rom.M.transpose()).eval();
    rom.S = 0.5 * (rom.S + rom.S.transpose()).eval();

    const Eigen::SelfAdjointEigenSolver<Matrix> eig(rom.M, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo < kSpdFloor * hi) {
        std::ostringstream os;
        os << "mass matrix not positive definite (lambda_min = " << lo << ", lambda_max = " << hi
           << "): inconsistent or noisy data, or redundant shifts";
        throw Error("rom_builder", os.str());
    }
    return rom;
}

Matrix rom_transfer(const Rom& rom, double lambda) {
    const Matrix pencil = rom.S + lambda * rom.M;
    const Eigen::FullPivLU<Matrix> lu(pencil);
    if (!lu.isInvertible()) throw Error("rom_builder", "singular pencil S + lambda M");
    const Matrix f = rom.B.transpose() * lu.solve(rom.B);
    return 0.5 * (f + f.transpose());
}

}  // namespace lsl
