#include "lsl/validation.hpp"

#include "lsl/internal_solutions.hpp"
#include "lsl/lanczos.hpp"
#include "lsl/lsl_system.hpp"
#include "lsl/rom.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace lsl::validation {

std::vector<double> random_shifts(std::mt19937_64& rng, int count, const InstanceLimits& limits) {
    const double lo = std::log(limits.lambda_min);
    const double hi = std::log(limits.lambda_max);
    const double gap = std::log(limits.min_shift_ratio);
    if (count < 1 || (count - 1) * gap > hi - lo) {
        throw InvalidArgument("validate", "cannot place that many separated shifts in the range");
    }
    // Uniform points in the range shrunk by the total gap, then spread out:
    // sorted order statistics plus k * gap keep the spacing exact.
    std::uniform_real_distribution<double> u(0.0, hi - lo - (count - 1) * gap);
    std::vector<double> t(static_cast<std::size_t>(count));
    for (double& x : t) x = u(rng);
    std::sort(t.begin(), t.end());
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(std::exp(lo + t[static_cast<std::size_t>(k)] + k * gap));
    return out;
}

Instance random_instance(std::mt19937_64& rng, const InstanceLimits& limits) {
    std::uniform_int_distribution<int> nodes(limits.min_nodes, limits.max_nodes);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = nodes(rng);
    const double length = 1.0;
    const Grid grid = Grid::line(length, n);

    Vector p = Vector::Constant(n, 0.2 * limits.max_p * unit(rng));
    const int bars = 1 + static_cast<int>(rng() % 3);
    for (int b = 0; b < bars; ++b) {
        const double a = unit(rng) * length;
        const double w = (0.05 + 0.25 * unit(rng)) * length;
        const double h = 0.8 * limits.max_p * unit(rng);
        for (int i = 0; i < n; ++i) {
            const double x = grid.coordinate(i)[0];
            if (x >= a && x <= a + w) p(i) += h;
        }
    }
    p = p.cwiseMin(limits.max_p);

    const int K = 1 + static_cast<int>(rng() % static_cast<unsigned>(limits.max_sources));
    const int L = K + static_cast<int>(rng() % static_cast<unsigned>(limits.max_extra_receivers + 1));
    std::vector<int> slots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) slots[static_cast<std::size_t>(i)] = i;
    std::shuffle(slots.begin(), slots.end(), rng);
    ArrayLayout layout;
    layout.K = K;
    for (int r = 0; r < L; ++r) layout.receivers.push_back(grid.coordinate(slots[static_cast<std::size_t>(r)]));

    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(limits.max_shifts));
    return Instance{Medium(grid, std::move(p)), std::move(layout), random_shifts(rng, m, limits)};
}

bool Report::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

struct Tracker {
    Check check;

    Tracker(std::string name, double tolerance) {
        check.name = std::move(name);
        check.tolerance = tolerance;
    }
    void record(double value) {
        if (!(value <= check.tolerance)) check.passed = false;
        if (!(value <= check.worst)) check.worst = value;
    }
};

// Snapshot Gram matrices <u_i, u_j> and <grad u_i, grad u_j> + <p u_i, u_j>
// in the discrete bilinear forms, ordered like the ROM blocks.
std::pair<Matrix, Matrix> snapshot_gram(const DiscreteOperator& op, const std::vector<FieldSet>& fields,
                                        int K) {
    const Eigen::Index n = op.size();
    Matrix V(n, static_cast<Eigen::Index>(fields.size()) * K);
    for (std::size_t j = 0; j < fields.size(); ++j) {
        V.middleCols(static_cast<Eigen::Index>(j) * K, K) = fields[j].fields.leftCols(K);
    }
    const Matrix M = V.transpose() * op.weights().asDiagonal() * V;
    const Matrix S = V.transpose() * (op.stiffness() * V);
    return {M, S};
}

double max_pencil_mismatch(const Rom& rom, const LanczosFactorization& f) {
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::GeneralizedSelfAdjointEigenSolver<LMatrix> pencil(rom.S.cast<long double>(),
                                                             rom.M.cast<long double>());
    Eigen::SelfAdjointEigenSolver<Matrix> t(f.T);
    const auto& a = pencil.eigenvalues();
    const auto& b = t.eigenvalues();
    const double scale = static_cast<double>(a.cwiseAbs().maxCoeff());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::abs(static_cast<double>(a(k)) - b(k)) / scale);
    }
    return worst;
}

SpectralDataset perturb_extended(const SpectralDataset& d, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<SpectralPoint> points = d.points();
    for (auto& pt : points) {
        for (Eigen::Index i = 0; i < pt.F.rows(); ++i) {
            for (Eigen::Index r = d.K(); r < pt.F.cols(); ++r) {
                pt.F(i, r) *= 1.0 + 0.5 * noise(rng);
                pt.dF(i, r) += noise(rng);
            }
        }
    }
    return SpectralDataset(std::move(points), d.K(), d.L(), d.masks());
}

}  // namespace

Report run_suite(int instances, unsigned seed) {
    std::mt19937_64 rng(seed);
    Tracker gram_m("loewner_gram_M", 1e-10);
    Tracker gram_s("loewner_gram_S", 1e-10);
    Tracker reciprocity("reciprocity", 1e-12);
    Tracker interp("rom_interpolation", 1e-8);
    Tracker interp_d("rom_interpolation_derivative", 1e-6);
    Tracker orth("lanczos_orthogonality", 1e-10);
    Tracker band("lanczos_off_band", 1e-12);
    Tracker fact("lanczos_factorization", 1e-9);
    Tracker eig("lanczos_pencil_eigenvalues", 1e-9);
    Tracker exact("background_exactness", 1e-8);
    Tracker subset("symmetric_subset", 0.0);
    Tracker cheated("cheated_identity", 1e-8);

    const InstanceLimits limits;
    for (int t = 0; t < instances; ++t) {
        const Instance inst = random_instance(rng, limits);
        const Grid& grid = inst.medium.grid;
        const std::span<const double> lambdas(inst.lambdas);

        const SpectralDataset data = synthesize_dataset(inst.medium, inst.layout, lambdas);
        const DiscreteOperator op = assemble_operator(inst.medium);
        const Matrix g = inst.layout.distributions(grid);
        const auto fields = solve_all_shifts(op, lambdas, g.leftCols(inst.layout.K));
        const auto all_fields = solve_all_shifts(op, lambdas, g);

        for (const auto& fs : all_fields) {
            const Matrix full = g.transpose() * grid.weights().asDiagonal() * fs.fields;
            reciprocity.record(relative_frobenius(full, full.transpose()));
        }

        const Rom rom = build_rom(symmetric_part(data));
        const auto [M, S] = snapshot_gram(op, fields, inst.layout.K);
        gram_m.record(relative_frobenius(rom.M, M));
        gram_s.record(relative_frobenius(rom.S, S));

        const double h = 1e-5;
        for (int j = 0; j < data.m(); ++j) {
            const auto& pt = data.point(j);
            const Matrix Fs = pt.F.leftCols(data.K());
            const Matrix dFs = pt.dF.leftCols(data.K());
            interp.record(relative_frobenius(rom_transfer(rom, pt.lambda), Fs));
            const Matrix cd = (rom_transfer(rom, pt.lambda + h) - rom_transfer(rom, pt.lambda - h)) / (2 * h);
            interp_d.record(relative_frobenius(cd, dFs));
        }

        const LanczosFactorization f = block_lanczos(rom);
        const LanczosDiagnostics diag = diagnose(f, rom);
        orth.record(diag.orthogonality);
        band.record(diag.off_band);
        fact.record(diag.factorization);
        eig.record(max_pencil_mismatch(rom, f));

        // Background exactness: data from p = 0 reproduces the snapshots.
        const BackgroundModel bg = build_background(grid, inst.layout, lambdas);
        {
            const auto u = internal_fields(bg, measured_lanczos(bg.data), lambdas);
            for (std::size_t j = 0; j < u.size(); ++j) {
                const Matrix truth = bg.solutions.fields[j].fields.leftCols(inst.layout.K);
                exact.record(relative_frobenius(u[j].fields, truth));
            }
        }

        // Extended columns never reach the internal fields.
        if (data.L() > data.K()) {
            const auto a = internal_fields(bg, measured_lanczos(data), lambdas);
            const auto b = internal_fields(bg, measured_lanczos(perturb_extended(data, rng)), lambdas);
            for (std::size_t j = 0; j < a.size(); ++j) {
                const bool same = (a[j].fields.array() == b[j].fields.array()).all() &&
                                  (a[j].dfields.array() == b[j].dfields.array()).all();
                subset.record(same ? 0.0 : 1.0);
            }
        }

        {
            const auto exact_fields = cheated_fields(inst.medium, inst.layout, lambdas);
            const LslSystem sys = assemble(data, bg.data, bg.solutions.fields, exact_fields, grid.weights());
            cheated.record(relative_frobenius(sys.rows * inst.medium.p, sys.rhs));
        }
    }

    Report report;
    for (auto* t : {&gram_m, &gram_s, &reciprocity, &interp, &interp_d, &orth, &band, &fact, &eig, &exact,
                    &subset, &cheated}) {
        report.checks.push_back(t->check);
    }
    return report;
}

}  // namespace lsl::validation
