#include "lsl/internal_solutions.hpp"

#include "lsl/parallel.hpp"

namespace lsl {

BackgroundModel build_background(const Grid& grid, const ArrayLayout& layout,
                                 std::span<const double> lambdas) {
    layout.validate(grid);
    BackgroundFields solutions = background_model(grid, layout, lambdas);
    SpectralDataset data = solutions.dataset(layout.K);
    Rom rom = build_rom(symmetric_part(data));
    LanczosFactorization lanczos = block_lanczos(rom);

    const int K = layout.K;
    const int m = static_cast<int>(lambdas.size());
    Matrix v0(grid.size(), m * K);
    for (int j = 0; j < m; ++j) {
        v0.middleCols(j * K, K) = solutions.fields[static_cast<std::size_t>(j)].fields.leftCols(K);
    }
    Matrix basis = v0 * lanczos.Q;
    return BackgroundModel{layout,          std::move(solutions), std::move(data), std::move(rom),
                           std::move(lanczos), std::move(v0),      std::move(basis)};
}

InternalFieldSet internal_field(const BackgroundModel& bg, const LanczosFactorization& f,
                                double lambda) {
    if (f.K != bg.K() || f.m != bg.m()) {
        throw InvalidArgument("internal_solutions", "measured ROM and background ROM differ in size");
    }
    InternalFieldSet out;
    out.lambda = lambda;
    out.fields = bg.basis * reduced_solve(f, lambda);
    out.dfields = bg.basis * reduced_solve_derivative(f, lambda);
    return out;
}

std::vector<InternalFieldSet> internal_fields(const BackgroundModel& bg,
                                              const LanczosFactorization& f,
                                              std::span<const double> lambdas) {
    std::vector<InternalFieldSet> out(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t j) { out[j] = internal_field(bg, f, lambdas[j]); });
    return out;
}

namespace {

InternalFieldSet from_fieldset(FieldSet fs, int K) {
    return InternalFieldSet{fs.lambda, fs.fields.leftCols(K), fs.dfields.leftCols(K)};
}

}  // namespace

std::vector<InternalFieldSet> cheated_fields(const Medium& medium, const ArrayLayout& layout,
                                             std::span<const double> lambdas) {
    const DiscreteOperator op = assemble_operator(medium);
    const Matrix g = layout.distributions(medium.grid);
    auto solved = solve_all_shifts(op, lambdas, Matrix(g.leftCols(layout.K)));
    std::vector<InternalFieldSet> out;
    out.reserve(solved.size());
    for (auto& fs : solved) out.push_back(from_fieldset(std::move(fs), layout.K));
    return out;
}

InternalFieldSet cheated_field(const Medium& medium, const ArrayLayout& layout, double lambda) {
    return cheated_fields(medium, layout, std::span<const double>(&lambda, 1)).front();
}

std::vector<InternalFieldSet> born_fields(const BackgroundModel& bg) {
    std::vector<InternalFieldSet> out;
    out.reserve(bg.solutions.fields.size());
    for (const auto& fs : bg.solutions.fields) out.push_back(from_fieldset(fs, bg.K()));
    return out;
}

LanczosFactorization measured_lanczos(const SpectralDataset& d) {
    return block_lanczos(build_rom(symmetric_part(d)));
}

}  // namespace lsl
