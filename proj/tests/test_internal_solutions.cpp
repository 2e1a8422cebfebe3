#include "lsl/internal_solutions.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace lsl;

namespace {

struct Setup {
    Grid grid;
    ArrayLayout layout;
    std::vector<double> lambdas;
};

Setup surface_setup() {
    ArrayLayout layout;
    layout.K = 2;
    layout.receivers = {{0.8, 1.0}, {1.6, 1.0}, {0.2, 1.0}, {1.2, 1.0}, {2.2, 1.0}};
    return {Grid::rectangle(2.4, 1.0, 37, 16), layout, {1, 2, 14, 50, 128}};
}

Setup line_setup() {
    ArrayLayout layout;
    layout.K = 1;
    layout.receivers = {{0.0, 0.0}, {1.0, 0.0}};
    return {Grid::line(1.0, 101), layout, {1, 2, 14, 50, 128, 262.2672}};
}

Vector two_bars(const Grid& g) {
    Vector p = Vector::Zero(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double x = g.coordinate(i)[0];
        if ((x >= 0.15 && x <= 0.3) || (x >= 0.6 && x <= 0.8)) p(i) = 1.0;
    }
    return p;
}

}  // namespace

TEST_CASE("background basis is orthonormal in the quadrature inner product") {
    for (const auto& s : {line_setup(), surface_setup()}) {
        const auto bg = build_background(s.grid, s.layout, s.lambdas);
        const Matrix gram = bg.basis.transpose() * s.grid.weights().asDiagonal() * bg.basis;
        CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).norm() < 1e-8);
    }
}

TEST_CASE("single shift basis is the normalized snapshot") {
    auto s = line_setup();
    s.lambdas = {3.0};
    const auto bg = build_background(s.grid, s.layout, s.lambdas);
    const Vector u = bg.v0.col(0);
    const Vector expected = u / std::sqrt(u.cwiseProduct(u).dot(s.grid.weights()));
    CHECK((bg.basis.col(0) - expected).norm() < 1e-12 * expected.norm());
}

TEST_CASE("p = 0 data reproduce the background snapshots") {
    for (const auto& s : {line_setup(), surface_setup()}) {
        const auto bg = build_background(s.grid, s.layout, s.lambdas);
        const auto fields = internal_fields(bg, measured_lanczos(bg.data), s.lambdas);
        const auto dense = test::dense_operator(s.grid, Vector::Zero(s.grid.size()));
        const Matrix G = s.layout.distributions(s.grid).leftCols(s.layout.K);
        for (std::size_t j = 0; j < s.lambdas.size(); ++j) {
            const Matrix truth = test::dense_solve(dense, s.lambdas[j], G);
            CHECK(relative_frobenius(fields[j].fields, truth) < 1e-8);
        }
        const auto cheat = cheated_fields(Medium::background(s.grid), s.layout, s.lambdas);
        for (std::size_t j = 0; j < s.lambdas.size(); ++j) {
            CHECK(relative_frobenius(cheat[j].fields, fields[j].fields) < 1e-8);
        }
    }
}

TEST_CASE("transfer of the internal field follows the reduced model") {
    // <G, U> = B0^T Q0 C = R0_bg^T E1^T (T + l)^{-1} E1 R0; equal to the data
    // only when the background and measured normalization blocks agree (p = 0).
    const auto s = line_setup();
    const auto bg = build_background(s.grid, s.layout, s.lambdas);
    const Medium medium(s.grid, two_bars(s.grid));
    const auto data = synthesize_dataset(medium, s.layout, s.lambdas);
    const auto f = measured_lanczos(data);
    const Matrix G = s.layout.distributions(s.grid).leftCols(1);
    for (double l : {1.0, 14.0, 33.3}) {
        const auto u = internal_field(bg, f, l);
        const Matrix seen = G.transpose() * s.grid.weights().asDiagonal() * u.fields;
        const Matrix predicted = bg.lanczos.R0.transpose() * reduced_solve(f, l).topRows(1);
        CHECK(relative_frobenius(seen, predicted) < 1e-8);
    }
    const auto f0 = measured_lanczos(bg.data);
    for (std::size_t j = 0; j < s.lambdas.size(); ++j) {
        const auto u = internal_field(bg, f0, s.lambdas[j]);
        const Matrix seen = G.transpose() * s.grid.weights().asDiagonal() * u.fields;
        CHECK(relative_frobenius(seen, bg.data.point(static_cast<int>(j)).F.leftCols(1)) < 1e-8);
    }
}

TEST_CASE("field derivative matches a central difference") {
    const auto s = surface_setup();
    const auto bg = build_background(s.grid, s.layout, s.lambdas);
    std::mt19937_64 rng(31);
    const Medium medium(s.grid, test::random_profile(rng, s.grid.size(), 2.0));
    const auto f = measured_lanczos(synthesize_dataset(medium, s.layout, s.lambdas));
    const double l = 7.0;
    const double h = 1e-4;
    const auto mid = internal_field(bg, f, l);
    const Matrix cd = (internal_field(bg, f, l + h).fields - internal_field(bg, f, l - h).fields) / (2 * h);
    CHECK(relative_frobenius(mid.dfields, cd) < 1e-6);
}

TEST_CASE("extended columns never reach the internal fields") {
    const auto s = surface_setup();
    const auto bg = build_background(s.grid, s.layout, s.lambdas);
    std::mt19937_64 rng(32);
    const Medium medium(s.grid, test::random_profile(rng, s.grid.size(), 2.0));
    const auto data = synthesize_dataset(medium, s.layout, s.lambdas);
    auto pts = data.points();
    for (auto& pt : pts) {
        pt.F.rightCols(3) *= -7.5;
        pt.dF.rightCols(3).setRandom();
    }
    const SpectralDataset perturbed(pts, data.K(), data.L());
    Mask block = Mask::Constant(2, 5, true);
    block(0, 3) = block(1, 2) = block(1, 4) = false;
    const SpectralDataset masked = apply_mask(data, {block});

    const auto a = internal_fields(bg, measured_lanczos(data), s.lambdas);
    for (const auto& other : {perturbed, masked}) {
        const auto b = internal_fields(bg, measured_lanczos(other), s.lambdas);
        for (std::size_t j = 0; j < a.size(); ++j) {
            CHECK((a[j].fields.array() == b[j].fields.array()).all());
            CHECK((a[j].dfields.array() == b[j].dfields.array()).all());
        }
    }
}

TEST_CASE("cheated fields reproduce the data and differ from LSL off the data shifts") {
    const auto s = line_setup();
    const Medium medium(s.grid, two_bars(s.grid));
    const auto data = synthesize_dataset(medium, s.layout, s.lambdas);
    const Matrix G = s.layout.distributions(s.grid);
    const auto cheat = cheated_fields(medium, s.layout, s.lambdas);
    for (std::size_t j = 0; j < s.lambdas.size(); ++j) {
        const Matrix F = cheat[j].fields.transpose() * s.grid.weights().asDiagonal() * G;
        CHECK(relative_frobenius(F, data.point(static_cast<int>(j)).F) < 1e-12);
    }
    const auto bg = build_background(s.grid, s.layout, s.lambdas);
    const auto u = internal_field(bg, measured_lanczos(data), 5.0);
    const auto c = cheated_field(medium, s.layout, 5.0);
    CHECK(relative_frobenius(u.fields, c.fields) > 1e-6);
}

TEST_CASE("Born fields are the background fields") {
    const auto s = line_setup();
    const auto bg = build_background(s.grid, s.layout, s.lambdas);
    const auto born = born_fields(bg);
    REQUIRE(born.size() == s.lambdas.size());
    for (std::size_t j = 0; j < born.size(); ++j) {
        CHECK(born[j].fields == bg.solutions.fields[j].fields.leftCols(1));
        CHECK(born[j].dfields == bg.solutions.fields[j].dfields.leftCols(1));
    }
}

TEST_CASE("internal_field checks ROM compatibility") {
    const auto s = line_setup();
    const auto bg = build_background(s.grid, s.layout, s.lambdas);
    const auto short_data = synthesize_dataset(Medium::background(s.grid), s.layout, std::vector<double>{1, 2});
    CHECK_THROWS_AS(internal_field(bg, measured_lanczos(short_data), 1.0), InvalidArgument);
}
