#include "lsl/forward_solver.hpp"
#include "lsl/parallel.hpp"
#include "support.hpp"

#include <doctest.h>

#include <limits>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace lsl;

TEST_CASE("stiffness matches the dense finite-difference oracle") {
    std::mt19937_64 rng(11);
    for (const Grid& g : {Grid::line(1.3, 17), Grid::rectangle(2.0, 1.0, 9, 6)}) {
        const Vector p = test::random_profile(rng, g.size(), 3.0);
        const auto op = assemble_operator(Medium(g, p));
        const auto dense = test::dense_operator(g, p);
        CHECK(relative_frobenius(Matrix(op.stiffness()), dense.K) < 1e-14);
        CHECK((op.weights() - dense.w).norm() < 1e-15);
        CHECK(Matrix(op.stiffness()).isApprox(Matrix(op.stiffness()).transpose(), 0.0));
    }
}

TEST_CASE("p = 0 annihilates constants") {
    for (const Grid& g : {Grid::line(1.0, 31), Grid::rectangle(3.0, 1.0, 13, 5)}) {
        const auto op = assemble_operator(Medium::background(g));
        const Vector rows = Matrix(op.stiffness()) * Vector::Ones(g.size());
        CHECK(rows.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("constant p shifts the bottom of the spectrum to p") {
    const Grid g = Grid::line(1.0, 101);
    const double c = 2.75;
    const auto op = assemble_operator(Medium(g, Vector::Constant(g.size(), c)));
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Matrix(op.stiffness()), Matrix(op.weights().asDiagonal()));
    // Exact in the discrete setting; the eigensolver's error scales with the top of the spectrum.
    const double top = es.eigenvalues().maxCoeff();
    CHECK(std::abs(es.eigenvalues()(0) - c) <= 64 * std::numeric_limits<double>::epsilon() * top);
}

TEST_CASE("2D Neumann spectrum approximates the continuum") {
    const double lx = 2.0;
    const double ly = 1.0;
    const Grid g = Grid::rectangle(lx, ly, 41, 21);
    const auto op = assemble_operator(Medium::background(g));
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Matrix(op.stiffness()), Matrix(op.weights().asDiagonal()));
    std::vector<double> exact;
    for (int j = 0; j < 6; ++j) {
        for (int k = 0; k < 6; ++k) {
            exact.push_back(std::numbers::pi * std::numbers::pi * (j * j / (lx * lx) + k * k / (ly * ly)));
        }
    }
    std::sort(exact.begin(), exact.end());
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-10);
    for (int i = 1; i < 8; ++i) {
        CAPTURE(i);
        CHECK(es.eigenvalues()(i) == doctest::Approx(exact[static_cast<std::size_t>(i)]).epsilon(0.01));
    }
}

TEST_CASE("single-node grid reduces to the scalar resolvent") {
    const Grid g = Grid::line(1.0, 1);
    const auto op = assemble_operator(Medium(g, Vector::Ones(1)));
    const auto fs = solve_shifted(op, 1.0, Matrix::Ones(1, 1));
    CHECK(fs.fields(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(fs.dfields(0, 0) == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("shifted solves agree with dense solves") {
    std::mt19937_64 rng(12);
    for (const Grid& g : {Grid::line(1.0, 41), Grid::rectangle(1.5, 1.0, 11, 8)}) {
        const Vector p = test::random_profile(rng, g.size(), 4.0);
        const auto op = assemble_operator(Medium(g, p));
        const auto dense = test::dense_operator(g, p);
        const Matrix src = Matrix::Random(g.size(), 3);
        for (double lambda : {0.7, 13.0, 250.0}) {
            const auto fs = solve_shifted(op, lambda, src);
            const Matrix u = test::dense_solve(dense, lambda, src);
            CHECK(relative_frobenius(fs.fields, u) < 1e-12);
            // (A + lambda) u' = -u
            CHECK(relative_frobenius(fs.dfields, test::dense_solve(dense, lambda, -u)) < 1e-12);
        }
    }
}

TEST_CASE("transfer values are reciprocal") {
    std::mt19937_64 rng(13);
    const Grid g = Grid::rectangle(1.0, 1.0, 15, 15);
    const Vector p = test::random_profile(rng, g.size(), 5.0);
    const auto dense = test::dense_operator(g, p);
    ArrayLayout layout;
    layout.K = 4;
    layout.receivers = {{0.0, 0.5}, {1.0, 0.2}, {0.3, 1.0}, {0.5, 0.5}};
    layout.mollifier_radius = 0.15;
    const Matrix G = layout.distributions(g);
    for (double lambda : {-5.0, 1.0, 77.0}) {
        const Matrix u = test::dense_solve(dense, lambda, G);
        const Matrix F = G.transpose() * g.weights().asDiagonal() * u;
        CHECK(relative_frobenius(F, F.transpose()) < 1e-12);
        const auto d = synthesize_dataset(Medium(g, p), layout, std::vector<double>{lambda});
        CHECK(relative_frobenius(d.point(0).F, F) < 1e-12);
    }
}

TEST_CASE("resolvent limit: lambda u tends to g") {
    const Grid g = Grid::line(1.0, 81);
    Vector src(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) src(i) = 2.0 + std::cos(std::numbers::pi * g.coordinate(i)[0]);
    const auto op = assemble_operator(Medium::background(g));
    const double lambda = 1e6;
    const auto fs = solve_shifted(op, lambda, src);
    CHECK((lambda * fs.fields.col(0) - src).cwiseAbs().maxCoeff() < 1e-4 * src.cwiseAbs().maxCoeff());
}

TEST_CASE("synthesized data: derivative, background and SISO consistency") {
    const Grid g = Grid::line(1.0, 101);
    Vector p = Vector::Zero(g.size());
    p.segment(20, 15).setConstant(1.0);
    ArrayLayout layout;
    layout.K = 1;
    layout.receivers = {{0.0, 0.0}, {1.0, 0.0}};
    const Medium medium(g, p);

    const double h = 1e-5;
    for (double lambda : {1.0, 14.0, 128.0}) {
        const auto d = synthesize_dataset(medium, layout, std::vector<double>{lambda - h, lambda, lambda + h});
        const Matrix cd = (d.point(2).F - d.point(0).F) / (2 * h);
        CHECK(relative_frobenius(cd, d.point(1).dF) < 1e-6);
        CHECK(symmetric_part(d).point(1).F(0, 0) == d.point(1).F(0, 0));
    }

    const std::vector<double> lambdas{1, 2, 14};
    const auto bg = background_model(g, layout, lambdas);
    CHECK(synthesize_dataset(Medium::background(g), layout, lambdas) == bg.dataset(1));
}

TEST_CASE("background snapshots are independent and decay from the source") {
    const Grid g = Grid::line(1.0, 101);
    ArrayLayout layout;
    layout.K = 1;
    layout.receivers = {{0.3, 0.0}};
    const std::vector<double> lambdas{1, 2, 14, 50, 128, 262.2672};
    const auto bg = background_model(g, layout, lambdas);
    Matrix V(g.size(), 6);
    for (int j = 0; j < 6; ++j) V.col(j) = bg.fields[static_cast<std::size_t>(j)].fields.col(0);
    const Matrix gram = V.transpose() * g.weights().asDiagonal() * V;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    CHECK(es.eigenvalues()(0) > 1e-12 * es.eigenvalues()(5));

    const Eigen::Index s = 30;
    for (int j = 0; j < 6; ++j) {
        const Vector u = V.col(j);
        for (Eigen::Index i = s; i + 1 < g.size(); ++i) CHECK(u(i + 1) < u(i));
        for (Eigen::Index i = s; i > 0; --i) CHECK(u(i - 1) < u(i));
    }
}

TEST_CASE("medium and shift guards") {
    const Grid g = Grid::line(1.0, 11);
    Vector p = Vector::Zero(11);
    p(3) = -1.0;
    CHECK_THROWS_AS(Medium(g, p), InvalidArgument);
    CHECK_NOTHROW(Medium(g, p, true));
    CHECK_THROWS_AS(Medium(g, Vector::Zero(5)), InvalidArgument);

    // Constants span the p = 0 null space.
    const auto op = assemble_operator(Medium::background(g));
    CHECK_THROWS_AS(ShiftedSolver(op, 0.0), ShiftTooCloseToSpectrum);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Matrix(op.stiffness()), Matrix(op.weights().asDiagonal()));
    CHECK_THROWS_AS(ShiftedSolver(op, -es.eigenvalues()(1)), ShiftTooCloseToSpectrum);
    CHECK_NOTHROW(ShiftedSolver(op, -0.5 * es.eigenvalues()(1)));
}

TEST_CASE("parallel shift solves do not depend on the thread count") {
    std::mt19937_64 rng(14);
    const Grid g = Grid::rectangle(1.0, 1.0, 20, 20);
    const auto op = assemble_operator(Medium(g, test::random_profile(rng, g.size(), 2.0)));
    const Matrix src = Matrix::Random(g.size(), 2);
    const std::vector<double> lambdas{1, 2, 14, 50, 128};
    setenv("LSL_THREADS", "1", 1);
    const auto serial = solve_all_shifts(op, lambdas, src);
    setenv("LSL_THREADS", "4", 1);
    const auto threaded = solve_all_shifts(op, lambdas, src);
    unsetenv("LSL_THREADS");
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        CHECK((serial[j].fields.array() == threaded[j].fields.array()).all());
        CHECK((serial[j].dfields.array() == threaded[j].dfields.array()).all());
    }
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
    setenv("LSL_THREADS", "3", 1);
    CHECK(thread_limit() == 3);
    try {
        parallel_for(50, [](std::size_t i) {
            if (i == 7 || i == 31) throw std::runtime_error("fail " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "fail 7");
    }
    unsetenv("LSL_THREADS");
}
