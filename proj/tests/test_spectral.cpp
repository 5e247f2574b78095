#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pstab/spectral.hpp"
#include "test_support.hpp"

using namespace pstab;
using pstab::testing::random_nonnegative;

namespace {

// Independent oracle: dense eigensolver on small instances.
double eigen_radius(const DenseMatrix& m) {
    Eigen::MatrixXd a(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
    return a.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("spectral radius of the defective triangular pair is exact") {
    const SpectralResult res = spectral_radius(DenseMatrix{{0.5, 1.0}, {0.0, 0.5}});
    CHECK(res.converged);
    CHECK(res.radius == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("spectral radius of the identity is one") {
    const SpectralResult res = spectral_radius(DenseMatrix::identity(3));
    CHECK(res.converged);
    CHECK(res.radius == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("spectral radius of the interval comparison expectation") {
    const SpectralResult res = spectral_radius(DenseMatrix{{0.4, 0.2}, {0.2, 0.04}});
    CHECK(res.converged);
    CHECK(res.radius ==
          Catch::Approx((0.44 + std::sqrt(0.2896)) / 2.0).margin(1e-11));
}

TEST_CASE("strictly upper triangular matrices are detected as nilpotent") {
    DenseMatrix m(4, 4);
    m(0, 1) = 2.0;
    m(0, 3) = 1.0;
    m(1, 2) = 5.0;
    m(2, 3) = 0.5;
    const SpectralResult res = spectral_radius(m);
    CHECK(res.converged);
    CHECK(res.radius == 0.0);
    CHECK(res.method == SpectralMethod::nilpotent_detected);
}

TEST_CASE("spectral radius rejects bad input") {
    CHECK_THROWS_AS(spectral_radius(DenseMatrix(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(spectral_radius(DenseMatrix{{-1.0}}), std::invalid_argument);
    SpectralOptions opts;
    opts.tol = 0.0;
    CHECK_THROWS_AS(spectral_radius(DenseMatrix::identity(2), opts),
                    std::invalid_argument);
}

TEST_CASE("imprimitive two-cycle converges through the shifted iteration") {
    const SpectralResult res = spectral_radius(DenseMatrix{{0.0, 2.0}, {0.5, 0.0}});
    CHECK(res.converged);
    CHECK(res.radius == Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("a near-defective dominant pair falls back to the Gelfand sequence") {
    // eigenvalues 1 ± 1e-10: the shifted iteration cannot separate them within
    // its budget, so the estimate comes from the bracketed norm sequence and
    // non-convergence is reported rather than silently absorbed
    const DenseMatrix m{{1.0, 1.0}, {1e-20, 1.0}};
    const SpectralResult res = spectral_radius(m);
    CHECK(res.method == SpectralMethod::gelfand_fallback);
    CHECK_FALSE(res.converged);
    CHECK(res.radius == Catch::Approx(1.0).margin(1e-3));
    CHECK_THROWS_AS(spectral_radius_value(m), std::runtime_error);
}

TEST_CASE("spectral radius agrees with a dense eigensolver on random input") {
    CounterRng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_uint(4);  // up to 6x6
        DenseMatrix m = random_nonnegative(rng, n, 2.0);
        // sprinkle zeros so reducible patterns appear
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (rng.uniform() < 0.4) m(i, j) = 0.0;
        const SpectralResult res = spectral_radius(m);
        REQUIRE(res.converged);
        CHECK(res.radius == Catch::Approx(eigen_radius(m)).margin(1e-8));
    }
}

TEST_CASE("spectral radius is monotone in the entries") {
    CounterRng rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.uniform_uint(3);
        const DenseMatrix a = random_nonnegative(rng, n);
        DenseMatrix b = a;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) b(i, j) += rng.uniform();
        CHECK(spectral_radius_value(a) <= spectral_radius_value(b) + 1e-10);
    }
}

TEST_CASE("solve_linear solves multi-RHS systems") {
    CounterRng rng(23);
    DenseMatrix a = random_nonnegative(rng, 4, 1.0);
    for (std::size_t i = 0; i < 4; ++i) a(i, i) += 4.0;  // keep it well conditioned
    const DenseMatrix b = random_nonnegative(rng, 4, 1.0);
    const DenseMatrix x = solve_linear(a, b);
    CHECK(max_abs_diff(a * x, b) < 1e-12);
}

TEST_CASE("solve_linear reports singular systems") {
    const DenseMatrix a{{1.0, 2.0}, {2.0, 4.0}};
    CHECK_THROWS_AS(solve_linear(a, DenseMatrix::identity(2)), std::runtime_error);
}

TEST_CASE("isoradial reduction of a diagonal matrix keeps the kept block") {
    const DenseMatrix m{{2.0, 0.0}, {0.0, 1.0}};
    const std::vector<std::size_t> keep{0};
    const DenseMatrix r = isoradial_reduce(m, keep);
    REQUIRE(r.rows() == 1);
    CHECK(r(0, 0) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("isoradial reduction preserves the spectral radius") {
    CounterRng rng(24);
    int reduced = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 3 + rng.uniform_uint(2);
        const DenseMatrix m = random_nonnegative(rng, n, 1.0);
        const double rho = spectral_radius_value(m);
        if (rho <= 0.0) continue;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < n / 2 + 1; ++i) keep.push_back(i);
        DenseMatrix r(1, 1);
        try {
            r = isoradial_reduce(m, keep);
        } catch (const std::runtime_error&) {
            continue;  // reduction does not exist for this draw
        }
        ++reduced;
        // the reduced matrix may have negative entries; use the oracle
        Eigen::MatrixXd e(r.rows(), r.cols());
        for (std::size_t i = 0; i < r.rows(); ++i)
            for (std::size_t j = 0; j < r.cols(); ++j) e(i, j) = r(i, j);
        const double rho_reduced = e.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(std::fabs(rho_reduced - rho) <= 1e-6);
    }
    CHECK(reduced > 30);
}

TEST_CASE("isoradial reduction of the three-node companion matches its radius") {
    const std::vector<DenseMatrix> blocks{pstab::testing::three_node_stage0(),
                                          pstab::testing::three_node_stage1()};
    const DenseMatrix companion = assemble_companion(blocks, 3);
    const double rho = spectral_radius_value(companion);
    CHECK(rho == Catch::Approx(2.0239).margin(5e-4));

    const std::vector<std::size_t> keep{0, 1, 2};
    const DenseMatrix reduced = isoradial_reduce(companion, keep);
    CHECK(eigen_radius(reduced) == Catch::Approx(rho).margin(1e-9));
}

TEST_CASE("companion reduction onto the first block is the lag-weighted stage sum") {
    CounterRng rng(25);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + rng.uniform_uint(1);
        const unsigned stages = 2 + static_cast<unsigned>(rng.uniform_uint(1));
        std::vector<DenseMatrix> blocks;
        for (unsigned s = 0; s < stages; ++s) {
            blocks.push_back(random_nonnegative(rng, n, 1.0));
        }
        const DenseMatrix companion = assemble_companion(blocks, n);
        const double rho = spectral_radius_value(companion);
        if (rho < 1e-6) continue;

        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < n; ++i) keep.push_back(i);
        const DenseMatrix reduced = isoradial_reduce(companion, keep);

        DenseMatrix expected(n, n);
        double factor = 1.0;
        for (unsigned s = 0; s < stages; ++s) {
            expected = expected + factor * blocks[s];
            factor /= rho;
        }
        CHECK(max_abs_diff(reduced, expected) < 1e-9);
    }
}

TEST_CASE("isoradial reduction rejects empty and full index sets") {
    const DenseMatrix m = DenseMatrix::identity(3);
    const std::vector<std::size_t> empty{};
    const std::vector<std::size_t> full{0, 1, 2};
    CHECK_THROWS_AS(isoradial_reduce(m, empty), std::invalid_argument);
    CHECK_THROWS_AS(isoradial_reduce(m, full), std::invalid_argument);
}

TEST_CASE("isoradial reduction reports a missing reduction") {
    // complement block equals rho(M) I, so the shift is singular
    const DenseMatrix m{{1.0, 0.0}, {0.0, 1.0}};
    const std::vector<std::size_t> keep{0};
    CHECK_THROWS_WITH(isoradial_reduce(m, keep),
                      Catch::Matchers::ContainsSubstring("does not exist"));
}
