#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pstab/systems.hpp"
#include "test_support.hpp"

using namespace pstab;
namespace pt = pstab::testing;

TEST_CASE("eval of the two-map family fixes the origin") {
    const SwitchedSystem sys = pt::two_map_family(0.9, 0.1);
    const std::vector<double> zero{0.0, 0.0};
    for (const MapSpec& f : sys.maps) {
        const std::vector<double> y = eval(f, zero);
        CHECK(y[0] == 0.0);
        CHECK(y[1] == 0.0);
    }
}

TEST_CASE("eval of a constant map returns its bias") {
    const MapSpec f(DenseMatrix(3, 3), DenseMatrix(3, 3), {1.5, -2.0, 0.25});
    const std::vector<double> y = eval(f, std::vector<double>{7.0, -3.0, 0.1});
    CHECK(y == std::vector<double>{1.5, -2.0, 0.25});
}

TEST_CASE("eval fixes the three-node map's fixed point") {
    const MapSpec h = pt::three_node_map();
    const std::vector<double> x = pt::three_node_fixed_point();
    const std::vector<double> y = eval(h, x);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::fabs(y[i] - x[i]) < 1e-12);
    }
}

TEST_CASE("eval rejects dimension mismatches") {
    const MapSpec h = pt::three_node_map();
    CHECK_THROWS_AS(eval(h, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("comparison matrix of the three-node map") {
    CHECK(lipschitz_matrix(pt::three_node_map()) == pt::three_node_comparison());
}

TEST_CASE("comparison matrix of a pure-gain map is the absolute gain") {
    const SwitchedSystem sys = pt::two_map_family(1.0, 0.0);
    CHECK(lipschitz_matrix(sys.maps[0]) == DenseMatrix{{0.5, 1.0}, {0.0, 0.5}});
}

TEST_CASE("comparison matrix of a pure-linear map is the absolute linear part") {
    const MapSpec f(DenseMatrix{{-1.5, 2.0}, {0.0, -0.25}}, DenseMatrix(2, 2),
                    {0.0, 0.0});
    CHECK(lipschitz_matrix(f) == DenseMatrix{{1.5, 2.0}, {0.0, 0.25}});
}

TEST_CASE("comparison entries equal the numerical derivative supremum") {
    CounterRng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const MapSpec f = pt::random_map(rng, 3, 2.0);
        const DenseMatrix a = lipschitz_matrix(f);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                double sup = 0.0;
                for (double t = -20.0; t <= 20.0; t += 0.001) {
                    const double sech = 1.0 / std::cosh(t);
                    sup = std::max(sup,
                                   std::fabs(f.linear(i, j) + f.gain(i, j) * sech * sech));
                }
                CHECK(a(i, j) >= sup - 1e-9);
                CHECK(a(i, j) <= sup + 1e-3);  // grid resolution slack
            }
        }
    }
}

TEST_CASE("sampled pairs never violate the comparison bound") {
    CounterRng rng(32);
    for (int trial = 0; trial < 5; ++trial) {
        const MapSpec f = pt::random_map(rng, 3, 2.0);
        const DenseMatrix a = lipschitz_matrix(f);
        CHECK(max_lipschitz_violation(f, a, 10'000, 1234 + trial) <= 1e-9);
    }
}

TEST_CASE("a user-supplied pair reuses the sampled bound check") {
    const LipschitzPair pair{
        [](std::span<const double> x) {
            return std::vector<double>{std::sin(x[0]) + 0.5 * x[1], 0.25 * x[0]};
        },
        DenseMatrix{{1.0, 0.5}, {0.25, 0.0}}};
    CHECK(max_lipschitz_violation(pair.map, pair.matrix, 5'000, 7) <= 1e-9);
}

TEST_CASE("lipschitz_set mirrors maps and weights") {
    const SwitchedSystem sys = pt::two_map_family(0.9, 0.1);
    const LipschitzSet ls = lipschitz_set(sys);
    REQUIRE(ls.matrices.size() == 2);
    CHECK(ls.matrices[0] == DenseMatrix{{0.5, 1.0}, {0.0, 0.5}});
    CHECK(ls.matrices[1] == DenseMatrix{{0.5, 0.0}, {1.0, 0.5}});
    CHECK(ls.weights == std::vector<double>{0.9, 0.1});
}

TEST_CASE("duplicate maps keep their own weights") {
    const MapSpec h = pt::three_node_map();
    const SwitchedSystem sys({h, h}, {0.3, 0.7});
    const LipschitzSet ls = lipschitz_set(sys);
    REQUIRE(ls.matrices.size() == 2);
    CHECK(ls.matrices[0] == ls.matrices[1]);
    CHECK(ls.weights == std::vector<double>{0.3, 0.7});
}

TEST_CASE("switched system validation") {
    const MapSpec h = pt::three_node_map();
    CHECK_THROWS_AS(SwitchedSystem({h}, {0.9}), std::invalid_argument);
    CHECK_THROWS_AS(SwitchedSystem({h}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(SwitchedSystem({h, h}, {1.0}), std::invalid_argument);
}

TEST_CASE("ensemble absolute mean has the closed form") {
    const DenseMatrix mean = ensemble_mean(pt::interval_ensemble(), true);
    CHECK(std::fabs(mean(0, 0) - 0.4) < 1e-15);
    CHECK(std::fabs(mean(0, 1) - 0.2) < 1e-15);
    CHECK(std::fabs(mean(1, 0) - 0.2) < 1e-15);
    CHECK(std::fabs(mean(1, 1) - 0.04) < 1e-15);
}

TEST_CASE("degenerate intervals give the absolute matrix") {
    const DenseMatrix a{{-2.0, 1.0}, {0.5, -0.25}};
    const IntervalEnsemble e(a, a);
    CHECK(max_abs_diff(ensemble_mean(e, true), a.abs()) == 0.0);
    CHECK(max_abs_diff(ensemble_mean(e, false), a) == 0.0);
}

TEST_CASE("straddling interval mean matches Monte Carlo") {
    const IntervalEnsemble e(DenseMatrix{{-1.0}}, DenseMatrix{{1.0}});
    const DenseMatrix mean = ensemble_mean(e, true);
    CHECK(mean(0, 0) == Catch::Approx(0.5).margin(1e-15));

    CounterRng rng(33);
    double acc = 0.0;
    const std::size_t samples = 1'000'000;
    for (std::size_t s = 0; s < samples; ++s) acc += std::fabs(rng.uniform(-1.0, 1.0));
    CHECK(mean(0, 0) == Catch::Approx(acc / samples).margin(2e-3));
}

TEST_CASE("ensemble validation rejects crossed bounds") {
    CHECK_THROWS_AS(IntervalEnsemble(DenseMatrix{{1.0}}, DenseMatrix{{0.0}}),
                    std::invalid_argument);
}

TEST_CASE("shared fixed point of the two-map family is the origin") {
    const FixedPointResult res = find_shared_fixed_point(pt::two_map_family(0.5, 0.5));
    REQUIRE(res.status == FixedPointStatus::found);
    CHECK(std::fabs(res.point[0]) < 1e-10);
    CHECK(std::fabs(res.point[1]) < 1e-10);
}

TEST_CASE("fixed point of the three-node map") {
    const SwitchedSystem sys({pt::three_node_map()}, {1.0});
    const FixedPointResult res = find_shared_fixed_point(sys);
    REQUIRE(res.status == FixedPointStatus::found);
    CHECK(res.worst_residual < 1e-10);
    const std::vector<double> expected = pt::three_node_fixed_point();
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::fabs(res.point[i] - expected[i]) < 1e-6);
    }
}

TEST_CASE("a translation breaks the shared fixed point") {
    // second map is x ↦ x + 1, which has no fixed point at all
    const SwitchedSystem sys = pt::two_map_family(0.5, 0.5);
    const MapSpec shift(DenseMatrix::identity(2), DenseMatrix(2, 2), {1.0, 1.0});
    const SwitchedSystem mixed({sys.maps[0], shift}, {0.5, 0.5});
    const FixedPointResult res = find_shared_fixed_point(mixed);
    CHECK(res.status == FixedPointStatus::not_shared);
    CHECK(res.failing_map == 1);
    CHECK(res.worst_residual > 0.5);
}

TEST_CASE("a divergent first map reports no convergence") {
    const MapSpec shift(DenseMatrix::identity(2), DenseMatrix(2, 2), {1.0, 1.0});
    const SwitchedSystem sys({shift}, {1.0});
    const FixedPointResult res = find_shared_fixed_point(sys);
    CHECK(res.status == FixedPointStatus::no_convergence);
}

TEST_CASE("draw_instance honors a deterministic distribution") {
    const SwitchedSystem sys = pt::two_map_family(1.0, 0.0);
    for (std::size_t idx : draw_instance(sys, 5, 1000)) CHECK(idx == 0);
}

TEST_CASE("draw_instance frequencies concentrate around the weights") {
    const SwitchedSystem sys = pt::two_map_family(0.9, 0.1);
    const std::vector<std::size_t> draws = draw_instance(sys, 99, 100'000);
    std::size_t zeros = 0;
    for (std::size_t idx : draws) zeros += idx == 0;
    const double freq = static_cast<double>(zeros) / 100'000.0;
    CHECK(freq >= 0.897);
    CHECK(freq <= 0.903);
}

TEST_CASE("draw_instance chi-square against the weights") {
    const SwitchedSystem sys = pt::two_map_family(0.9, 0.1);
    const std::vector<std::size_t> draws = draw_instance(sys, 7, 100'000);
    std::size_t zeros = 0;
    for (std::size_t idx : draws) zeros += idx == 0;
    const double e0 = 0.9 * 100'000.0, e1 = 0.1 * 100'000.0;
    const double o0 = static_cast<double>(zeros), o1 = 100'000.0 - o0;
    const double chi2 = (o0 - e0) * (o0 - e0) / e0 + (o1 - e1) * (o1 - e1) / e1;
    CHECK(chi2 < 23.928);  // significance 1e-6 at one degree of freedom
}

TEST_CASE("draw_instance is seed-deterministic") {
    const SwitchedSystem sys = pt::two_map_family(0.5, 0.5);
    CHECK(draw_instance(sys, 11, 500) == draw_instance(sys, 11, 500));
    CHECK(draw_instance(sys, 11, 500) != draw_instance(sys, 12, 500));

    const IntervalEnsemble e = pt::interval_ensemble();
    const auto a = draw_instance(e, 4, 20);
    const auto b = draw_instance(e, 4, 20);
    REQUIRE(a.size() == 20);
    for (std::size_t k = 0; k < 20; ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("ensemble draws respect the interval bounds") {
    const IntervalEnsemble e = pt::interval_ensemble();
    for (const DenseMatrix& a : draw_instance(e, 17, 200)) {
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                CHECK(a(i, j) >= e.lower(i, j));
                CHECK(a(i, j) <= e.upper(i, j));
            }
        }
    }
}
