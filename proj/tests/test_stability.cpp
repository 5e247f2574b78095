#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pstab/spectral.hpp"
#include "pstab/stability.hpp"
#include "test_support.hpp"

using namespace pstab;
namespace pt = pstab::testing;

TEST_CASE("1-radius of the two-map comparison sets") {
    CHECK(p_radius(lipschitz_set(pt::two_map_family(0.9, 0.1)), 1) ==
          Catch::Approx(0.8).margin(1e-12));
    CHECK(p_radius(lipschitz_set(pt::two_map_family(0.5, 0.5)), 1) ==
          Catch::Approx(1.0).margin(1e-12));
    CHECK(p_radius(lipschitz_set(pt::two_map_family(1.0, 0.0)), 1) ==
          Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("singleton sets have p-radius equal to the spectral radius for every p") {
    CounterRng rng(51);
    for (int trial = 0; trial < 5; ++trial) {
        const DenseMatrix a = pt::random_nonnegative(rng, 3);
        LipschitzSet ls;
        ls.matrices = {a};
        ls.weights = {1.0};
        const double rho = spectral_radius_value(a);
        for (unsigned p = 1; p <= 3; ++p) {
            CHECK(p_radius(ls, p) == Catch::Approx(rho).margin(1e-9));
        }
    }
}

TEST_CASE("p-radius scales linearly in the matrix scale") {
    CounterRng rng(52);
    const DenseMatrix a = pt::random_nonnegative(rng, 3);
    LipschitzSet ls;
    ls.matrices = {2.5 * a};
    ls.weights = {1.0};
    CHECK(p_radius(ls, 1) ==
          Catch::Approx(2.5 * spectral_radius_value(a)).margin(1e-9));
}

TEST_CASE("p-radius never decreases when a matrix grows entrywise") {
    CounterRng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        LipschitzSet ls;
        ls.matrices = {pt::random_nonnegative(rng, 3), pt::random_nonnegative(rng, 3)};
        ls.weights = {0.6, 0.4};
        const double before = p_radius(ls, 1);
        ls.matrices[trial % 2](trial % 3, (trial + 1) % 3) += 0.5;
        CHECK(p_radius(ls, 1) >= before - 1e-10);
    }
}

TEST_CASE("interval ensembles expose only the first-mean closed form") {
    const IntervalEnsemble e = pt::interval_ensemble();
    CHECK(p_radius(e, 1) == Catch::Approx(pt::kEnsembleRadius).margin(1e-12));
    CHECK_THROWS_WITH(p_radius(e, 2),
                      Catch::Matchers::ContainsSubstring("Monte Carlo"));
}

TEST_CASE("first-mean certificate for the mostly-first-map family") {
    const StabilityReport report = check_first_mean_stable(pt::two_map_family(0.9, 0.1), 1);
    CHECK(report.verdict == Verdict::first_mean_stable);
    CHECK(report.p_radius == Catch::Approx(0.8).margin(1e-12));
    REQUIRE(report.shared_fixed_point.has_value());
    CHECK(audit_verdict(report, false) == report.verdict);
}

TEST_CASE("mixed-sign pair is inconclusive at radius seven sixths") {
    const StabilityReport report = check_first_mean_stable(pt::mixed_sign_pair(), 1);
    CHECK(report.verdict == Verdict::inconclusive);
    CHECK(report.p_radius == Catch::Approx(7.0 / 6.0).margin(1e-12));
    CHECK(audit_verdict(report, false) == report.verdict);
    CHECK(report_to_text(report).find("does not mean unstable") != std::string::npos);
}

TEST_CASE("interval ensemble is first-mean stable at its closed-form radius") {
    const StabilityReport report = check_first_mean_stable(pt::interval_ensemble(), 1);
    CHECK(report.verdict == Verdict::first_mean_stable);
    CHECK(report.p_radius == Catch::Approx(pt::kEnsembleRadius).margin(1e-9));
}

TEST_CASE("second-mean radius is computed through the Kronecker square") {
    const StabilityReport report = check_first_mean_stable(pt::two_map_family(1.0, 0.0), 2);
    // singleton-like system: mu puts all mass on the first map
    CHECK(report.p == 2);
    CHECK(report.p_radius == Catch::Approx(0.5).margin(1e-9));
    CHECK(report.verdict == Verdict::first_mean_stable);
}

TEST_CASE("patient certificate for the mostly-first-map family") {
    const StabilityReport report = check_patient_stability(pt::two_map_family(0.9, 0.1));
    CHECK(report.verdict == Verdict::patiently_first_mean_stable);
    CHECK(report.p_radius == Catch::Approx(0.8).margin(1e-12));
    CHECK(audit_verdict(report, true) == report.verdict);
}

TEST_CASE("balanced switching sits on the boundary and stays inconclusive") {
    const StabilityReport report = check_patient_stability(pt::two_map_family(0.5, 0.5));
    CHECK(report.verdict == Verdict::inconclusive);
    CHECK(report.at_radius_boundary);
    CHECK(report.p_radius == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("patient certificate for the interval ensemble") {
    const StabilityReport report = check_patient_stability(pt::interval_ensemble());
    CHECK(report.verdict == Verdict::patiently_first_mean_stable);
    CHECK(report.p_radius == Catch::Approx(pt::kEnsembleRadius).margin(1e-9));
    REQUIRE(report.shared_fixed_point.has_value());
    CHECK((*report.shared_fixed_point)[0] == 0.0);
}

TEST_CASE("reduction equivalence on the three-node stages") {
    const std::vector<DenseMatrix> blocks{pt::three_node_stage0(), pt::three_node_stage1()};
    const ReductionCheck check = verify_reduction_equivalence(blocks);
    CHECK(check.rho_companion == Catch::Approx(2.0239).margin(5e-4));
    CHECK(check.rho_sum ==
          Catch::Approx((6.0 + std::sqrt(17.0)) / 4.0).margin(1e-9));
    CHECK(check.same_side_of_one);
    CHECK(check.rho_companion > 1.0);
    CHECK(check.rho_sum > 1.0);
}

TEST_CASE("reduction equivalence on a contracting pair") {
    const std::vector<DenseMatrix> blocks{0.5 * DenseMatrix::identity(2),
                                          DenseMatrix(2, 2)};
    const ReductionCheck check = verify_reduction_equivalence(blocks);
    CHECK(check.rho_companion == Catch::Approx(0.5).margin(1e-12));
    CHECK(check.rho_sum == Catch::Approx(0.5).margin(1e-12));
    CHECK(check.same_side_of_one);
}

TEST_CASE("blocks scaled to a stage-sum radius of 0.9 keep the companion below 1") {
    CounterRng rng(54);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.uniform_uint(2);
        const unsigned stages = 2 + static_cast<unsigned>(rng.uniform_uint(2));
        std::vector<DenseMatrix> blocks;
        DenseMatrix sum(n, n);
        for (unsigned s = 0; s < stages; ++s) {
            blocks.push_back(pt::random_nonnegative(rng, n));
            sum = sum + blocks.back();
        }
        const double rho = spectral_radius_value(sum);
        if (rho == 0.0) continue;
        for (DenseMatrix& b : blocks) b = (0.9 / rho) * b;
        const ReductionCheck check = verify_reduction_equivalence(blocks);
        CHECK(check.rho_sum == Catch::Approx(0.9).margin(1e-9));
        CHECK(check.rho_companion < 1.0);
        CHECK(check.same_side_of_one);
    }
}

TEST_CASE("delayed analysis of the mostly-first-map family stays below one") {
    const StabilityReport report = check_delayed_first_mean_stable(
        pt::two_map_family(0.9, 0.1), DelayPolicy::iid_uniform_entries(), 1);
    CHECK(report.p_radius < 1.0);
    CHECK(report.verdict == Verdict::first_mean_stable);
}

TEST_CASE("delayed analysis with no delays reproduces the undelayed radius") {
    const SwitchedSystem sys = pt::two_map_family(0.9, 0.1);
    const StabilityReport delayed =
        check_delayed_first_mean_stable(sys, DelayPolicy::none(), 2);
    const StabilityReport plain = check_patient_stability(sys);
    CHECK(delayed.p_radius == Catch::Approx(plain.p_radius).margin(1e-12));
}

TEST_CASE("the lag-conditioned policy pushes the mixed-sign pair over one") {
    const StabilityReport report = check_delayed_first_mean_stable(
        pt::mixed_sign_pair(), pt::destabilizing_policy(), 1);
    CHECK(report.p_radius == Catch::Approx(1.1385015789180146).margin(1e-9));
    CHECK(report.verdict == Verdict::inconclusive);
}

TEST_CASE("first-block-row sums of the delayed expectation equal the undelayed one") {
    CounterRng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_uint(1);
        const std::size_t maps = 1 + rng.uniform_uint(2);
        const unsigned bound = 1 + static_cast<unsigned>(rng.uniform_uint(3));
        const SwitchedSystem sys = pt::random_system(rng, n, maps);
        const DelayPolicy policy = pt::random_policy(rng, n, maps, bound);
        const LipschitzSet ls = lipschitz_set(sys);
        const DenseMatrix big = expected_delayed_lipschitz(ls, policy, bound);
        const DenseMatrix expectation = expectation_matrix(ls);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double sum = 0.0;
                for (unsigned l = 0; l <= bound; ++l) sum += big(i, l * n + j);
                CHECK(std::fabs(sum - expectation(i, j)) <= 1e-14);
            }
        }
    }
}

TEST_CASE("a patient verdict carries over to sampled delayed analyses") {
    CounterRng rng(56);
    const SwitchedSystem sys = pt::two_map_family(0.9, 0.1);
    REQUIRE(check_patient_stability(sys).verdict ==
            Verdict::patiently_first_mean_stable);
    for (unsigned bound = 1; bound <= 3; ++bound) {
        for (int trial = 0; trial < 5; ++trial) {
            const DelayPolicy policy = pt::random_policy(rng, 2, 2, bound);
            const StabilityReport report =
                check_delayed_first_mean_stable(sys, policy, bound);
            CHECK(report.p_radius < 1.0);
        }
    }
}

TEST_CASE("check_first_mean_stable rejects large p on ensembles") {
    CHECK_THROWS_AS(check_first_mean_stable(pt::interval_ensemble(), 2),
                    std::invalid_argument);
}
