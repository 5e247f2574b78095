#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pstab/matrix.hpp"

namespace pstab {

/// One map of the affine-tanh family x ↦ L·x + W·tanh(x) + b (tanh applied
/// coordinatewise). The family covers every shipped demo system, has an exact
/// entrywise-smallest comparison matrix, and is closed under delay embedding
/// (pass-through coordinates live in L).
struct MapSpec {
    std::size_t n = 0;
    DenseMatrix linear;        ///< L, n×n
    DenseMatrix gain;          ///< W, n×n
    std::vector<double> bias;  ///< b, length n

    MapSpec() = default;
    MapSpec(DenseMatrix linear_part, DenseMatrix gain_part, std::vector<double> bias_part);
};

/// L·x + W·tanh(x) + b.
[[nodiscard]] std::vector<double> eval(const MapSpec& f, std::span<const double> x);

/// Entrywise-smallest comparison (Lipschitz) matrix of the affine-tanh map:
/// a_ij = max(|l_ij|, |l_ij + w_ij|). The partial derivative is
/// l_ij + w_ij·sech²(x_j) and sech² sweeps (0, 1], so the supremum of the
/// absolute value sits at one of the two endpoints.
[[nodiscard]] DenseMatrix lipschitz_matrix(const MapSpec& f);

/// Finite family of maps with a switching distribution. Weights must be
/// nonnegative and sum to 1 within 1e-12; all maps share the dimension.
struct SwitchedSystem {
    std::vector<MapSpec> maps;
    std::vector<double> weights;

    SwitchedSystem() = default;
    SwitchedSystem(std::vector<MapSpec> maps_in, std::vector<double> weights_in);

    [[nodiscard]] std::size_t dimension() const { return maps.empty() ? 0 : maps[0].n; }
};

/// Linear maps x ↦ A·x with each a_ij drawn independently and uniformly from
/// [lower_ij, upper_ij] at every switch.
struct IntervalEnsemble {
    std::size_t n = 0;
    DenseMatrix lower;
    DenseMatrix upper;

    IntervalEnsemble() = default;
    IntervalEnsemble(DenseMatrix lower_in, DenseMatrix upper_in);
};

/// Nonnegative comparison matrices mirroring a switched system's maps and
/// weights, one matrix per map (duplicates retained so the weights line up).
struct LipschitzSet {
    std::vector<DenseMatrix> matrices;
    std::vector<double> weights;

    [[nodiscard]] std::size_t dimension() const {
        return matrices.empty() ? 0 : matrices[0].rows();
    }
};

[[nodiscard]] LipschitzSet lipschitz_set(const SwitchedSystem& sys);

/// Weighted expectation Σ w_k · A_k of a set's matrices.
[[nodiscard]] DenseMatrix expectation_matrix(const LipschitzSet& ls);

/// Entrywise mean of the ensemble. absolute = false gives (lower+upper)/2;
/// absolute = true gives E|a_ij| under the uniform law — (l²+u²)/(2(u−l)) when
/// the interval straddles zero, the shifted midpoint otherwise — which is the
/// expectation matrix of the ensemble's comparison system.
[[nodiscard]] DenseMatrix ensemble_mean(const IntervalEnsemble& e, bool absolute);

enum class FixedPointStatus {
    found,           ///< point fixed by every map within tolerance
    no_convergence,  ///< damped iteration did not settle
    not_shared,      ///< iteration converged but some map moves the point
};

struct FixedPointResult {
    FixedPointStatus status = FixedPointStatus::no_convergence;
    std::vector<double> point;
    double worst_residual = 0.0;  ///< max over maps of ‖F(x)−x‖_∞ at the point
    std::size_t iterations = 0;
    std::size_t failing_map = 0;  ///< set when status == not_shared
};

struct FixedPointOptions {
    double tol = 1e-10;
    double damping = 0.5;  ///< x ← (1−α)x + αF(x); undamped iteration can
                           ///< diverge even when a fixed point exists
    std::size_t max_iter = 100'000;
};

/// Damped fixed-point iteration on the system's first map from the origin,
/// then verification of the candidate against every map.
[[nodiscard]] FixedPointResult find_shared_fixed_point(const SwitchedSystem& sys,
                                                       const FixedPointOptions& opts = {});

/// Reproducible i.i.d. switch sequence of length k (same seed ⇒ same draws).
[[nodiscard]] std::vector<std::size_t> draw_instance(const SwitchedSystem& sys,
                                                     std::uint64_t seed, std::size_t k);

/// Reproducible i.i.d. matrix draws from the ensemble.
[[nodiscard]] std::vector<DenseMatrix> draw_instance(const IntervalEnsemble& e,
                                                     std::uint64_t seed, std::size_t k);

/// Extension point for maps outside the affine-tanh family: a callable paired
/// with a matrix the caller asserts to be a comparison matrix for it. Such
/// pairs forfeit the closed-form checks but can reuse the sampled-bound test.
struct LipschitzPair {
    std::function<std::vector<double>(std::span<const double>)> map;
    DenseMatrix matrix;
};

/// Worst violation of the comparison bound
///   |F_i(x) − F_i(y)| ≤ Σ_j a_ij |x_j − y_j|
/// over `samples` random pairs in the centered box of half-width `box_halfwidth`.
/// Nonpositive values mean the bound held on every sampled pair.
[[nodiscard]] double max_lipschitz_violation(
    const std::function<std::vector<double>(std::span<const double>)>& map,
    const DenseMatrix& a, std::size_t samples, std::uint64_t seed,
    double box_halfwidth = 10.0);

[[nodiscard]] double max_lipschitz_violation(const MapSpec& f, const DenseMatrix& a,
                                             std::size_t samples, std::uint64_t seed,
                                             double box_halfwidth = 10.0);

}  // namespace pstab
