#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pstab/matrix.hpp"
#include "pstab/rng.hpp"
#include "pstab/systems.hpp"

namespace pstab {

/// Integer lag matrix: entry (i, j) is the age of the value of coordinate j
/// seen by coordinate i's update. All lags must stay within the bound.
struct DelayMatrix {
    std::size_t n = 0;
    unsigned bound = 0;           ///< L
    std::vector<unsigned> lags;   ///< row-major d_ij, each in {0..bound}

    DelayMatrix() = default;
    DelayMatrix(std::size_t n_in, unsigned bound_in);  // all lags zero
    DelayMatrix(std::size_t n_in, unsigned bound_in, std::vector<unsigned> lags_in);

    [[nodiscard]] unsigned operator()(std::size_t i, std::size_t j) const {
        return lags[i * n + j];
    }
};

enum class DelayPolicyKind {
    none,                 ///< no delays (lag matrix identically zero)
    fixed,                ///< one constant lag matrix every step
    iid_uniform_entries,  ///< every d_ij ~ Uniform{0..L} independently, redrawn each step
    explicit_list,        ///< per-map finite list of (lag matrix, conditional probability)
};

/// Distribution over lag matrices, possibly conditioned on the chosen map.
/// The joint law over (map, lags) is weight(map) × conditional(lags | map), so
/// each map keeps its original switching probability by construction.
struct DelayPolicy {
    struct Choice {
        DelayMatrix lags;
        double prob = 0.0;  ///< conditional probability given the map
    };

    DelayPolicyKind kind = DelayPolicyKind::none;
    std::optional<DelayMatrix> fixed_lags;           ///< kind == fixed
    std::vector<std::vector<Choice>> per_map;        ///< kind == explicit_list

    [[nodiscard]] static DelayPolicy none();
    [[nodiscard]] static DelayPolicy fixed(DelayMatrix d);
    [[nodiscard]] static DelayPolicy iid_uniform_entries();
    [[nodiscard]] static DelayPolicy explicit_list(std::vector<std::vector<Choice>> per_map);
};

/// Delay-space embedding of a map: the n(L+1)-dimensional map whose first n
/// coordinates evaluate the original components on lagged inputs and whose
/// remaining coordinates shift stored history by one step. Coordinate order is
/// (site 1..n at lag 0), (site 1..n at lag 1), ..., so coordinate (i, ℓ) sits
/// at index ℓ·n + i.
[[nodiscard]] MapSpec embed_map(const MapSpec& f, const DelayMatrix& d, unsigned bound);

/// Companion-form embedding of a comparison matrix: stage block ℓ keeps the
/// entries whose lag equals ℓ, and the result is the block companion of those
/// stages. Row sums over stages reproduce the original matrix.
[[nodiscard]] DenseMatrix embed_matrix(const DenseMatrix& a, const DelayMatrix& d,
                                       unsigned bound);

/// A switched system together with a delay policy and bound. Samples
/// (map index, lag matrix) pairs i.i.d. per step; enumerates its support when
/// that is finite and small.
class DelayedSwitchedSystem {
public:
    DelayedSwitchedSystem(SwitchedSystem base, DelayPolicy policy, unsigned bound);

    [[nodiscard]] const SwitchedSystem& base() const { return base_; }
    [[nodiscard]] const DelayPolicy& policy() const { return policy_; }
    [[nodiscard]] unsigned bound() const { return bound_; }
    [[nodiscard]] std::size_t embedded_dimension() const {
        return base_.dimension() * (bound_ + 1);
    }

    /// One i.i.d. draw of (map index, lag matrix).
    [[nodiscard]] std::pair<std::size_t, DelayMatrix> sample(CounterRng& rng) const;

    struct SupportAtom {
        std::size_t map_index = 0;
        DelayMatrix lags;
        double prob = 0.0;  ///< joint probability of (map, lags)
    };

    /// Explicit support when it has at most `cap` atoms, nullopt otherwise.
    [[nodiscard]] std::optional<std::vector<SupportAtom>> support(
        std::size_t cap = 10'000) const;

private:
    SwitchedSystem base_;
    DelayPolicy policy_;
    unsigned bound_;
};

[[nodiscard]] DelayedSwitchedSystem delayed_system(SwitchedSystem sys, DelayPolicy policy,
                                                   unsigned bound);

/// Expectation matrix of the delayed comparison system, in closed form as a
/// block companion: stage block ℓ has entries
///   Σ_maps weight(map) · a_map(i,j) · P(d_ij = ℓ | map).
/// Expectation is entrywise and each embedded entry depends on exactly one
/// lag, so the per-entry lag marginals suffice — the lag-matrix space is never
/// enumerated.
[[nodiscard]] DenseMatrix expected_delayed_lipschitz(const LipschitzSet& ls,
                                                     const DelayPolicy& policy,
                                                     unsigned bound);

/// Same closed form when the lag distribution does not depend on the map
/// (kinds none / fixed / iid_uniform_entries), driven directly by the
/// undelayed expectation matrix. Interval ensembles use this path.
[[nodiscard]] DenseMatrix expected_delayed_lipschitz(const DenseMatrix& expectation,
                                                     const DelayPolicy& policy,
                                                     unsigned bound);

}  // namespace pstab
