#include "pstab/delay.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pstab {

DelayMatrix::DelayMatrix(std::size_t n_in, unsigned bound_in)
    : n(n_in), bound(bound_in), lags(n_in * n_in, 0u) {
    if (n == 0) throw std::invalid_argument("DelayMatrix: dimension must be >= 1");
}

DelayMatrix::DelayMatrix(std::size_t n_in, unsigned bound_in, std::vector<unsigned> lags_in)
    : n(n_in), bound(bound_in), lags(std::move(lags_in)) {
    if (n == 0) throw std::invalid_argument("DelayMatrix: dimension must be >= 1");
    if (lags.size() != n * n) {
        throw std::invalid_argument("DelayMatrix: expected " + std::to_string(n * n) +
                                    " lags, got " + std::to_string(lags.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (lags[i * n + j] > bound) {
                throw std::invalid_argument(
                    "DelayMatrix: lag " + std::to_string(lags[i * n + j]) + " at (" +
                    std::to_string(i) + "," + std::to_string(j) + ") exceeds the bound " +
                    std::to_string(bound));
            }
        }
    }
}

DelayPolicy DelayPolicy::none() {
    DelayPolicy p;
    p.kind = DelayPolicyKind::none;
    return p;
}

DelayPolicy DelayPolicy::fixed(DelayMatrix d) {
    DelayPolicy p;
    p.kind = DelayPolicyKind::fixed;
    p.fixed_lags = std::move(d);
    return p;
}

DelayPolicy DelayPolicy::iid_uniform_entries() {
    DelayPolicy p;
    p.kind = DelayPolicyKind::iid_uniform_entries;
    return p;
}

DelayPolicy DelayPolicy::explicit_list(std::vector<std::vector<Choice>> per_map) {
    DelayPolicy p;
    p.kind = DelayPolicyKind::explicit_list;
    p.per_map = std::move(per_map);
    for (std::size_t m = 0; m < p.per_map.size(); ++m) {
        double total = 0.0;
        for (const Choice& c : p.per_map[m]) {
            if (c.prob < 0.0) {
                throw std::invalid_argument("DelayPolicy: negative probability for map " +
                                            std::to_string(m));
            }
            total += c.prob;
        }
        if (std::fabs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("DelayPolicy: conditional probabilities for map " +
                                        std::to_string(m) + " sum to " +
                                        std::to_string(total) + ", expected 1");
        }
    }
    return p;
}

MapSpec embed_map(const MapSpec& f, const DelayMatrix& d, unsigned bound) {
    if (d.n != f.n) {
        throw std::invalid_argument("embed_map: lag matrix dimension mismatch");
    }
    for (unsigned lag : d.lags) {
        if (lag > bound) {
            throw std::invalid_argument("embed_map: lag exceeds the requested bound");
        }
    }
    const std::size_t n = f.n;
    const std::size_t big = n * (bound + 1);
    DenseMatrix linear(big, big);
    DenseMatrix gain(big, big);
    std::vector<double> bias(big, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        bias[i] = f.bias[i];
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t src = static_cast<std::size_t>(d(i, j)) * n + j;
            linear(i, src) = f.linear(i, j);
            gain(i, src) = f.gain(i, j);
        }
    }
    // history shift: coordinate (i, ℓ+1) copies (i, ℓ)
    for (unsigned l = 0; l < bound; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            linear((l + 1) * n + i, l * n + i) = 1.0;
        }
    }
    return MapSpec(std::move(linear), std::move(gain), std::move(bias));
}

DenseMatrix embed_matrix(const DenseMatrix& a, const DelayMatrix& d, unsigned bound) {
    if (!a.is_square() || a.rows() != d.n) {
        throw std::invalid_argument("embed_matrix: matrix and lag dimensions disagree");
    }
    for (unsigned lag : d.lags) {
        if (lag > bound) {
            throw std::invalid_argument("embed_matrix: lag exceeds the requested bound");
        }
    }
    const std::size_t n = a.rows();
    std::vector<DenseMatrix> stages(bound + 1, DenseMatrix(n, n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            stages[d(i, j)](i, j) = a(i, j);
        }
    }
    return assemble_companion(stages, n);
}

DelayedSwitchedSystem::DelayedSwitchedSystem(SwitchedSystem base, DelayPolicy policy,
                                             unsigned bound)
    : base_(std::move(base)), policy_(std::move(policy)), bound_(bound) {
    const std::size_t n = base_.dimension();
    switch (policy_.kind) {
        case DelayPolicyKind::none:
        case DelayPolicyKind::iid_uniform_entries:
            break;
        case DelayPolicyKind::fixed:
            if (!policy_.fixed_lags || policy_.fixed_lags->n != n) {
                throw std::invalid_argument(
                    "DelayedSwitchedSystem: fixed policy lag matrix missing or mismatched");
            }
            if (policy_.fixed_lags->bound > bound_) {
                throw std::invalid_argument(
                    "DelayedSwitchedSystem: fixed lag matrix exceeds the bound");
            }
            break;
        case DelayPolicyKind::explicit_list:
            if (policy_.per_map.size() != base_.maps.size()) {
                throw std::invalid_argument(
                    "DelayedSwitchedSystem: explicit policy must cover every map (" +
                    std::to_string(policy_.per_map.size()) + " lists for " +
                    std::to_string(base_.maps.size()) + " maps)");
            }
            for (std::size_t m = 0; m < policy_.per_map.size(); ++m) {
                if (policy_.per_map[m].empty() && base_.weights[m] > 0.0) {
                    throw std::invalid_argument(
                        "DelayedSwitchedSystem: explicit policy omits map " +
                        std::to_string(m) + " which has positive weight");
                }
                for (const DelayPolicy::Choice& c : policy_.per_map[m]) {
                    if (c.lags.n != n || c.lags.bound > bound_) {
                        throw std::invalid_argument(
                            "DelayedSwitchedSystem: explicit lag matrix for map " +
                            std::to_string(m) + " is inconsistent with the system");
                    }
                }
            }
            break;
    }
}

std::pair<std::size_t, DelayMatrix> DelayedSwitchedSystem::sample(CounterRng& rng) const {
    const std::size_t n = base_.dimension();
    const std::size_t map_index = rng.categorical(base_.weights);
    switch (policy_.kind) {
        case DelayPolicyKind::none:
            return {map_index, DelayMatrix(n, bound_)};
        case DelayPolicyKind::fixed:
            return {map_index, *policy_.fixed_lags};
        case DelayPolicyKind::iid_uniform_entries: {
            DelayMatrix d(n, bound_);
            for (unsigned& lag : d.lags) {
                lag = static_cast<unsigned>(rng.uniform_uint(bound_));
            }
            return {map_index, std::move(d)};
        }
        case DelayPolicyKind::explicit_list: {
            const auto& choices = policy_.per_map[map_index];
            const double u = rng.uniform();
            double acc = 0.0;
            for (const auto& c : choices) {
                acc += c.prob;
                if (u < acc) return {map_index, c.lags};
            }
            return {map_index, choices.back().lags};
        }
    }
    throw std::logic_error("DelayedSwitchedSystem::sample: unreachable");
}

std::optional<std::vector<DelayedSwitchedSystem::SupportAtom>>
DelayedSwitchedSystem::support(std::size_t cap) const {
    const std::size_t n = base_.dimension();
    std::vector<SupportAtom> atoms;

    auto push = [&](std::size_t m, DelayMatrix d, double joint) -> bool {
        if (atoms.size() >= cap) return false;
        atoms.push_back({m, std::move(d), joint});
        return true;
    };

    switch (policy_.kind) {
        case DelayPolicyKind::none:
            for (std::size_t m = 0; m < base_.maps.size(); ++m) {
                if (!push(m, DelayMatrix(n, bound_), base_.weights[m])) return std::nullopt;
            }
            return atoms;
        case DelayPolicyKind::fixed:
            for (std::size_t m = 0; m < base_.maps.size(); ++m) {
                if (!push(m, *policy_.fixed_lags, base_.weights[m])) return std::nullopt;
            }
            return atoms;
        case DelayPolicyKind::explicit_list:
            for (std::size_t m = 0; m < base_.maps.size(); ++m) {
                for (const auto& c : policy_.per_map[m]) {
                    if (!push(m, c.lags, base_.weights[m] * c.prob)) return std::nullopt;
                }
            }
            return atoms;
        case DelayPolicyKind::iid_uniform_entries: {
            // (bound+1)^(n²) lag matrices per map
            const double count =
                std::pow(static_cast<double>(bound_ + 1), static_cast<double>(n * n));
            if (count * static_cast<double>(base_.maps.size()) >
                static_cast<double>(cap)) {
                return std::nullopt;
            }
            const std::size_t total = static_cast<std::size_t>(count);
            const double each = 1.0 / count;
            for (std::size_t m = 0; m < base_.maps.size(); ++m) {
                for (std::size_t code = 0; code < total; ++code) {
                    DelayMatrix d(n, bound_);
                    std::size_t rest = code;
                    for (unsigned& lag : d.lags) {
                        lag = static_cast<unsigned>(rest % (bound_ + 1));
                        rest /= (bound_ + 1);
                    }
                    if (!push(m, std::move(d), base_.weights[m] * each)) {
                        return std::nullopt;
                    }
                }
            }
            return atoms;
        }
    }
    throw std::logic_error("DelayedSwitchedSystem::support: unreachable");
}

DelayedSwitchedSystem delayed_system(SwitchedSystem sys, DelayPolicy policy,
                                     unsigned bound) {
    return DelayedSwitchedSystem(std::move(sys), std::move(policy), bound);
}

namespace {

// P(d_ij = lag | map m) for map-independent policies; explicit_list is handled
// separately because it conditions on the map.
double lag_marginal(const DelayPolicy& policy, unsigned bound, std::size_t i,
                    std::size_t j, unsigned lag) {
    switch (policy.kind) {
        case DelayPolicyKind::none:
            return lag == 0 ? 1.0 : 0.0;
        case DelayPolicyKind::fixed:
            return (*policy.fixed_lags)(i, j) == lag ? 1.0 : 0.0;
        case DelayPolicyKind::iid_uniform_entries:
            return 1.0 / static_cast<double>(bound + 1);
        case DelayPolicyKind::explicit_list:
            break;
    }
    throw std::logic_error("lag_marginal: explicit policies need the per-map path");
}

}  // namespace

DenseMatrix expected_delayed_lipschitz(const LipschitzSet& ls, const DelayPolicy& policy,
                                       unsigned bound) {
    if (ls.matrices.empty()) {
        throw std::invalid_argument("expected_delayed_lipschitz: empty set");
    }
    const std::size_t n = ls.dimension();

    if (policy.kind != DelayPolicyKind::explicit_list) {
        return expected_delayed_lipschitz(expectation_matrix(ls), policy, bound);
    }

    if (policy.per_map.size() != ls.matrices.size()) {
        throw std::invalid_argument(
            "expected_delayed_lipschitz: explicit policy must cover every matrix");
    }
    std::vector<DenseMatrix> stages(bound + 1, DenseMatrix(n, n));
    for (std::size_t m = 0; m < ls.matrices.size(); ++m) {
        const DenseMatrix& a = ls.matrices[m];
        const double w = ls.weights[m];
        if (w == 0.0 && policy.per_map[m].empty()) continue;
        for (const DelayPolicy::Choice& c : policy.per_map[m]) {
            if (c.lags.n != n || c.lags.bound > bound) {
                throw std::invalid_argument(
                    "expected_delayed_lipschitz: lag matrix inconsistent with the set");
            }
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    stages[c.lags(i, j)](i, j) += w * c.prob * a(i, j);
                }
            }
        }
    }
    return assemble_companion(stages, n);
}

DenseMatrix expected_delayed_lipschitz(const DenseMatrix& expectation,
                                       const DelayPolicy& policy, unsigned bound) {
    if (!expectation.is_square()) {
        throw std::invalid_argument("expected_delayed_lipschitz: expectation not square");
    }
    if (policy.kind == DelayPolicyKind::explicit_list) {
        throw std::invalid_argument(
            "expected_delayed_lipschitz: explicit policies condition on the map; "
            "pass the full set instead");
    }
    const std::size_t n = expectation.rows();
    std::vector<DenseMatrix> stages(bound + 1, DenseMatrix(n, n));
    for (unsigned l = 0; l <= bound; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                stages[l](i, j) = expectation(i, j) * lag_marginal(policy, bound, i, j, l);
            }
        }
    }
    return assemble_companion(stages, n);
}

}  // namespace pstab
