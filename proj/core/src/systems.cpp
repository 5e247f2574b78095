#include "pstab/systems.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pstab/rng.hpp"

namespace pstab {

MapSpec::MapSpec(DenseMatrix linear_part, DenseMatrix gain_part,
                 std::vector<double> bias_part)
    : n(bias_part.size()),
      linear(std::move(linear_part)),
      gain(std::move(gain_part)),
      bias(std::move(bias_part)) {
    if (!linear.is_square() || linear.rows() != n || !gain.is_square() ||
        gain.rows() != n) {
        throw std::invalid_argument("MapSpec: linear, gain and bias dimensions disagree");
    }
}

std::vector<double> eval(const MapSpec& f, std::span<const double> x) {
    if (x.size() != f.n) {
        throw std::invalid_argument("eval: state has length " + std::to_string(x.size()) +
                                    ", map expects " + std::to_string(f.n));
    }
    std::vector<double> y(f.n, 0.0);
    for (std::size_t i = 0; i < f.n; ++i) {
        double acc = f.bias[i];
        for (std::size_t j = 0; j < f.n; ++j) {
            acc += f.linear(i, j) * x[j] + f.gain(i, j) * std::tanh(x[j]);
        }
        y[i] = acc;
    }
    return y;
}

DenseMatrix lipschitz_matrix(const MapSpec& f) {
    DenseMatrix a(f.n, f.n);
    for (std::size_t i = 0; i < f.n; ++i) {
        for (std::size_t j = 0; j < f.n; ++j) {
            const double l = f.linear(i, j);
            const double w = f.gain(i, j);
            a(i, j) = std::max(std::fabs(l), std::fabs(l + w));
        }
    }
    return a;
}

SwitchedSystem::SwitchedSystem(std::vector<MapSpec> maps_in, std::vector<double> weights_in)
    : maps(std::move(maps_in)), weights(std::move(weights_in)) {
    if (maps.empty()) {
        throw std::invalid_argument("SwitchedSystem: need at least one map");
    }
    if (maps.size() != weights.size()) {
        throw std::invalid_argument("SwitchedSystem: one weight per map required");
    }
    const std::size_t n = maps[0].n;
    for (const MapSpec& f : maps) {
        if (f.n != n) {
            throw std::invalid_argument("SwitchedSystem: maps must share the dimension");
        }
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw std::invalid_argument("SwitchedSystem: weights must be nonnegative");
        }
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("SwitchedSystem: weights sum to " +
                                    std::to_string(total) + ", expected 1");
    }
}

IntervalEnsemble::IntervalEnsemble(DenseMatrix lower_in, DenseMatrix upper_in)
    : n(lower_in.rows()), lower(std::move(lower_in)), upper(std::move(upper_in)) {
    if (!lower.is_square() || upper.rows() != n || upper.cols() != n) {
        throw std::invalid_argument("IntervalEnsemble: bounds must be square and matching");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (lower(i, j) > upper(i, j)) {
                throw std::invalid_argument(
                    "IntervalEnsemble: lower bound exceeds upper bound at (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

LipschitzSet lipschitz_set(const SwitchedSystem& sys) {
    LipschitzSet out;
    out.matrices.reserve(sys.maps.size());
    for (const MapSpec& f : sys.maps) out.matrices.push_back(lipschitz_matrix(f));
    out.weights = sys.weights;
    return out;
}

DenseMatrix expectation_matrix(const LipschitzSet& ls) {
    if (ls.matrices.empty()) {
        throw std::invalid_argument("expectation_matrix: empty set");
    }
    DenseMatrix acc(ls.matrices[0].rows(), ls.matrices[0].cols());
    for (std::size_t k = 0; k < ls.matrices.size(); ++k) {
        acc = acc + ls.weights[k] * ls.matrices[k];
    }
    return acc;
}

DenseMatrix ensemble_mean(const IntervalEnsemble& e, bool absolute) {
    DenseMatrix out(e.n, e.n);
    for (std::size_t i = 0; i < e.n; ++i) {
        for (std::size_t j = 0; j < e.n; ++j) {
            const double l = e.lower(i, j);
            const double u = e.upper(i, j);
            if (!absolute) {
                out(i, j) = 0.5 * (l + u);
            } else if (l >= 0.0) {
                out(i, j) = 0.5 * (l + u);
            } else if (u <= 0.0) {
                out(i, j) = -0.5 * (l + u);
            } else {
                // interval straddles zero: E|U(l,u)| = (l² + u²) / (2(u − l))
                out(i, j) = (l * l + u * u) / (2.0 * (u - l));
            }
        }
    }
    return out;
}

FixedPointResult find_shared_fixed_point(const SwitchedSystem& sys,
                                         const FixedPointOptions& opts) {
    if (opts.tol <= 0.0) {
        throw std::invalid_argument("find_shared_fixed_point: tolerance must be positive");
    }
    const std::size_t n = sys.dimension();
    FixedPointResult res;
    std::vector<double> x(n, 0.0);

    bool settled = false;
    std::size_t it = 0;
    for (; it < opts.max_iter; ++it) {
        const std::vector<double> fx = eval(sys.maps[0], x);
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            residual = std::max(residual, std::fabs(fx[i] - x[i]));
        }
        // stop at half the tolerance so the all-maps verification below cannot
        // trip over the first map by rounding
        if (residual <= 0.5 * opts.tol) {
            settled = true;
            break;
        }
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = (1.0 - opts.damping) * x[i] + opts.damping * fx[i];
            if (!std::isfinite(x[i])) finite = false;
        }
        if (!finite) break;
    }
    res.iterations = it;
    if (!settled) {
        res.status = FixedPointStatus::no_convergence;
        return res;
    }

    double worst = 0.0;
    std::size_t worst_map = 0;
    for (std::size_t k = 0; k < sys.maps.size(); ++k) {
        const std::vector<double> fx = eval(sys.maps[k], x);
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::fabs(fx[i] - x[i]));
        if (r > worst) {
            worst = r;
            worst_map = k;
        }
    }
    res.point = std::move(x);
    res.worst_residual = worst;
    if (worst <= opts.tol) {
        res.status = FixedPointStatus::found;
    } else {
        res.status = FixedPointStatus::not_shared;
        res.failing_map = worst_map;
    }
    return res;
}

std::vector<std::size_t> draw_instance(const SwitchedSystem& sys, std::uint64_t seed,
                                       std::size_t k) {
    CounterRng rng(seed);
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = rng.categorical(sys.weights);
    return out;
}

std::vector<DenseMatrix> draw_instance(const IntervalEnsemble& e, std::uint64_t seed,
                                       std::size_t k) {
    CounterRng rng(seed);
    std::vector<DenseMatrix> out;
    out.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        DenseMatrix a(e.n, e.n);
        for (std::size_t i = 0; i < e.n; ++i) {
            for (std::size_t j = 0; j < e.n; ++j) {
                a(i, j) = rng.uniform(e.lower(i, j), e.upper(i, j));
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

double max_lipschitz_violation(
    const std::function<std::vector<double>(std::span<const double>)>& map,
    const DenseMatrix& a, std::size_t samples, std::uint64_t seed,
    double box_halfwidth) {
    const std::size_t n = a.rows();
    CounterRng rng(seed);
    std::vector<double> x(n), y(n);
    double worst = -1.0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-box_halfwidth, box_halfwidth);
            y[i] = rng.uniform(-box_halfwidth, box_halfwidth);
        }
        const std::vector<double> fx = map(x);
        const std::vector<double> fy = map(y);
        for (std::size_t i = 0; i < n; ++i) {
            double bound = 0.0;
            for (std::size_t j = 0; j < n; ++j) bound += a(i, j) * std::fabs(x[j] - y[j]);
            worst = std::max(worst, std::fabs(fx[i] - fy[i]) - bound);
        }
    }
    return worst;
}

double max_lipschitz_violation(const MapSpec& f, const DenseMatrix& a,
                               std::size_t samples, std::uint64_t seed,
                               double box_halfwidth) {
    return max_lipschitz_violation(
        [&f](std::span<const double> x) { return eval(f, x); }, a, samples, seed,
        box_halfwidth);
}

}  // namespace pstab
