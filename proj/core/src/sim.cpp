#include "pstab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pstab/rng.hpp"

namespace pstab {

unsigned sim_thread_count() {
    if (const char* env = std::getenv("PSTAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned threads = std::min<std::size_t>(sim_thread_count(), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += threads) body(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

// Steps one trajectory with a per-step state update; shared by all system
// flavors. The stepper writes the next state into `next` and may consume rng.
TrajectoryBatch run_batch(
    std::size_t state_dim, std::size_t base_dim, std::span<const double> x0,
    std::size_t horizon, std::size_t num_traj, std::uint64_t seed,
    const SimOptions& opts, std::string descriptor,
    const std::function<void(CounterRng&, const std::vector<double>&, std::vector<double>&)>&
        stepper) {
    TrajectoryBatch batch;
    batch.state_dim = state_dim;
    batch.base_dim = base_dim;
    batch.horizon = horizon;
    batch.num_trajectories = num_traj;
    batch.seed = seed;
    batch.descriptor = std::move(descriptor);
    batch.trajectories.resize(num_traj);

    std::vector<double> start(x0.begin(), x0.end());
    parallel_for(num_traj, [&](std::size_t t) {
        CounterRng rng(seed, t);
        Trajectory& traj = batch.trajectories[t];
        traj.states.reserve((horizon + 1) * state_dim);
        std::vector<double> x = start;
        std::vector<double> next(state_dim, 0.0);
        traj.states.insert(traj.states.end(), x.begin(), x.end());
        for (std::size_t k = 0; k < horizon; ++k) {
            stepper(rng, x, next);
            x.swap(next);
            traj.states.insert(traj.states.end(), x.begin(), x.end());
            double peak = 0.0;
            for (double v : x) peak = std::max(peak, std::fabs(v));
            if (!(peak <= opts.divergence_cutoff)) {
                traj.diverged = true;
                traj.diverged_at = k + 1;
                break;
            }
        }
    });
    return batch;
}

std::vector<double> expand_initial(std::span<const double> x0, std::size_t n,
                                   unsigned bound) {
    const std::size_t big = n * (bound + 1);
    if (x0.size() == big) return {x0.begin(), x0.end()};
    if (x0.size() != n) {
        throw std::invalid_argument(
            "simulate: initial condition must have length " + std::to_string(n) + " or " +
            std::to_string(big));
    }
    // replicate across all lags: the history starts out constant
    std::vector<double> full(big);
    for (unsigned l = 0; l <= bound; ++l) {
        std::copy(x0.begin(), x0.end(), full.begin() + static_cast<std::ptrdiff_t>(l * n));
    }
    return full;
}

}  // namespace

TrajectoryBatch simulate(const SwitchedSystem& sys, std::span<const double> x0,
                         std::size_t horizon, std::size_t num_traj, std::uint64_t seed,
                         const SimOptions& opts) {
    const std::size_t n = sys.dimension();
    if (x0.size() != n) {
        throw std::invalid_argument("simulate: initial condition must have length " +
                                    std::to_string(n));
    }
    return run_batch(
        n, n, x0, horizon, num_traj, seed, opts,
        "switched n=" + std::to_string(n) + " maps=" + std::to_string(sys.maps.size()),
        [&sys, n](CounterRng& rng, const std::vector<double>& x, std::vector<double>& next) {
            const MapSpec& f = sys.maps[rng.categorical(sys.weights)];
            for (std::size_t i = 0; i < n; ++i) {
                double acc = f.bias[i];
                for (std::size_t j = 0; j < n; ++j) {
                    acc += f.linear(i, j) * x[j] + f.gain(i, j) * std::tanh(x[j]);
                }
                next[i] = acc;
            }
        });
}

TrajectoryBatch simulate(const DelayedSwitchedSystem& sys, std::span<const double> x0,
                         std::size_t horizon, std::size_t num_traj, std::uint64_t seed,
                         const SimOptions& opts) {
    const std::size_t n = sys.base().dimension();
    const unsigned bound = sys.bound();
    const std::vector<double> full = expand_initial(x0, n, bound);

    // The embedded map is evaluated through its stencil: component i reads
    // coordinate (j, d_ij) at index d_ij·n + j, history shifts by one block.
    return run_batch(
        full.size(), n, full, horizon, num_traj, seed, opts,
        "delayed-switched n=" + std::to_string(n) + " L=" + std::to_string(bound) +
            " maps=" + std::to_string(sys.base().maps.size()),
        [&sys, n, bound](CounterRng& rng, const std::vector<double>& x,
                         std::vector<double>& next) {
            const auto [mi, d] = sys.sample(rng);
            const MapSpec& f = sys.base().maps[mi];
            for (std::size_t i = 0; i < n; ++i) {
                double acc = f.bias[i];
                for (std::size_t j = 0; j < n; ++j) {
                    const double v = x[static_cast<std::size_t>(d(i, j)) * n + j];
                    acc += f.linear(i, j) * v + f.gain(i, j) * std::tanh(v);
                }
                next[i] = acc;
            }
            for (unsigned l = 0; l < bound; ++l) {
                for (std::size_t i = 0; i < n; ++i) {
                    next[(l + 1) * n + i] = x[l * n + i];
                }
            }
        });
}

TrajectoryBatch simulate(const IntervalEnsemble& e, std::span<const double> x0,
                         std::size_t horizon, std::size_t num_traj, std::uint64_t seed,
                         const SimOptions& opts) {
    const std::size_t n = e.n;
    if (x0.size() != n) {
        throw std::invalid_argument("simulate: initial condition must have length " +
                                    std::to_string(n));
    }
    return run_batch(
        n, n, x0, horizon, num_traj, seed, opts, "ensemble n=" + std::to_string(n),
        [&e, n](CounterRng& rng, const std::vector<double>& x, std::vector<double>& next) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    acc += rng.uniform(e.lower(i, j), e.upper(i, j)) * x[j];
                }
                next[i] = acc;
            }
        });
}

TrajectoryBatch simulate_delayed(const IntervalEnsemble& e, const DelayPolicy& policy,
                                 unsigned bound, std::span<const double> x0,
                                 std::size_t horizon, std::size_t num_traj,
                                 std::uint64_t seed, const SimOptions& opts) {
    if (policy.kind == DelayPolicyKind::explicit_list) {
        throw std::invalid_argument(
            "simulate_delayed: interval ensembles support policies none, fixed and "
            "iid_uniform_entries");
    }
    if (policy.kind == DelayPolicyKind::fixed &&
        (!policy.fixed_lags || policy.fixed_lags->n != e.n ||
         policy.fixed_lags->bound > bound)) {
        throw std::invalid_argument("simulate_delayed: fixed lag matrix inconsistent");
    }
    const std::size_t n = e.n;
    const std::vector<double> full = expand_initial(x0, n, bound);
    return run_batch(
        full.size(), n, full, horizon, num_traj, seed, opts,
        "delayed-ensemble n=" + std::to_string(n) + " L=" + std::to_string(bound),
        [&e, &policy, n, bound](CounterRng& rng, const std::vector<double>& x,
                                std::vector<double>& next) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double a = rng.uniform(e.lower(i, j), e.upper(i, j));
                    unsigned lag = 0;
                    if (policy.kind == DelayPolicyKind::iid_uniform_entries) {
                        lag = static_cast<unsigned>(rng.uniform_uint(bound));
                    } else if (policy.kind == DelayPolicyKind::fixed) {
                        lag = (*policy.fixed_lags)(i, j);
                    }
                    acc += a * x[static_cast<std::size_t>(lag) * n + j];
                }
                next[i] = acc;
            }
            for (unsigned l = 0; l < bound; ++l) {
                for (std::size_t i = 0; i < n; ++i) {
                    next[(l + 1) * n + i] = x[l * n + i];
                }
            }
        });
}

DecayEstimate estimate_decay(const TrajectoryBatch& batch, std::span<const double> x_tilde,
                             unsigned p, const DecayOptions& opts) {
    if (p == 0) throw std::invalid_argument("estimate_decay: p must be >= 1");
    if (x_tilde.size() != batch.base_dim) {
        throw std::invalid_argument("estimate_decay: reference point must have length " +
                                    std::to_string(batch.base_dim));
    }
    if (batch.num_trajectories == 0) {
        throw std::invalid_argument("estimate_decay: empty batch");
    }
    bool any_alive = false;
    for (const Trajectory& t : batch.trajectories) any_alive |= !t.diverged;
    if (!any_alive) {
        throw std::runtime_error("estimate_decay: every trajectory diverged");
    }

    DecayEstimate est;
    est.p = p;
    est.step_means.assign(batch.horizon + 1, 0.0);
    for (std::size_t t = 0; t < batch.num_trajectories; ++t) {
        const std::size_t recorded = batch.recorded_steps(t);
        double carried = 0.0;
        for (std::size_t k = 0; k <= batch.horizon; ++k) {
            if (k < recorded) {
                const std::span<const double> x = batch.state(t, k);
                double dev = 0.0;
                for (std::size_t i = 0; i < batch.base_dim; ++i) {
                    dev = std::max(dev, std::fabs(x[i] - x_tilde[i]));
                }
                carried = std::pow(dev, static_cast<double>(p));
            }
            est.step_means[k] += carried;
        }
    }
    for (double& m : est.step_means) m /= static_cast<double>(batch.num_trajectories);

    est.fit_begin = std::min(opts.fit_begin, batch.horizon);
    est.fit_end = opts.fit_end == 0 ? batch.horizon + 1
                                    : std::min(opts.fit_end, batch.horizon + 1);
    if (est.fit_end <= est.fit_begin) {
        throw std::invalid_argument("estimate_decay: empty fit window");
    }

    // least squares on log m_k over steps with positive mean
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t k = est.fit_begin; k < est.fit_end; ++k) {
        if (est.step_means[k] <= 0.0) continue;
        const double xk = static_cast<double>(k);
        const double yk = std::log(est.step_means[k]);
        sx += xk;
        sy += yk;
        sxx += xk * xk;
        sxy += xk * yk;
        ++count;
    }
    if (count >= 2) {
        const double denom = static_cast<double>(count) * sxx - sx * sx;
        if (denom > 0.0) {
            const double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;
            est.decay_rate = -slope;
            est.log_intercept = (sy - slope * sx) / static_cast<double>(count);
        }
    }

    const std::size_t range = est.fit_end - est.fit_begin;
    const std::size_t window =
        opts.window > 0 ? std::min(opts.window, range) : std::max<std::size_t>(1, range / 10);
    double head = 0.0, tail = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
        head += est.step_means[est.fit_begin + k];
        tail += est.step_means[est.fit_end - 1 - k];
    }
    head /= static_cast<double>(window);
    tail /= static_cast<double>(window);
    // a tail of exactly zero is decay even though the log fit cannot see it
    est.decay_detected =
        tail < head / opts.drop_factor && (est.decay_rate > 0.0 || tail == 0.0);
    return est;
}

namespace {

double mc_estimate(std::size_t n, unsigned p, std::size_t k, std::size_t samples,
                   std::uint64_t seed,
                   const std::function<void(CounterRng&, DenseMatrix&)>& draw) {
    if (p == 0 || k == 0 || samples == 0) {
        throw std::invalid_argument("mc_p_radius_estimate: p, k and samples must be >= 1");
    }
    std::vector<double> log_norms(samples, 0.0);
    parallel_for(samples, [&](std::size_t s) {
        CounterRng rng(seed, s);
        DenseMatrix product = DenseMatrix::identity(n);
        DenseMatrix factor(n, n);
        double log_scale = 0.0;
        for (std::size_t step = 0; step < k; ++step) {
            draw(rng, factor);
            product = factor * product;
            const double scale = product.max_abs();
            if (scale == 0.0) {
                log_scale = -std::numeric_limits<double>::infinity();
                break;
            }
            product = (1.0 / scale) * product;
            log_scale += std::log(scale);
        }
        log_norms[s] = std::isfinite(log_scale)
                           ? log_scale + std::log(product.inf_norm())
                           : -std::numeric_limits<double>::infinity();
    });

    // mean of ‖·‖^p in the log domain (log-sum-exp) to dodge overflow
    double peak = -std::numeric_limits<double>::infinity();
    for (double ln : log_norms) peak = std::max(peak, static_cast<double>(p) * ln);
    if (!std::isfinite(peak)) return 0.0;
    double acc = 0.0;
    for (double ln : log_norms) acc += std::exp(static_cast<double>(p) * ln - peak);
    const double log_mean = peak + std::log(acc / static_cast<double>(samples));
    return std::exp(log_mean / (static_cast<double>(p) * static_cast<double>(k)));
}

}  // namespace

double mc_p_radius_estimate(const LipschitzSet& ls, unsigned p, std::size_t k,
                            std::size_t samples, std::uint64_t seed) {
    if (ls.matrices.empty()) {
        throw std::invalid_argument("mc_p_radius_estimate: empty set");
    }
    for (const DenseMatrix& a : ls.matrices) {
        a.require_nonnegative("mc_p_radius_estimate");
    }
    const std::size_t n = ls.dimension();
    return mc_estimate(n, p, k, samples, seed,
                       [&ls](CounterRng& rng, DenseMatrix& out) {
                           out = ls.matrices[rng.categorical(ls.weights)];
                       });
}

double mc_p_radius_estimate(const IntervalEnsemble& e, unsigned p, std::size_t k,
                            std::size_t samples, std::uint64_t seed) {
    return mc_estimate(e.n, p, k, samples, seed,
                       [&e](CounterRng& rng, DenseMatrix& out) {
                           for (std::size_t i = 0; i < e.n; ++i) {
                               for (std::size_t j = 0; j < e.n; ++j) {
                                   out(i, j) =
                                       std::fabs(rng.uniform(e.lower(i, j), e.upper(i, j)));
                               }
                           }
                       });
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("export_csv: cannot open '" + path.string() +
                                 "' for writing");
    }
    return out;
}

}  // namespace

void write_csv(std::ostream& out, const TrajectoryBatch& batch) {
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a(batch.descriptor)));
    out << "# pstab trajectory batch\n";
    out << "# seed=" << batch.seed << " system=" << hash << "\n";
    out << "# dim=" << batch.state_dim << " base_dim=" << batch.base_dim
        << " horizon=" << batch.horizon << " trajectories=" << batch.num_trajectories
        << "\n";
    std::string diverged;
    for (std::size_t t = 0; t < batch.num_trajectories; ++t) {
        if (batch.trajectories[t].diverged) {
            if (!diverged.empty()) diverged += ',';
            diverged += std::to_string(t);
        }
    }
    if (!diverged.empty()) out << "# diverged=" << diverged << "\n";
    out << "trajectory,step";
    for (std::size_t i = 0; i < batch.state_dim; ++i) out << ",x" << i;
    out << "\n";
    for (std::size_t t = 0; t < batch.num_trajectories; ++t) {
        const std::size_t recorded = batch.recorded_steps(t);
        for (std::size_t k = 0; k < recorded; ++k) {
            out << t << ',' << k;
            const std::span<const double> x = batch.state(t, k);
            for (double v : x) out << ',' << format_double(v);
            out << "\n";
        }
    }
}

void export_csv(const TrajectoryBatch& batch, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    write_csv(out, batch);
    if (!out) {
        throw std::runtime_error("export_csv: write to '" + path.string() + "' failed");
    }
}

void write_csv(std::ostream& out, const DecayEstimate& estimate) {
    out << "# pstab decay estimate\n";
    out << "# p=" << estimate.p << " c_hat=" << format_double(std::exp(estimate.log_intercept))
        << " beta_hat=" << format_double(estimate.decay_rate)
        << " decay_detected=" << (estimate.decay_detected ? "true" : "false")
        << " fit_begin=" << estimate.fit_begin << " fit_end=" << estimate.fit_end << "\n";
    out << "step,mean_deviation\n";
    for (std::size_t k = 0; k < estimate.step_means.size(); ++k) {
        out << k << ',' << format_double(estimate.step_means[k]) << "\n";
    }
}

void export_csv(const DecayEstimate& estimate, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    write_csv(out, estimate);
    if (!out) {
        throw std::runtime_error("export_csv: write to '" + path.string() + "' failed");
    }
}

}  // namespace pstab
