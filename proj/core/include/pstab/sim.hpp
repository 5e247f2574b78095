#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pstab/delay.hpp"
#include "pstab/systems.hpp"

namespace pstab {

struct Trajectory {
    /// Recorded states, row-major with stride `state_dim` of the batch;
    /// states for steps 0..k where k = horizon, or the divergence step.
    std::vector<double> states;
    bool diverged = false;
    std::size_t diverged_at = 0;  ///< step index of the first overflowing state
};

struct TrajectoryBatch {
    std::size_t state_dim = 0;  ///< full (possibly embedded) dimension
    std::size_t base_dim = 0;   ///< undelayed dimension n (lag-0 block)
    std::size_t horizon = 0;
    std::size_t num_trajectories = 0;
    std::uint64_t seed = 0;
    std::string descriptor;  ///< stable text identifying the simulated system
    std::vector<Trajectory> trajectories;

    /// Number of recorded states of trajectory t (horizon+1 unless diverged).
    [[nodiscard]] std::size_t recorded_steps(std::size_t t) const {
        return trajectories[t].states.size() / state_dim;
    }
    [[nodiscard]] std::span<const double> state(std::size_t t, std::size_t k) const {
        return {trajectories[t].states.data() + k * state_dim, state_dim};
    }
};

struct SimOptions {
    /// A coordinate beyond this magnitude flags the trajectory as diverged and
    /// stops it; the overflowing state is still recorded.
    double divergence_cutoff = 1e12;
};

/// Runs num_traj trajectories from the shared initial condition, drawing maps
/// (and lag matrices, for delayed systems) i.i.d. per step. Trajectory t is
/// keyed by (seed, t), so batches are bitwise reproducible and independent of
/// the number of worker threads (PSTAB_THREADS overrides the default).
[[nodiscard]] TrajectoryBatch simulate(const SwitchedSystem& sys, std::span<const double> x0,
                                       std::size_t horizon, std::size_t num_traj,
                                       std::uint64_t seed, const SimOptions& opts = {});

/// Delayed variant; x0 may have length n (replicated across all lags) or the
/// full embedded length n(L+1).
[[nodiscard]] TrajectoryBatch simulate(const DelayedSwitchedSystem& sys,
                                       std::span<const double> x0, std::size_t horizon,
                                       std::size_t num_traj, std::uint64_t seed,
                                       const SimOptions& opts = {});

[[nodiscard]] TrajectoryBatch simulate(const IntervalEnsemble& e, std::span<const double> x0,
                                       std::size_t horizon, std::size_t num_traj,
                                       std::uint64_t seed, const SimOptions& opts = {});

/// Delayed interval ensemble (policy kinds none / fixed / iid_uniform_entries).
[[nodiscard]] TrajectoryBatch simulate_delayed(const IntervalEnsemble& e,
                                               const DelayPolicy& policy, unsigned bound,
                                               std::span<const double> x0,
                                               std::size_t horizon, std::size_t num_traj,
                                               std::uint64_t seed,
                                               const SimOptions& opts = {});

struct DecayEstimate {
    unsigned p = 1;
    std::vector<double> step_means;  ///< m_k = mean over trajectories of ‖x^k − x̃‖_∞^p
    double decay_rate = 0.0;         ///< fitted β̂ (positive means shrinking)
    double log_intercept = 0.0;      ///< fitted log Ĉ
    bool decay_detected = false;
    std::size_t fit_begin = 0;
    std::size_t fit_end = 0;
};

struct DecayOptions {
    std::size_t fit_begin = 0;
    std::size_t fit_end = 0;      ///< 0 means "to the end of the batch"
    double drop_factor = 10.0;    ///< final-window mean must undercut initial/drop_factor
    std::size_t window = 0;       ///< 0 means a tenth of the fit range
};

/// Per-step deviation means and a least-squares fit of log m_k ≈ log Ĉ − β̂·k
/// over the window (steps with m_k = 0 are excluded from the fit). Delayed
/// batches are measured on the lag-0 block only. Diverged trajectories carry
/// their last recorded deviation forward, so divergence reads as non-decay.
/// Throws if every trajectory diverged.
[[nodiscard]] DecayEstimate estimate_decay(const TrajectoryBatch& batch,
                                           std::span<const double> x_tilde, unsigned p,
                                           const DecayOptions& opts = {});

/// Finite-horizon Monte Carlo surrogate of the p-radius:
///   ((1/samples) Σ ‖A_k ⋯ A_1‖_∞^p)^{1/(p·k)},
/// with products renormalized every step and accumulated in the log domain so
/// growing ensembles cannot overflow. Converges to the exact value as k grows.
[[nodiscard]] double mc_p_radius_estimate(const LipschitzSet& ls, unsigned p,
                                          std::size_t k, std::size_t samples,
                                          std::uint64_t seed);

/// Ensemble variant: samples the ensemble's comparison matrices (entrywise
/// absolute values of the drawn maps).
[[nodiscard]] double mc_p_radius_estimate(const IntervalEnsemble& e, unsigned p,
                                          std::size_t k, std::size_t samples,
                                          std::uint64_t seed);

/// One row per (trajectory, recorded step) with the state coordinates;
/// metadata (seed, system hash, shape, divergence flags) in `#` header lines.
/// Identical batches export byte-identical output.
void write_csv(std::ostream& out, const TrajectoryBatch& batch);
void export_csv(const TrajectoryBatch& batch, const std::filesystem::path& path);

/// (k, m_k) rows plus the fit in the header.
void write_csv(std::ostream& out, const DecayEstimate& estimate);
void export_csv(const DecayEstimate& estimate, const std::filesystem::path& path);

/// Worker threads used for trajectory batches: PSTAB_THREADS when set,
/// otherwise the hardware concurrency.
[[nodiscard]] unsigned sim_thread_count();

}  // namespace pstab
