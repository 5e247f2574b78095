// pstab: analyze, embed, reduce, simulate and estimate switched systems with
// stochastic bounded delays. Exit codes: 0 certified stable / success,
// 2 inconclusive, 3 input error, 4 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pstab/json_io.hpp"
#include "pstab/sim.hpp"
#include "pstab/spectral.hpp"
#include "pstab/stability.hpp"

namespace {

constexpr int kExitStable = 0;
constexpr int kExitInconclusive = 2;
constexpr int kExitInputError = 3;
constexpr int kExitNumericalError = 4;

struct CommonOpts {
    std::string spec_path;
    unsigned p = 1;
    std::optional<unsigned> bound;       // --L
    std::optional<std::string> policy;   // --policy
    double tol = 1e-12;
    std::string out_path;
    std::string format = "text";
};

void write_or_print(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + out_path + "' for writing");
    }
    out << text;
}

// CLI-level delay overrides: --policy picks a map-independent kind, --L the
// bound. Anything needing per-entry data (fixed, explicit) lives in the spec.
void apply_delay_overrides(pstab::SystemSpec& spec, const CommonOpts& opts) {
    if (opts.policy) {
        pstab::DelayConfig cfg;
        if (*opts.policy == "none") {
            cfg.policy = pstab::DelayPolicy::none();
        } else if (*opts.policy == "iid_uniform_entries" || *opts.policy == "iid") {
            cfg.policy = pstab::DelayPolicy::iid_uniform_entries();
        } else {
            throw pstab::SpecError("--policy must be 'none' or 'iid_uniform_entries'; "
                                   "fixed and explicit policies belong in the spec file");
        }
        cfg.bound = opts.bound.value_or(spec.delay ? spec.delay->bound : 0u);
        spec.delay = cfg;
    } else if (opts.bound) {
        if (spec.delay) {
            spec.delay->bound = *opts.bound;
        } else {
            pstab::DelayConfig cfg;
            cfg.bound = *opts.bound;
            cfg.policy = pstab::DelayPolicy::iid_uniform_entries();
            spec.delay = cfg;
        }
    }
}

int run_analyze(const CommonOpts& opts) {
    if (opts.format == "csv") {
        throw pstab::SpecError("--format csv applies to simulate; use text or json");
    }
    pstab::SystemSpec spec = pstab::load_system_spec(opts.spec_path);
    apply_delay_overrides(spec, opts);

    pstab::AnalysisOptions analysis;
    analysis.spectral.tol = opts.tol;
    analysis.fixed_point.tol = std::max(opts.tol, 1e-14);

    pstab::StabilityReport report;
    if (spec.delay) {
        if (opts.p != 1) {
            throw pstab::SpecError(
                "delayed analysis is a first-mean (p = 1) certificate; drop --p or the "
                "delay fragment");
        }
        report = spec.is_ensemble()
                     ? pstab::check_delayed_first_mean_stable(spec.ensemble(),
                                                              spec.delay->policy,
                                                              spec.delay->bound, analysis)
                     : pstab::check_delayed_first_mean_stable(spec.switched(),
                                                              spec.delay->policy,
                                                              spec.delay->bound, analysis);
    } else if (opts.p == 1) {
        report = spec.is_ensemble()
                     ? pstab::check_patient_stability(spec.ensemble(), analysis)
                     : pstab::check_patient_stability(spec.switched(), analysis);
    } else {
        if (spec.is_ensemble()) {
            throw pstab::SpecError(
                "interval ensembles support p = 1 analytically; use `estimate` for "
                "larger p");
        }
        report = pstab::check_first_mean_stable(spec.switched(), opts.p, analysis);
    }

    write_or_print(opts.format == "json" ? pstab::report_to_json(report)
                                         : pstab::report_to_text(report),
                   opts.out_path);
    return report.verdict == pstab::Verdict::inconclusive ? kExitInconclusive
                                                          : kExitStable;
}

int run_reduce(const CommonOpts& opts) {
    if (opts.format == "csv") {
        throw pstab::SpecError("--format csv applies to simulate; use text or json");
    }
    const pstab::BlockFile file = pstab::load_blocks(opts.spec_path);
    const pstab::ReductionCheck check = pstab::verify_reduction_equivalence(file.blocks);

    std::ostringstream os;
    if (opts.format == "json") {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "{\n  \"rho_companion\": %.12g,\n  \"rho_sum\": %.12g,\n"
                      "  \"same_side_of_one\": %s,\n  \"at_boundary\": %s\n}\n",
                      check.rho_companion, check.rho_sum,
                      check.same_side_of_one ? "true" : "false",
                      check.at_boundary ? "true" : "false");
        os << buf;
    } else {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "companion radius: %.6g\nstage-sum radius: %.6g\n",
                      check.rho_companion, check.rho_sum);
        os << buf;
        if (check.at_boundary) {
            os << "at tolerance boundary of 1: inconclusive\n";
        } else if (check.rho_companion < 1.0 && check.rho_sum < 1.0) {
            os << "both below 1\n";
        } else if (check.rho_companion >= 1.0 && check.rho_sum >= 1.0) {
            os << "both above 1\n";
        } else {
            os << "radii on opposite sides of 1\n";
        }
    }
    write_or_print(os.str(), opts.out_path);

    if (check.at_boundary) return kExitInconclusive;
    return (check.rho_companion < 1.0 && check.rho_sum < 1.0) ? kExitStable
                                                              : kExitInconclusive;
}

int run_embed(const CommonOpts& opts) {
    pstab::SystemSpec spec = pstab::load_system_spec(opts.spec_path);
    if (spec.is_ensemble()) {
        throw pstab::SpecError("embed expects a finite map set, not an ensemble");
    }
    if (opts.bound && !spec.delay) {
        pstab::DelayConfig cfg;
        cfg.bound = *opts.bound;
        cfg.policy = pstab::DelayPolicy::none();
        spec.delay = cfg;
    }
    if (!spec.delay) {
        throw pstab::SpecError("embed needs a delay fragment (or --L) in the spec");
    }
    const unsigned bound = opts.bound.value_or(spec.delay->bound);
    const pstab::DelayPolicy& policy = spec.delay->policy;

    pstab::DelayMatrix lags(spec.dimension(), bound);
    if (policy.kind == pstab::DelayPolicyKind::fixed) {
        lags = *policy.fixed_lags;
    } else if (policy.kind != pstab::DelayPolicyKind::none) {
        throw pstab::SpecError(
            "embed needs a single lag matrix: use policy kind 'fixed' or 'none'");
    }

    const pstab::SwitchedSystem& sys = spec.switched();
    std::vector<pstab::MapSpec> embedded;
    std::vector<pstab::DenseMatrix> companions;
    for (const pstab::MapSpec& f : sys.maps) {
        embedded.push_back(pstab::embed_map(f, lags, bound));
        companions.push_back(pstab::embed_matrix(pstab::lipschitz_matrix(f), lags, bound));
    }
    pstab::SwitchedSystem big(std::move(embedded), sys.weights);
    write_or_print(pstab::serialize_embedded_system(big, companions), opts.out_path);
    return kExitStable;
}

struct SimulateOpts {
    std::size_t steps = 300;
    std::size_t trajectories = 1000;
    std::uint64_t seed = 42;
    std::string x0_csv;
    std::string decay_out;
};

std::vector<double> parse_x0(const std::string& csv, std::size_t n) {
    if (csv.empty()) {
        std::vector<double> x0(n, 0.0);
        x0[0] = 1.0;  // default start on the unit circle
        return x0;
    }
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw pstab::SpecError("--x0: '" + item + "' is not a number");
        }
    }
    return out;
}

int run_simulate(const CommonOpts& opts, const SimulateOpts& sim_opts) {
    pstab::SystemSpec spec = pstab::load_system_spec(opts.spec_path);
    apply_delay_overrides(spec, opts);
    const std::size_t n = spec.dimension();
    const std::vector<double> x0 = parse_x0(sim_opts.x0_csv, n);

    pstab::TrajectoryBatch batch;
    if (spec.is_ensemble()) {
        batch = spec.delay
                    ? pstab::simulate_delayed(spec.ensemble(), spec.delay->policy,
                                              spec.delay->bound, x0, sim_opts.steps,
                                              sim_opts.trajectories, sim_opts.seed)
                    : pstab::simulate(spec.ensemble(), x0, sim_opts.steps,
                                      sim_opts.trajectories, sim_opts.seed);
    } else if (spec.delay) {
        const pstab::DelayedSwitchedSystem delayed =
            pstab::delayed_system(spec.switched(), spec.delay->policy, spec.delay->bound);
        batch = pstab::simulate(delayed, x0, sim_opts.steps, sim_opts.trajectories,
                                sim_opts.seed);
    } else {
        batch = pstab::simulate(spec.switched(), x0, sim_opts.steps,
                                sim_opts.trajectories, sim_opts.seed);
    }

    // deviation reference: shared fixed point when one exists, else the origin
    std::vector<double> x_tilde(n, 0.0);
    std::string reference = "origin";
    if (!spec.is_ensemble()) {
        const pstab::FixedPointResult fp =
            pstab::find_shared_fixed_point(spec.switched());
        if (fp.status == pstab::FixedPointStatus::found) {
            x_tilde = fp.point;
            reference = "shared fixed point";
        }
    }
    const pstab::DecayEstimate decay = pstab::estimate_decay(batch, x_tilde, opts.p);

    if (opts.format == "csv" && opts.out_path.empty()) {
        pstab::write_csv(std::cout, batch);
        return kExitStable;
    }

    std::size_t diverged = 0;
    for (const pstab::Trajectory& t : batch.trajectories) diverged += t.diverged;

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "trajectories: %zu  steps: %zu  seed: %llu  diverged: %zu\n"
                  "deviation reference: %s\n"
                  "decay_detected: %s  beta_hat: %.6g  c_hat: %.6g\n",
                  batch.num_trajectories, batch.horizon,
                  static_cast<unsigned long long>(batch.seed), diverged, reference.c_str(),
                  decay.decay_detected ? "true" : "false", decay.decay_rate,
                  std::exp(decay.log_intercept));
    std::cout << buf;

    if (!opts.out_path.empty()) {
        pstab::export_csv(batch, opts.out_path);
        std::cout << "trajectories written to " << opts.out_path << "\n";
    }
    if (!sim_opts.decay_out.empty()) {
        pstab::export_csv(decay, sim_opts.decay_out);
        std::cout << "decay curve written to " << sim_opts.decay_out << "\n";
    }
    return kExitStable;
}

struct EstimateOpts {
    std::size_t product_length = 200;  // --k
    std::size_t samples = 2000;
    std::uint64_t seed = 42;
};

int run_estimate(const CommonOpts& opts, const EstimateOpts& est_opts) {
    const pstab::SystemSpec spec = pstab::load_system_spec(opts.spec_path);
    double estimate = 0.0;
    std::optional<double> exact;
    if (spec.is_ensemble()) {
        estimate = pstab::mc_p_radius_estimate(spec.ensemble(), opts.p,
                                               est_opts.product_length, est_opts.samples,
                                               est_opts.seed);
        if (opts.p == 1) exact = pstab::p_radius(spec.ensemble(), 1);
    } else {
        const pstab::LipschitzSet ls = pstab::lipschitz_set(spec.switched());
        estimate = pstab::mc_p_radius_estimate(ls, opts.p, est_opts.product_length,
                                               est_opts.samples, est_opts.seed);
        exact = pstab::p_radius(ls, opts.p);
    }

    char buf[192];
    std::snprintf(buf, sizeof(buf), "mc_p_radius_estimate (p=%u, k=%zu, samples=%zu): %.6g\n",
                  opts.p, est_opts.product_length, est_opts.samples, estimate);
    std::cout << buf;
    if (exact) {
        std::snprintf(buf, sizeof(buf), "closed-form p-radius: %.6g  (difference %.3g)\n",
                      *exact, estimate - *exact);
        std::cout << buf;
    }
    return kExitStable;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certify and simulate stochastically switched, stochastically "
                 "time-delayed systems"};
    app.require_subcommand(1);

    CommonOpts common;
    SimulateOpts sim_opts;
    EstimateOpts est_opts;
    unsigned bound_flag = 0;
    std::string policy_flag;

    auto add_common = [&](CLI::App* cmd, bool with_delay_flags) {
        cmd->add_option("spec", common.spec_path, "input JSON file")->required();
        cmd->add_option("--p", common.p, "mean exponent p (default 1)");
        cmd->add_option("--out", common.out_path, "write output to this file");
        cmd->add_option("--format", common.format, "text, json or csv (simulate)")
            ->check(CLI::IsMember({"text", "json", "csv"}));
        if (with_delay_flags) {
            cmd->add_option("--L", bound_flag, "delay bound override")
                ->each([&](const std::string&) { common.bound = bound_flag; });
            cmd->add_option("--policy", policy_flag,
                            "delay policy override: none or iid_uniform_entries")
                ->each([&](const std::string&) { common.policy = policy_flag; });
        }
    };

    CLI::App* analyze = app.add_subcommand("analyze", "run the stability certificate");
    add_common(analyze, true);
    analyze->add_option("--tol", common.tol,
                        "spectral / fixed-point tolerance (default 1e-12)");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo trajectories + decay");
    add_common(simulate, true);
    simulate->add_option("--steps", sim_opts.steps, "horizon (default 300)");
    simulate->add_option("--trajectories", sim_opts.trajectories,
                         "trajectory count (default 1000)");
    simulate->add_option("--seed", sim_opts.seed, "top-level seed (default 42)");
    simulate->add_option("--x0", sim_opts.x0_csv, "initial condition, comma separated");
    simulate->add_option("--decay-out", sim_opts.decay_out, "write the decay curve CSV");

    CLI::App* embed = app.add_subcommand("embed", "write the delay-space embedding");
    add_common(embed, true);

    CLI::App* reduce = app.add_subcommand("reduce", "companion vs stage-sum radii");
    add_common(reduce, false);

    CLI::App* estimate = app.add_subcommand("estimate", "Monte Carlo p-radius estimate");
    add_common(estimate, false);
    estimate->add_option("--k", est_opts.product_length, "product length (default 200)");
    estimate->add_option("--samples", est_opts.samples, "sample count (default 2000)");
    estimate->add_option("--seed", est_opts.seed, "seed (default 42)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) return run_analyze(common);
        if (app.got_subcommand(simulate)) return run_simulate(common, sim_opts);
        if (app.got_subcommand(embed)) return run_embed(common);
        if (app.got_subcommand(reduce)) return run_reduce(common);
        if (app.got_subcommand(estimate)) return run_estimate(common, est_opts);
    } catch (const pstab::SpecError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumericalError;
    }
    return kExitInputError;
}
