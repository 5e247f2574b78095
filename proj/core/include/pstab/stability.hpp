#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pstab/delay.hpp"
#include "pstab/matrix.hpp"
#include "pstab/spectral.hpp"
#include "pstab/systems.hpp"

namespace pstab {

/// Verdicts are three-valued on purpose: the radius test is sufficient, not
/// necessary, so a radius ≥ 1 never certifies instability.
enum class Verdict {
    first_mean_stable,
    patiently_first_mean_stable,
    inconclusive,
};

[[nodiscard]] const char* verdict_name(Verdict v);

/// One link of the certificate: a claim, the rule it invokes, and the numeric
/// evidence backing it.
struct CertificateStep {
    std::string claim;
    std::string rule;
    std::string evidence;
};

/// Radii within this distance of 1 are treated as "at the boundary" and the
/// verdict stays inconclusive; the reduction equivalence is strict-inequality
/// based and gives no information exactly at 1.
inline constexpr double kRadiusBoundary = 1e-9;

struct StabilityReport {
    unsigned p = 1;
    DenseMatrix expectation_matrix;
    double p_radius = 0.0;
    Verdict verdict = Verdict::inconclusive;
    bool at_radius_boundary = false;
    std::vector<CertificateStep> certificate_chain;
    std::optional<std::vector<double>> shared_fixed_point;
    double fixed_point_residual = 0.0;
};

/// Recomputes the verdict from the numbers recorded in the report; the
/// verdict field must always agree with this (reports are self-auditing).
[[nodiscard]] Verdict audit_verdict(const StabilityReport& report, bool patient_claim);

/// Tolerances and caps shared by the certification entry points.
struct AnalysisOptions {
    SpectralOptions spectral;
    FixedPointOptions fixed_point;
    std::size_t kron_row_cap = kKronRowCap;
};

/// p-radius of a finite nonnegative set: ρ(Σ_k w_k · A_k^⊗p)^{1/p}.
[[nodiscard]] double p_radius(const LipschitzSet& ls, unsigned p,
                              std::size_t kron_row_cap = kKronRowCap);

/// p-radius of an interval ensemble's comparison system. Only p = 1 has a
/// closed form here; larger p throws and points at the Monte Carlo estimator.
[[nodiscard]] double p_radius(const IntervalEnsemble& e, unsigned p);

/// Sufficient test for exponential stability in p-th mean: builds the
/// comparison set, finds the shared fixed point, computes the p-radius, and
/// certifies iff everything succeeded and the radius is below 1.
[[nodiscard]] StabilityReport check_first_mean_stable(const SwitchedSystem& sys, unsigned p,
                                                      const AnalysisOptions& opts = {});

/// Ensemble variant; p must be 1 (the only exponent with a closed form here).
[[nodiscard]] StabilityReport check_first_mean_stable(const IntervalEnsemble& e, unsigned p,
                                                      const AnalysisOptions& opts = {});

/// Patient certificate: a 1-radius below 1 plus a shared fixed point covers
/// every bounded-delay stochastic delayed version of the system, for every
/// bound and every marginal-preserving delay distribution.
[[nodiscard]] StabilityReport check_patient_stability(const SwitchedSystem& sys,
                                                      const AnalysisOptions& opts = {});
[[nodiscard]] StabilityReport check_patient_stability(const IntervalEnsemble& e,
                                                      const AnalysisOptions& opts = {});

struct ReductionCheck {
    double rho_companion = 0.0;
    double rho_sum = 0.0;
    bool same_side_of_one = false;
    bool at_boundary = false;  ///< either radius within kRadiusBoundary of 1
};

/// Computes the spectral radius of the block companion of the given stages and
/// of their plain sum, and checks the two land on the same side of 1.
[[nodiscard]] ReductionCheck verify_reduction_equivalence(std::span<const DenseMatrix> blocks);

/// Cross-validation path: analyzes the delayed comparison system directly
/// through its companion expectation matrix, without the reduction shortcut.
[[nodiscard]] StabilityReport check_delayed_first_mean_stable(const SwitchedSystem& sys,
                                                              const DelayPolicy& policy,
                                                              unsigned bound,
                                                              const AnalysisOptions& opts = {});
[[nodiscard]] StabilityReport check_delayed_first_mean_stable(const IntervalEnsemble& e,
                                                              const DelayPolicy& policy,
                                                              unsigned bound,
                                                              const AnalysisOptions& opts = {});

/// Human-readable certificate, one line per chain step.
[[nodiscard]] std::string report_to_text(const StabilityReport& report);

}  // namespace pstab
