#include "pstab/stability.hpp"

#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "pstab/spectral.hpp"

namespace pstab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_vector(std::span<const double> v) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << fmt(v[i]);
    }
    os << "]";
    return os.str();
}

bool below_one(double radius) { return radius < 1.0 - kRadiusBoundary; }
bool near_one(double radius) { return std::fabs(radius - 1.0) <= kRadiusBoundary; }

void push_radius_steps(StabilityReport& report, const char* matrix_label) {
    report.certificate_chain.push_back(
        {std::string("expectation matrix ") + matrix_label + " assembled",
         "entrywise-expectation",
         std::to_string(report.expectation_matrix.rows()) + "x" +
             std::to_string(report.expectation_matrix.cols())});
    std::string claim;
    if (near_one(report.p_radius)) {
        claim = "radius at the tolerance boundary of 1 - inconclusive";
    } else if (report.p_radius < 1.0) {
        claim = "radius below 1";
    } else {
        claim = "radius not below 1 (criterion is sufficient only - no instability claim)";
    }
    report.certificate_chain.push_back(
        {claim, "p-radius-of-expectation", fmt(report.p_radius)});
}

void push_fixed_point_step(StabilityReport& report, const FixedPointResult& fp) {
    switch (fp.status) {
        case FixedPointStatus::found:
            report.shared_fixed_point = fp.point;
            report.fixed_point_residual = fp.worst_residual;
            report.certificate_chain.push_back({"shared fixed point found",
                                                "damped-fixed-point-iteration",
                                                fmt_vector(fp.point) + ", residual " +
                                                    fmt(fp.worst_residual)});
            break;
        case FixedPointStatus::no_convergence:
            report.certificate_chain.push_back(
                {"fixed-point iteration did not converge", "damped-fixed-point-iteration",
                 std::to_string(fp.iterations) + " iterations"});
            break;
        case FixedPointStatus::not_shared:
            report.certificate_chain.push_back(
                {"candidate point is not fixed by every map",
                 "damped-fixed-point-iteration",
                 "map " + std::to_string(fp.failing_map) + " residual " +
                     fmt(fp.worst_residual)});
            break;
    }
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::first_mean_stable: return "first_mean_stable";
        case Verdict::patiently_first_mean_stable: return "patiently_first_mean_stable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict audit_verdict(const StabilityReport& report, bool patient_claim) {
    if (!std::isfinite(report.p_radius)) return Verdict::inconclusive;
    if (report.at_radius_boundary || !below_one(report.p_radius)) {
        return Verdict::inconclusive;
    }
    if (!report.shared_fixed_point.has_value()) return Verdict::inconclusive;
    if (patient_claim) {
        return report.p == 1 ? Verdict::patiently_first_mean_stable
                             : Verdict::inconclusive;
    }
    return Verdict::first_mean_stable;
}

double p_radius(const LipschitzSet& ls, unsigned p, std::size_t kron_row_cap) {
    if (p == 0) throw std::invalid_argument("p_radius: p must be >= 1");
    if (ls.matrices.empty()) throw std::invalid_argument("p_radius: empty set");
    DenseMatrix acc;
    for (std::size_t k = 0; k < ls.matrices.size(); ++k) {
        ls.matrices[k].require_nonnegative("p_radius");
        DenseMatrix term =
            p == 1 ? ls.matrices[k] : kron_power(ls.matrices[k], p, kron_row_cap);
        term = ls.weights[k] * term;
        acc = (k == 0) ? std::move(term) : acc + term;
    }
    return std::pow(spectral_radius_value(acc), 1.0 / static_cast<double>(p));
}

double p_radius(const IntervalEnsemble& e, unsigned p) {
    if (p == 0) throw std::invalid_argument("p_radius: p must be >= 1");
    if (p > 1) {
        throw std::invalid_argument(
            "p_radius: interval ensembles have a closed form only for p = 1; use the "
            "Monte Carlo estimator for larger p");
    }
    return spectral_radius_value(ensemble_mean(e, /*absolute=*/true));
}

StabilityReport check_first_mean_stable(const SwitchedSystem& sys, unsigned p,
                                        const AnalysisOptions& opts) {
    StabilityReport report;
    report.p = p;

    const LipschitzSet ls = lipschitz_set(sys);
    report.certificate_chain.push_back(
        {"comparison set built (one nonnegative matrix per map, weights mirrored)",
         "lipschitz-linearization", std::to_string(ls.matrices.size()) + " matrices"});

    push_fixed_point_step(report, find_shared_fixed_point(sys, opts.fixed_point));

    report.expectation_matrix = expectation_matrix(ls);
    try {
        report.p_radius = p_radius(ls, p, opts.kron_row_cap);
    } catch (const std::exception& e) {
        report.p_radius = std::numeric_limits<double>::quiet_NaN();
        report.certificate_chain.push_back(
            {"p-radius computation failed", "p-radius-of-expectation", e.what()});
        report.verdict = Verdict::inconclusive;
        return report;
    }
    report.at_radius_boundary = near_one(report.p_radius);
    push_radius_steps(report, "of the comparison set");

    report.verdict = audit_verdict(report, /*patient_claim=*/false);
    return report;
}

StabilityReport check_first_mean_stable(const IntervalEnsemble& e, unsigned p,
                                        const AnalysisOptions& opts) {
    if (p != 1) {
        throw std::invalid_argument(
            "check_first_mean_stable: interval ensembles support p = 1 only; use the "
            "Monte Carlo estimator for larger p");
    }
    StabilityReport report;
    report.p = 1;
    report.expectation_matrix = ensemble_mean(e, /*absolute=*/true);
    report.certificate_chain.push_back(
        {"comparison expectation taken entrywise over the interval law (absolute mean)",
         "lipschitz-linearization", std::to_string(e.n) + "x" + std::to_string(e.n)});
    report.shared_fixed_point = std::vector<double>(e.n, 0.0);
    report.fixed_point_residual = 0.0;
    report.certificate_chain.push_back({"origin is fixed by every linear map",
                                        "shared-fixed-point-by-structure", "exact"});
    report.p_radius = spectral_radius_value(report.expectation_matrix, opts.spectral);
    report.at_radius_boundary = near_one(report.p_radius);
    push_radius_steps(report, "of the interval comparison law");
    report.verdict = audit_verdict(report, /*patient_claim=*/false);
    return report;
}

StabilityReport check_patient_stability(const SwitchedSystem& sys,
                                        const AnalysisOptions& opts) {
    StabilityReport report;
    report.p = 1;

    const LipschitzSet ls = lipschitz_set(sys);
    report.certificate_chain.push_back(
        {"comparison set built (one nonnegative matrix per map, weights mirrored)",
         "lipschitz-linearization", std::to_string(ls.matrices.size()) + " matrices"});

    push_fixed_point_step(report, find_shared_fixed_point(sys, opts.fixed_point));

    report.expectation_matrix = expectation_matrix(ls);
    report.p_radius = spectral_radius_value(report.expectation_matrix, opts.spectral);
    report.at_radius_boundary = near_one(report.p_radius);
    push_radius_steps(report, "of the comparison set");

    report.certificate_chain.push_back(
        {"every bounded-delay version shares the verdict: the delayed expectation "
         "matrix is a block companion whose stage sum equals this expectation matrix, "
         "and companion and sum radii sit on the same side of 1",
         "companion-reduction", "holds for every bound and marginal-preserving policy"});

    report.verdict = audit_verdict(report, /*patient_claim=*/true);
    return report;
}

StabilityReport check_patient_stability(const IntervalEnsemble& e,
                                        const AnalysisOptions& opts) {
    StabilityReport report;
    report.p = 1;

    report.expectation_matrix = ensemble_mean(e, /*absolute=*/true);
    report.certificate_chain.push_back(
        {"comparison expectation taken entrywise over the interval law (absolute mean)",
         "lipschitz-linearization", std::to_string(e.n) + "x" + std::to_string(e.n)});

    // every map in the ensemble is linear, so the origin is fixed by all of them
    report.shared_fixed_point = std::vector<double>(e.n, 0.0);
    report.fixed_point_residual = 0.0;
    report.certificate_chain.push_back({"origin is fixed by every linear map",
                                        "shared-fixed-point-by-structure", "exact"});

    report.p_radius = spectral_radius_value(report.expectation_matrix, opts.spectral);
    report.at_radius_boundary = near_one(report.p_radius);
    push_radius_steps(report, "of the interval comparison law");

    report.certificate_chain.push_back(
        {"every bounded-delay version shares the verdict: the delayed expectation "
         "matrix is a block companion whose stage sum equals this expectation matrix, "
         "and companion and sum radii sit on the same side of 1",
         "companion-reduction", "holds for every bound and marginal-preserving policy"});

    report.verdict = audit_verdict(report, /*patient_claim=*/true);
    return report;
}

ReductionCheck verify_reduction_equivalence(std::span<const DenseMatrix> blocks) {
    if (blocks.empty()) {
        throw std::invalid_argument("verify_reduction_equivalence: need blocks");
    }
    const std::size_t n = blocks[0].rows();
    for (const DenseMatrix& b : blocks) {
        b.require_nonnegative("verify_reduction_equivalence");
    }
    DenseMatrix sum(n, n);
    for (const DenseMatrix& b : blocks) sum = sum + b;

    ReductionCheck check;
    check.rho_companion = spectral_radius_value(assemble_companion(blocks, n));
    check.rho_sum = spectral_radius_value(sum);
    check.at_boundary = near_one(check.rho_companion) || near_one(check.rho_sum);
    check.same_side_of_one = (check.rho_companion < 1.0) == (check.rho_sum < 1.0);
    return check;
}

namespace {

StabilityReport delayed_report_from(DenseMatrix companion,
                                    std::optional<std::vector<double>> fixed_point,
                                    double fixed_point_residual,
                                    std::vector<CertificateStep> prologue,
                                    const SpectralOptions& spectral) {
    StabilityReport report;
    report.p = 1;
    report.certificate_chain = std::move(prologue);
    report.expectation_matrix = std::move(companion);
    report.p_radius = spectral_radius_value(report.expectation_matrix, spectral);
    report.at_radius_boundary = near_one(report.p_radius);
    report.shared_fixed_point = std::move(fixed_point);
    report.fixed_point_residual = fixed_point_residual;
    push_radius_steps(report, "of the delayed comparison system (block companion)");
    report.verdict = audit_verdict(report, /*patient_claim=*/false);
    return report;
}

}  // namespace

StabilityReport check_delayed_first_mean_stable(const SwitchedSystem& sys,
                                                const DelayPolicy& policy, unsigned bound,
                                                const AnalysisOptions& opts) {
    // validate the policy against the system up front
    const DelayedSwitchedSystem delayed = delayed_system(sys, policy, bound);

    const LipschitzSet ls = lipschitz_set(sys);
    std::vector<CertificateStep> prologue;
    prologue.push_back({"comparison set built for the delayed system",
                        "lipschitz-linearization",
                        std::to_string(ls.matrices.size()) + " matrices, bound " +
                            std::to_string(bound)});

    const FixedPointResult fp = find_shared_fixed_point(sys, opts.fixed_point);
    std::optional<std::vector<double>> point;
    double residual = 0.0;
    if (fp.status == FixedPointStatus::found) {
        point = fp.point;
        residual = fp.worst_residual;
        prologue.push_back({"shared fixed point found (undelayed block)",
                            "damped-fixed-point-iteration", fmt(fp.worst_residual)});
    } else {
        prologue.push_back({"no shared fixed point available",
                            "damped-fixed-point-iteration", "see undelayed analysis"});
    }

    DenseMatrix companion = expected_delayed_lipschitz(ls, policy, bound);
    (void)delayed;
    return delayed_report_from(std::move(companion), std::move(point), residual,
                               std::move(prologue), opts.spectral);
}

StabilityReport check_delayed_first_mean_stable(const IntervalEnsemble& e,
                                                const DelayPolicy& policy, unsigned bound,
                                                const AnalysisOptions& opts) {
    std::vector<CertificateStep> prologue;
    prologue.push_back({"comparison expectation of the interval law (absolute mean)",
                        "lipschitz-linearization",
                        std::to_string(e.n) + "x" + std::to_string(e.n) + ", bound " +
                            std::to_string(bound)});
    prologue.push_back({"origin is fixed by every linear map",
                        "shared-fixed-point-by-structure", "exact"});
    DenseMatrix companion =
        expected_delayed_lipschitz(ensemble_mean(e, /*absolute=*/true), policy, bound);
    return delayed_report_from(std::move(companion), std::vector<double>(e.n, 0.0), 0.0,
                               std::move(prologue), opts.spectral);
}

std::string report_to_text(const StabilityReport& report) {
    std::ostringstream os;
    os << "verdict: " << verdict_name(report.verdict) << "\n";
    os << "p: " << report.p << "\n";
    os << "p-radius: " << fmt(report.p_radius);
    if (report.at_radius_boundary) os << "  (at tolerance boundary of 1)";
    os << "\n";
    if (report.shared_fixed_point) {
        os << "shared fixed point: " << fmt_vector(*report.shared_fixed_point)
           << "  (residual " << fmt(report.fixed_point_residual) << ")\n";
    }
    if (report.verdict == Verdict::inconclusive) {
        os << "note: the radius test is sufficient, not necessary; inconclusive does "
              "not mean unstable\n";
    }
    os << "certificate:\n";
    for (std::size_t i = 0; i < report.certificate_chain.size(); ++i) {
        const CertificateStep& s = report.certificate_chain[i];
        os << "  " << (i + 1) << ". " << s.claim << " [" << s.rule << "]: " << s.evidence
           << "\n";
    }
    return os.str();
}

}  // namespace pstab
