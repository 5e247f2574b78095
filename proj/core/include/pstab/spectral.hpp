#pragma once

#include <cstddef>
#include <span>

#include "pstab/matrix.hpp"

namespace pstab {

enum class SpectralMethod {
    power_iteration,     ///< per-component shifted power iteration
    nilpotent_detected,  ///< m^n verified to be exactly zero
    gelfand_fallback,    ///< bracketed ‖m^k‖_∞^{1/k} sequence
};

struct SpectralResult {
    double radius = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    SpectralMethod method = SpectralMethod::power_iteration;
};

struct SpectralOptions {
    double tol = 1e-12;           ///< relative tolerance on the radius
    std::size_t max_iter = 100'000;
};

/// Spectral radius of a square nonnegative matrix.
///
/// The positivity pattern is condensed into strongly connected components;
/// each nontrivial component is irreducible, so its Perron root is simple and
/// power iteration on the +I-shifted (primitive) block converges geometrically
/// from the all-ones start. Trivial components contribute their diagonal
/// entry. A matrix with no nontrivial component and no self-loop is nilpotent,
/// which is confirmed exactly (m^n = 0 — nonnegative entries cannot cancel).
/// If a block refuses to converge within max_iter the whole matrix falls back
/// to the Gelfand sequence ‖m^k‖_∞^{1/k}, doubled via repeated squaring up to
/// k = 2^20 and bracketed until successive estimates differ by < tol.
///
/// Throws std::invalid_argument for non-square input, negative entries or
/// tol <= 0. Non-convergence is reported through the result, never silently.
[[nodiscard]] SpectralResult spectral_radius(const DenseMatrix& m,
                                             const SpectralOptions& opts = {});

/// Convenience wrapper: returns the radius, throwing std::runtime_error if no
/// strategy converged.
[[nodiscard]] double spectral_radius_value(const DenseMatrix& m,
                                           const SpectralOptions& opts = {});

/// Solves a · x = b by Gaussian elimination with scaled partial pivoting;
/// b may carry multiple right-hand sides as columns. Throws std::runtime_error
/// when a pivot falls below 1e-12 × the row's magnitude (singular system).
[[nodiscard]] DenseMatrix solve_linear(DenseMatrix a, DenseMatrix b);

/// Isoradial reduction of a square nonnegative matrix onto the index set
/// `keep` (0-based, nonempty proper subset): the Schur-complement-like
/// transform at the spectral radius,
///   M_SS − M_SS̄ (M_S̄S̄ − ρ(M) I)^{-1} M_S̄S,
/// which preserves the spectral radius whenever it exists. The inverse is
/// applied through a linear solve, never formed. Throws std::runtime_error
/// ("reduction does not exist") when the shifted complement block is singular,
/// std::invalid_argument for an empty or full index set.
[[nodiscard]] DenseMatrix isoradial_reduce(const DenseMatrix& m,
                                           std::span<const std::size_t> keep,
                                           const SpectralOptions& opts = {});

}  // namespace pstab
