#include "pstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pstab {

namespace {

// Strongly connected components of the positivity pattern (edge i -> j iff
// m(i,j) > 0), by Kosaraju's two-pass DFS with explicit stacks.
std::vector<std::vector<std::size_t>> positivity_components(const DenseMatrix& m) {
    const std::size_t n = m.rows();
    std::vector<std::vector<std::size_t>> fwd(n), rev(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (m(i, j) > 0.0) {
                fwd[i].push_back(j);
                rev[j].push_back(i);
            }
        }
    }

    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start]) continue;
        // iterative DFS recording exit order
        std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
        seen[start] = 1;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next < fwd[v].size()) {
                std::size_t w = fwd[v][next++];
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.emplace_back(w, 0);
                }
            } else {
                order.push_back(v);
                stack.pop_back();
            }
        }
    }

    std::vector<std::vector<std::size_t>> comps;
    std::vector<char> assigned(n, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (assigned[*it]) continue;
        comps.emplace_back();
        std::vector<std::size_t> stack{*it};
        assigned[*it] = 1;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            comps.back().push_back(v);
            for (std::size_t w : rev[v]) {
                if (!assigned[w]) {
                    assigned[w] = 1;
                    stack.push_back(w);
                }
            }
        }
    }
    return comps;
}

// Power iteration on block + I restricted to `idx`, all-ones start. The block
// is irreducible by construction, so the shifted matrix is primitive, its
// iterates stay strictly positive and the Collatz-Wielandt quotients
//   min_a y_a/x_a  <=  rho + 1  <=  max_a y_a/x_a
// bracket the Perron root at every step; convergence is certified when the
// bracket is tighter than the tolerance. Returns the block's radius through
// `out` and the iterations consumed.
bool shifted_power_block(const DenseMatrix& m, const std::vector<std::size_t>& idx,
                         const SpectralOptions& opts, double& out,
                         std::size_t& iterations) {
    const std::size_t k = idx.size();
    std::vector<double> x(k, 1.0), y(k, 0.0);
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        double peak = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            double acc = x[a];  // the +I shift
            for (std::size_t b = 0; b < k; ++b) acc += m(idx[a], idx[b]) * x[b];
            y[a] = acc;
            peak = std::max(peak, acc);
            const double quotient = acc / x[a];
            lo = std::min(lo, quotient);
            hi = std::max(hi, quotient);
        }
        if (hi - lo <= opts.tol * hi) {
            out = 0.5 * (lo + hi) - 1.0;
            iterations = it;
            return true;
        }
        for (std::size_t a = 0; a < k; ++a) x[a] = y[a] / peak;
    }
    iterations = opts.max_iter;
    return false;
}

// Gelfand sequence ‖m^k‖^{1/k} with k doubled by repeated squaring; the
// running power is kept normalized and its log-scale accumulated so radii
// above 1 cannot overflow.
SpectralResult gelfand_estimate(const DenseMatrix& m, const SpectralOptions& opts,
                                std::size_t prior_iterations) {
    constexpr std::size_t kMaxExponent = std::size_t{1} << 20;
    SpectralResult res;
    res.method = SpectralMethod::gelfand_fallback;
    res.iterations = prior_iterations;

    DenseMatrix power = m;
    double log_scale = 0.0;
    std::size_t k = 1;
    double est_prev = -1.0;
    while (true) {
        ++res.iterations;
        const double s = power.inf_norm();
        if (s == 0.0) {
            res.radius = 0.0;
            res.converged = true;
            return res;
        }
        const double est = std::exp((log_scale + std::log(s)) / static_cast<double>(k));
        res.radius = est;
        if (est_prev >= 0.0 && std::fabs(est - est_prev) < opts.tol * std::max(1.0, est)) {
            res.converged = true;
            return res;
        }
        est_prev = est;
        if (k >= kMaxExponent) {
            res.converged = false;
            return res;
        }
        power = (1.0 / s) * power;
        log_scale += std::log(s);
        power = power * power;
        log_scale *= 2.0;
        k *= 2;
    }
}

bool confirm_nilpotent(const DenseMatrix& m) {
    // exact: nonnegative entries cannot cancel, so m^n == 0 is decidable
    DenseMatrix power = m;
    for (std::size_t q = 1; q < m.rows() && !power.is_zero(); ++q) {
        power = power * m;
    }
    return power.is_zero();
}

}  // namespace

SpectralResult spectral_radius(const DenseMatrix& m, const SpectralOptions& opts) {
    if (!m.is_square()) {
        throw std::invalid_argument("spectral_radius: matrix must be square");
    }
    m.require_nonnegative("spectral_radius");
    if (opts.tol <= 0.0) {
        throw std::invalid_argument("spectral_radius: tolerance must be positive");
    }

    const auto comps = positivity_components(m);

    bool any_cycle = false;
    for (const auto& c : comps) {
        if (c.size() > 1 || m(c[0], c[0]) > 0.0) {
            any_cycle = true;
            break;
        }
    }
    if (!any_cycle) {
        // acyclic pattern: nilpotent; confirm with exact arithmetic
        SpectralResult res;
        res.method = SpectralMethod::nilpotent_detected;
        res.iterations = m.rows();
        res.converged = confirm_nilpotent(m);
        res.radius = 0.0;
        if (!res.converged) {
            throw std::logic_error("spectral_radius: acyclic pattern with nonzero power");
        }
        return res;
    }

    SpectralResult res;
    res.method = SpectralMethod::power_iteration;
    for (const auto& c : comps) {
        if (c.size() == 1 && m(c[0], c[0]) == 0.0) continue;
        if (c.size() == 1) {
            res.radius = std::max(res.radius, m(c[0], c[0]));
            continue;
        }
        double block_radius = 0.0;
        std::size_t used = 0;
        if (!shifted_power_block(m, c, opts, block_radius, used)) {
            return gelfand_estimate(m, opts, res.iterations + used);
        }
        res.iterations += used;
        res.radius = std::max(res.radius, block_radius);
    }
    res.converged = true;
    return res;
}

double spectral_radius_value(const DenseMatrix& m, const SpectralOptions& opts) {
    const SpectralResult res = spectral_radius(m, opts);
    if (!res.converged) {
        throw std::runtime_error("spectral_radius: no strategy converged after " +
                                 std::to_string(res.iterations) + " iterations");
    }
    return res.radius;
}

DenseMatrix solve_linear(DenseMatrix a, DenseMatrix b) {
    if (!a.is_square()) {
        throw std::invalid_argument("solve_linear: coefficient matrix must be square");
    }
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("solve_linear: right-hand side row count mismatch");
    }
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();

    std::vector<double> scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) scale[i] = std::max(scale[i], std::fabs(a(i, j)));
    }

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        double best_mag = -1.0;
        for (std::size_t r = col; r < n; ++r) {
            const double denom = scale[perm[r]] > 0.0 ? scale[perm[r]] : 1.0;
            const double mag = std::fabs(a(perm[r], col)) / denom;
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        std::swap(perm[col], perm[best]);
        const std::size_t p = perm[col];
        const double pivot = a(p, col);
        if (std::fabs(pivot) < 1e-12 * std::max(scale[p], 1e-300)) {
            throw std::runtime_error("solve_linear: singular system (pivot below threshold)");
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const std::size_t q = perm[r];
            const double f = a(q, col) / pivot;
            if (f == 0.0) continue;
            a(q, col) = 0.0;
            for (std::size_t j = col + 1; j < n; ++j) a(q, j) -= f * a(p, j);
            for (std::size_t j = 0; j < m; ++j) b(q, j) -= f * b(p, j);
        }
    }

    DenseMatrix x(n, m);
    for (std::size_t col = n; col-- > 0;) {
        const std::size_t p = perm[col];
        for (std::size_t j = 0; j < m; ++j) {
            double acc = b(p, j);
            for (std::size_t k = col + 1; k < n; ++k) acc -= a(p, k) * x(k, j);
            x(col, j) = acc / a(p, col);
        }
    }
    return x;
}

DenseMatrix isoradial_reduce(const DenseMatrix& m, std::span<const std::size_t> keep,
                             const SpectralOptions& opts) {
    if (!m.is_square()) {
        throw std::invalid_argument("isoradial_reduce: matrix must be square");
    }
    const std::size_t n = m.rows();
    std::vector<char> in_keep(n, 0);
    for (std::size_t idx : keep) {
        if (idx >= n) {
            throw std::invalid_argument("isoradial_reduce: index out of range");
        }
        if (in_keep[idx]) {
            throw std::invalid_argument("isoradial_reduce: duplicate index");
        }
        in_keep[idx] = 1;
    }
    std::vector<std::size_t> s, t;
    for (std::size_t i = 0; i < n; ++i) (in_keep[i] ? s : t).push_back(i);
    if (s.empty() || t.empty()) {
        throw std::invalid_argument(
            "isoradial_reduce: index set must be a nonempty proper subset");
    }

    const double rho = spectral_radius_value(m, opts);

    DenseMatrix m_ss(s.size(), s.size());
    DenseMatrix m_st(s.size(), t.size());
    DenseMatrix m_ts(t.size(), s.size());
    DenseMatrix m_tt(t.size(), t.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) m_ss(i, j) = m(s[i], s[j]);
        for (std::size_t j = 0; j < t.size(); ++j) m_st(i, j) = m(s[i], t[j]);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) m_ts(i, j) = m(t[i], s[j]);
        for (std::size_t j = 0; j < t.size(); ++j) m_tt(i, j) = m(t[i], t[j]);
    }
    for (std::size_t i = 0; i < t.size(); ++i) m_tt(i, i) -= rho;

    DenseMatrix solved;
    try {
        solved = solve_linear(std::move(m_tt), std::move(m_ts));
    } catch (const std::runtime_error&) {
        throw std::runtime_error(
            "isoradial_reduce: reduction does not exist (shifted complement block is "
            "singular)");
    }
    return m_ss - m_st * solved;
}

}  // namespace pstab
