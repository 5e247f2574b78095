#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pstab {

/// Dense real matrix, row-major. The workhorse for comparison matrices,
/// expectation matrices and companion forms; deliberately small — no views,
/// no sparse storage, no complex arithmetic.
class DenseMatrix {
public:
    DenseMatrix() = default;

    /// Zero-filled rows × cols matrix. Both dimensions must be ≥ 1.
    DenseMatrix(std::size_t rows, std::size_t cols);

    /// Takes ownership of row-major entries; entries.size() must equal rows × cols.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    /// Brace construction from rows, e.g. DenseMatrix{{1, 2}, {3, 4}}.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    [[nodiscard]] static DenseMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool is_square() const { return rows_ == cols_; }

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        return entries_[i * cols_ + j];
    }
    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) {
        return entries_[i * cols_ + j];
    }

    [[nodiscard]] const std::vector<double>& entries() const { return entries_; }

    [[nodiscard]] bool is_nonnegative() const;
    [[nodiscard]] bool is_zero() const;

    /// Throws std::invalid_argument naming `what` if any entry is negative.
    void require_nonnegative(const char* what) const;

    /// Entrywise absolute value.
    [[nodiscard]] DenseMatrix abs() const;

    /// Induced ∞-norm: max over rows of the absolute row sum.
    [[nodiscard]] double inf_norm() const;

    /// Largest absolute entry.
    [[nodiscard]] double max_abs() const;

    /// Matrix–vector product; x.size() must equal cols().
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;

    friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
    friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
    friend DenseMatrix operator*(double s, const DenseMatrix& a);
    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

/// Largest entrywise difference between two same-shape matrices.
[[nodiscard]] double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// Default cap on the row count of Kronecker results. Kronecker powers grow
/// as n^p, so an explicit ceiling turns runaway requests into clean errors.
inline constexpr std::size_t kKronRowCap = 10'000;

/// Kronecker product: block (i, j) of the result is a(i, j) · b.
[[nodiscard]] DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b,
                               std::size_t row_cap = kKronRowCap);

/// p-fold Kronecker power, p ≥ 1.
[[nodiscard]] DenseMatrix kron_power(const DenseMatrix& a, unsigned p,
                                     std::size_t row_cap = kKronRowCap);

/// Block companion matrix: first block row holds the given n×n blocks
/// left to right, the block subdiagonal holds identities, the rest is zero.
/// With L+1 blocks the result is n(L+1) × n(L+1).
[[nodiscard]] DenseMatrix assemble_companion(std::span<const DenseMatrix> blocks,
                                             std::size_t n);

}  // namespace pstab
