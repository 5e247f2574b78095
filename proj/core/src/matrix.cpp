#include "pstab/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace pstab {

namespace {

void require_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
    }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {
    require_dims(rows, cols);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    require_dims(rows, cols);
    if (entries_.size() != rows_ * cols_) {
        throw std::invalid_argument(
            "DenseMatrix: entry count " + std::to_string(entries_.size()) +
            " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    require_dims(rows_, cols_);
    entries_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw std::invalid_argument("DenseMatrix: ragged initializer rows");
        }
        entries_.insert(entries_.end(), row.begin(), row.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool DenseMatrix::is_nonnegative() const {
    for (double v : entries_) {
        if (!(v >= 0.0)) return false;  // catches negatives and NaN
    }
    return true;
}

bool DenseMatrix::is_zero() const {
    for (double v : entries_) {
        if (v != 0.0) return false;
    }
    return true;
}

void DenseMatrix::require_nonnegative(const char* what) const {
    if (!is_nonnegative()) {
        throw std::invalid_argument(std::string(what) + ": matrix has a negative entry");
    }
}

DenseMatrix DenseMatrix::abs() const {
    DenseMatrix out = *this;
    for (double& v : out.entries_) v = std::fabs(v);
    return out;
}

double DenseMatrix::inf_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) row += std::fabs((*this)(i, j));
        best = std::max(best, row);
    }
    return best;
}

double DenseMatrix::max_abs() const {
    double best = 0.0;
    for (double v : entries_) best = std::max(best, std::fabs(v));
    return best;
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
    if (x.size() != cols_) {
        throw std::invalid_argument("DenseMatrix::apply: vector length mismatch");
    }
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
        throw std::invalid_argument("matrix addition: shape mismatch");
    }
    DenseMatrix out = a;
    for (std::size_t k = 0; k < out.entries_.size(); ++k) out.entries_[k] += b.entries_[k];
    return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
        throw std::invalid_argument("matrix subtraction: shape mismatch");
    }
    DenseMatrix out = a;
    for (std::size_t k = 0; k < out.entries_.size(); ++k) out.entries_[k] -= b.entries_[k];
    return out;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) {
        throw std::invalid_argument("matrix product: inner dimension mismatch");
    }
    DenseMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols_; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
    DenseMatrix out = a;
    for (double& v : out.entries_) v *= s;
    return out;
}

bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    }
    double best = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k) {
        best = std::max(best, std::fabs(a.entries()[k] - b.entries()[k]));
    }
    return best;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b, std::size_t row_cap) {
    const std::size_t out_rows = a.rows() * b.rows();
    const std::size_t out_cols = a.cols() * b.cols();
    if (b.rows() != 0 && (out_rows / b.rows() != a.rows() || out_rows > row_cap)) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "kron: result has %zux%zu rows which exceeds the cap of %zu",
                      a.rows(), b.rows(), row_cap);
        throw std::length_error(msg);
    }
    DenseMatrix out(out_rows, out_cols);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k < b.rows(); ++k) {
                for (std::size_t l = 0; l < b.cols(); ++l) {
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
                }
            }
        }
    }
    return out;
}

DenseMatrix kron_power(const DenseMatrix& a, unsigned p, std::size_t row_cap) {
    if (p == 0) {
        throw std::invalid_argument("kron_power: exponent must be >= 1");
    }
    DenseMatrix out = a;
    for (unsigned q = 1; q < p; ++q) {
        out = kron(out, a, row_cap);
    }
    return out;
}

DenseMatrix assemble_companion(std::span<const DenseMatrix> blocks, std::size_t n) {
    if (blocks.empty()) {
        throw std::invalid_argument("assemble_companion: need at least one block");
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].rows() != n || blocks[b].cols() != n) {
            throw std::invalid_argument("assemble_companion: block " + std::to_string(b) +
                                        " is not " + std::to_string(n) + "x" +
                                        std::to_string(n));
        }
    }
    const std::size_t stages = blocks.size();  // L + 1
    DenseMatrix out(n * stages, n * stages);
    for (std::size_t b = 0; b < stages; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out(i, b * n + j) = blocks[b](i, j);
            }
        }
    }
    for (std::size_t s = 1; s < stages; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            out(s * n + i, (s - 1) * n + i) = 1.0;
        }
    }
    return out;
}

}  // namespace pstab
