#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hlu {

/// Row-major dense matrix of doubles. Carrier for edge payloads in the
/// hierarchical tree and for every dense kernel.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix identity(std::size_t n, double scale = 1.0);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    double* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const noexcept { return data_.data() + i * cols_; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    DenseMatrix transposed() const;

    /// Copy of the sub-block [r0, r0+nr) x [c0, c0+nc).
    DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    /// Writes `src` with its top-left corner at (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& src);

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s) noexcept;

    double frobenius_norm() const noexcept;
    double squared_norm() const noexcept;
    double max_abs() const noexcept;
    bool all_finite() const noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace hlu
