#include "hlu/dense_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "hlu/error.hpp"

namespace hlu {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("dense matrix data length does not match its shape");
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n, double scale) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
    return m;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* src = row(i);
        for (std::size_t j = 0; j < cols_; ++j) t.data_[j * rows_ + i] = src[j];
    }
    return t;
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw ShapeError("block out of range");
    DenseMatrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) std::copy_n(row(r0 + i) + c0, nc, b.row(i));
    return b;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& src) {
    if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_) throw ShapeError("set_block out of range");
    for (std::size_t i = 0; i < src.rows(); ++i) std::copy_n(src.row(i), src.cols(), row(r0 + i) + c0);
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw ShapeError("matrix addition shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw ShapeError("matrix subtraction shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

double DenseMatrix::squared_norm() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
}

double DenseMatrix::frobenius_norm() const noexcept { return std::sqrt(squared_norm()); }

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c = a;
    c -= b;
    return c;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c = a;
    c += b;
    return c;
}

}  // namespace hlu
