#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace netaipw {

/// Dense row-major matrix of doubles. Zero columns is a valid shape.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Copies the listed rows into a new matrix.
inline Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = m.row(rows[i]);
        auto dst = out.row(i);
        for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c];
    }
    return out;
}

/// Side-by-side concatenation [a | b]; row counts must agree.
inline Matrix hconcat(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto dst = out.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) dst[c] = a(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) dst[a.cols() + c] = b(r, c);
    }
    return out;
}

}  // namespace netaipw
