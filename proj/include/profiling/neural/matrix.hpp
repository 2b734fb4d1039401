#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace profiling::neural {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const noexcept;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// out = W x + b
void affine(const Matrix& weights, std::span<const double> bias, std::span<const double> x, std::span<double> out);

/// dx += W^T dy
void accumulate_transposed(const Matrix& weights, std::span<const double> dy, std::span<double> dx);

/// G += scale * dy x^T
void accumulate_outer(Matrix& grad, std::span<const double> dy, std::span<const double> x, double scale);

/// In-place softmax; returns log-sum-exp of the input logits.
double softmax(std::span<double> logits);

}  // namespace profiling::neural
