#include "profiling/neural/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "profiling/errors.hpp"

namespace profiling::neural {

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void affine(const Matrix& weights, std::span<const double> bias, std::span<const double> x, std::span<double> out) {
    if (x.size() != weights.cols()) throw ShapeError("affine input", weights.cols(), x.size());
    if (out.size() != weights.rows()) throw ShapeError("affine output", weights.rows(), out.size());
    if (bias.size() != weights.rows()) throw ShapeError("affine bias", weights.rows(), bias.size());
    for (std::size_t r = 0; r < weights.rows(); ++r) {
        const double* w = weights.row(r).data();
        double acc = bias[r];
        for (std::size_t c = 0; c < x.size(); ++c) acc += w[c] * x[c];
        out[r] = acc;
    }
}

void accumulate_transposed(const Matrix& weights, std::span<const double> dy, std::span<double> dx) {
    if (dy.size() != weights.rows()) throw ShapeError("transposed product dy", weights.rows(), dy.size());
    if (dx.size() != weights.cols()) throw ShapeError("transposed product dx", weights.cols(), dx.size());
    for (std::size_t r = 0; r < weights.rows(); ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        const double* w = weights.row(r).data();
        for (std::size_t c = 0; c < dx.size(); ++c) dx[c] += w[c] * g;
    }
}

void accumulate_outer(Matrix& grad, std::span<const double> dy, std::span<const double> x, double scale) {
    if (dy.size() != grad.rows()) throw ShapeError("outer product dy", grad.rows(), dy.size());
    if (x.size() != grad.cols()) throw ShapeError("outer product x", grad.cols(), x.size());
    for (std::size_t r = 0; r < grad.rows(); ++r) {
        const double g = scale * dy[r];
        if (g == 0.0) continue;
        double* out = grad.row(r).data();
        for (std::size_t c = 0; c < x.size(); ++c) out[c] += g * x[c];
    }
}

double softmax(std::span<double> logits) {
    if (logits.empty()) return 0.0;
    const double max = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max);
        sum += v;
    }
    for (double& v : logits) v /= sum;
    return max + std::log(sum);
}

}  // namespace profiling::neural
