#pragma once

#include <span>
#include <string>
#include <vector>

#include "profiling/neural/matrix.hpp"
#include "profiling/rng.hpp"
#include "profiling/schema.hpp"

namespace profiling::neural {

enum class Activation { Tanh, Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// One softmax head per facet, stacked: facet i owns output rows [offsets[i], offsets[i+1]).
struct FacetHeads {
    Matrix weights;  // (sum v_i) x hidden
    Matrix bias;     // (sum v_i) x 1
    std::vector<std::size_t> offsets;

    std::size_t facets() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t width(std::size_t facet) const { return offsets[facet + 1] - offsets[facet]; }
    bool operator==(const FacetHeads&) const = default;
};

std::vector<std::size_t> head_offsets(std::span<const std::size_t> vocabulary_sizes);

/// Gradient buffers mirroring DenseNetwork's parameters.
struct NetworkGradients {
    Matrix hidden_weights;
    Matrix hidden_bias;
    Matrix head_weights;
    Matrix head_bias;

    void zero();
};

/// Activations kept from a forward pass for the backward pass.
struct ForwardCache {
    std::vector<double> input;
    std::vector<double> hidden;     // post-activation
    std::vector<double> logits;     // per-facet logits, stacked
    std::vector<double> probs;      // per-facet softmax, stacked
    std::vector<double> log_norm;   // per-facet log-sum-exp of logits
};

/// Single dense hidden layer followed by per-facet softmax heads.
class DenseNetwork {
public:
    DenseNetwork() = default;

    /// Glorot-uniform weights, zero biases.
    static DenseNetwork create(std::size_t input_dim, std::size_t hidden_units,
                               std::span<const std::size_t> vocabulary_sizes, Activation activation, Rng& rng);

    /// Rebuilds a network from stored parameters; throws ShapeError on inconsistent shapes.
    static DenseNetwork from_parameters(Matrix hidden_weights, Matrix hidden_bias, Matrix head_weights, Matrix head_bias,
                                        std::vector<std::size_t> offsets, Activation activation);

    std::size_t input_dim() const noexcept { return hidden_weights_.cols(); }
    std::size_t hidden_units() const noexcept { return hidden_weights_.rows(); }
    std::size_t output_width() const noexcept { return heads_.weights.rows(); }
    std::size_t facets() const noexcept { return heads_.facets(); }
    Activation activation() const noexcept { return activation_; }
    const FacetHeads& heads() const noexcept { return heads_; }

    Matrix& hidden_weights() { return hidden_weights_; }
    Matrix& hidden_bias() { return hidden_bias_; }
    const Matrix& hidden_weights() const { return hidden_weights_; }
    const Matrix& hidden_bias() const { return hidden_bias_; }
    Matrix& head_weights() { return heads_.weights; }
    Matrix& head_bias() { return heads_.bias; }
    const Matrix& head_weights() const { return heads_.weights; }
    const Matrix& head_bias() const { return heads_.bias; }

    NetworkGradients make_gradients() const;

    /// Throws ShapeError when x has the wrong width.
    void forward(std::span<const double> x, ForwardCache& cache) const;

    /// Distribution for facet `facet` from a cache filled by forward().
    std::span<const double> distribution(const ForwardCache& cache, std::size_t facet) const;

    /// Adds scale * dL/dparams into `grads` for the masked cross-entropy of
    /// `targets` (kMissing entries contribute nothing). When `input_grad` is
    /// non-empty, dL/dx * scale is accumulated into it.
    void backward(const ForwardCache& cache, std::span<const ValueIndex> targets, NetworkGradients& grads, double scale,
                  std::span<double> input_grad = {}) const;

    std::vector<Matrix*> parameters();
    bool operator==(const DenseNetwork&) const = default;

private:
    Matrix hidden_weights_;  // hidden x input
    Matrix hidden_bias_;     // hidden x 1
    FacetHeads heads_;
    Activation activation_ = Activation::Tanh;
};

/// Sum over facets with a known target of -log z_i[target], in nats.
/// Throws ValidationError for targets outside a facet's vocabulary.
double masked_cross_entropy(std::span<const double> probs, std::span<const std::size_t> offsets,
                            std::span<const ValueIndex> targets);

/// Same loss computed from logits through the cached log-normalizers; stable for tiny probabilities.
double masked_cross_entropy(const ForwardCache& cache, std::span<const std::size_t> offsets,
                            std::span<const ValueIndex> targets);

void glorot_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace profiling::neural
