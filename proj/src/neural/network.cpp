#include "profiling/neural/network.hpp"

#include <cmath>

#include "profiling/errors.hpp"

namespace profiling::neural {

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    throw ValidationError("unknown activation '" + name + "' (expected tanh or relu)");
}

std::vector<std::size_t> head_offsets(std::span<const std::size_t> vocabulary_sizes) {
    std::vector<std::size_t> offsets{0};
    for (auto v : vocabulary_sizes) offsets.push_back(offsets.back() + v);
    return offsets;
}

void NetworkGradients::zero() {
    hidden_weights.fill(0.0);
    hidden_bias.fill(0.0);
    head_weights.fill(0.0);
    head_bias.fill(0.0);
}

void glorot_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : m.values()) v = rng.uniform(-s, s);
}

DenseNetwork DenseNetwork::create(std::size_t input_dim, std::size_t hidden_units,
                                  std::span<const std::size_t> vocabulary_sizes, Activation activation, Rng& rng) {
    if (input_dim == 0 || hidden_units == 0) throw ValidationError("network needs non-zero input and hidden widths");
    DenseNetwork net;
    net.activation_ = activation;
    net.hidden_weights_ = Matrix(hidden_units, input_dim);
    net.hidden_bias_ = Matrix(hidden_units, 1);
    net.heads_.offsets = head_offsets(vocabulary_sizes);
    const std::size_t width = net.heads_.offsets.back();
    net.heads_.weights = Matrix(width, hidden_units);
    net.heads_.bias = Matrix(width, 1);
    glorot_uniform(net.hidden_weights_, input_dim, hidden_units, rng);
    glorot_uniform(net.heads_.weights, hidden_units, std::max<std::size_t>(width, 1), rng);
    return net;
}

DenseNetwork DenseNetwork::from_parameters(Matrix hidden_weights, Matrix hidden_bias, Matrix head_weights,
                                           Matrix head_bias, std::vector<std::size_t> offsets, Activation activation) {
    if (hidden_bias.rows() != hidden_weights.rows() || hidden_bias.cols() != 1)
        throw ShapeError("hidden bias", hidden_weights.rows(), hidden_bias.rows());
    if (head_weights.cols() != hidden_weights.rows())
        throw ShapeError("head weights columns", hidden_weights.rows(), head_weights.cols());
    if (offsets.empty() || offsets.back() != head_weights.rows())
        throw ShapeError("head rows", offsets.empty() ? 0 : offsets.back(), head_weights.rows());
    if (head_bias.rows() != head_weights.rows() || head_bias.cols() != 1)
        throw ShapeError("head bias", head_weights.rows(), head_bias.rows());
    DenseNetwork net;
    net.hidden_weights_ = std::move(hidden_weights);
    net.hidden_bias_ = std::move(hidden_bias);
    net.heads_ = {std::move(head_weights), std::move(head_bias), std::move(offsets)};
    net.activation_ = activation;
    return net;
}

NetworkGradients DenseNetwork::make_gradients() const {
    return {Matrix(hidden_weights_.rows(), hidden_weights_.cols()), Matrix(hidden_bias_.rows(), 1),
            Matrix(heads_.weights.rows(), heads_.weights.cols()), Matrix(heads_.bias.rows(), 1)};
}

void DenseNetwork::forward(std::span<const double> x, ForwardCache& cache) const {
    if (x.size() != input_dim()) throw ShapeError("network input", input_dim(), x.size());
    cache.input.assign(x.begin(), x.end());
    cache.hidden.resize(hidden_units());
    affine(hidden_weights_, hidden_bias_.values(), x, cache.hidden);
    for (double& h : cache.hidden) h = activation_ == Activation::Tanh ? std::tanh(h) : std::max(0.0, h);

    cache.logits.resize(output_width());
    affine(heads_.weights, heads_.bias.values(), cache.hidden, cache.logits);
    cache.probs = cache.logits;
    cache.log_norm.resize(facets());
    for (std::size_t f = 0; f < facets(); ++f) {
        std::span<double> block(cache.probs.data() + heads_.offsets[f], heads_.width(f));
        cache.log_norm[f] = softmax(block);
    }
}

std::span<const double> DenseNetwork::distribution(const ForwardCache& cache, std::size_t facet) const {
    return {cache.probs.data() + heads_.offsets[facet], heads_.width(facet)};
}

void DenseNetwork::backward(const ForwardCache& cache, std::span<const ValueIndex> targets, NetworkGradients& grads,
                            double scale, std::span<double> input_grad) const {
    if (targets.size() != facets()) throw ShapeError("backward targets", facets(), targets.size());

    // Softmax + cross-entropy per facet: dL/dlogits = z - onehot(target).
    std::vector<double> dlogits(output_width(), 0.0);
    bool any = false;
    for (std::size_t f = 0; f < facets(); ++f) {
        const ValueIndex t = targets[f];
        if (t == kMissing) continue;
        if (t >= heads_.width(f)) throw ValidationError("target index outside vocabulary of facet " + std::to_string(f));
        any = true;
        const std::size_t off = heads_.offsets[f];
        for (std::size_t j = 0; j < heads_.width(f); ++j) dlogits[off + j] = cache.probs[off + j];
        dlogits[off + t] -= 1.0;
    }
    if (!any) return;

    accumulate_outer(grads.head_weights, dlogits, cache.hidden, scale);
    for (std::size_t j = 0; j < dlogits.size(); ++j) grads.head_bias(j, 0) += scale * dlogits[j];

    std::vector<double> dhidden(hidden_units(), 0.0);
    accumulate_transposed(heads_.weights, dlogits, dhidden);
    for (std::size_t k = 0; k < dhidden.size(); ++k) {
        const double h = cache.hidden[k];
        dhidden[k] *= activation_ == Activation::Tanh ? 1.0 - h * h : (h > 0.0 ? 1.0 : 0.0);
    }
    accumulate_outer(grads.hidden_weights, dhidden, cache.input, scale);
    for (std::size_t k = 0; k < dhidden.size(); ++k) grads.hidden_bias(k, 0) += scale * dhidden[k];

    if (!input_grad.empty()) {
        if (input_grad.size() != input_dim()) throw ShapeError("input gradient", input_dim(), input_grad.size());
        for (double& d : dhidden) d *= scale;
        accumulate_transposed(hidden_weights_, dhidden, input_grad);
    }
}

std::vector<Matrix*> DenseNetwork::parameters() {
    return {&hidden_weights_, &hidden_bias_, &heads_.weights, &heads_.bias};
}

double masked_cross_entropy(std::span<const double> probs, std::span<const std::size_t> offsets,
                            std::span<const ValueIndex> targets) {
    if (offsets.size() != targets.size() + 1) throw ShapeError("cross-entropy targets", offsets.size() - 1, targets.size());
    if (probs.size() != offsets.back()) throw ShapeError("cross-entropy outputs", offsets.back(), probs.size());
    double loss = 0.0;
    for (std::size_t f = 0; f < targets.size(); ++f) {
        if (targets[f] == kMissing) continue;
        if (targets[f] >= offsets[f + 1] - offsets[f])
            throw ValidationError("target index " + std::to_string(targets[f]) + " outside vocabulary of facet " +
                                  std::to_string(f));
        loss -= std::log(probs[offsets[f] + targets[f]]);
    }
    return loss;
}

double masked_cross_entropy(const ForwardCache& cache, std::span<const std::size_t> offsets,
                            std::span<const ValueIndex> targets) {
    if (offsets.size() != targets.size() + 1) throw ShapeError("cross-entropy targets", offsets.size() - 1, targets.size());
    double loss = 0.0;
    for (std::size_t f = 0; f < targets.size(); ++f) {
        if (targets[f] == kMissing) continue;
        if (targets[f] >= offsets[f + 1] - offsets[f])
            throw ValidationError("target index " + std::to_string(targets[f]) + " outside vocabulary of facet " +
                                  std::to_string(f));
        loss += cache.log_norm[f] - cache.logits[offsets[f] + targets[f]];
    }
    return loss;
}

}  // namespace profiling::neural
