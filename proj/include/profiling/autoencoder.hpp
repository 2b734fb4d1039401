#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "profiling/checkpoint.hpp"
#include "profiling/neural/grad_check.hpp"
#include "profiling/neural/network.hpp"
#include "profiling/profiler.hpp"
#include "profiling/rng.hpp"
#include "profiling/table.hpp"
#include "profiling/training.hpp"

namespace profiling {

struct AeConfig {
    std::size_t embedding_size = 30;
    std::size_t hidden_units = 128;
    double dropout = 0.5;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    neural::Activation activation = neural::Activation::Tanh;

    /// Throws ValidationError when out of range.
    void validate() const;
    nlohmann::json to_json() const;
    static AeConfig from_json(const nlohmann::json& j);
    bool operator==(const AeConfig&) const = default;
};

struct AeGradients {
    std::vector<neural::Matrix> embeddings;
    neural::NetworkGradients network;

    void zero();
    std::vector<const neural::Matrix*> list() const;
};

/// Masked denoising autoencoder over categorical facets.
///
/// Each facet value maps to an N_e-dimensional embedding; the concatenation of
/// all n facet embeddings (zeros for missing or dropped facets) feeds one dense
/// hidden layer and per-facet softmax heads. Embedding tables carry one extra
/// row per facet, index v_i, reserved for MISSING and kept at zero.
class AeModel final : public Profiler {
public:
    static AeModel initialize(std::shared_ptr<const FacetSchema> schema, const AeConfig& config, Rng& rng);
    static AeModel from_checkpoint(const Checkpoint& checkpoint);

    ModelKind kind() const override { return ModelKind::AE; }
    const FacetSchema& schema() const override { return *schema_; }
    std::shared_ptr<const FacetSchema> schema_ptr() const override { return schema_; }
    std::vector<std::vector<double>> predict(const ProfileInput& input) const override;
    Checkpoint to_checkpoint() const override;

    const AeConfig& config() const noexcept { return config_; }
    std::size_t input_dim() const noexcept { return schema_->size() * config_.embedding_size; }

    /// Concatenated embeddings. `dropped` (optional, one flag per facet) zeroes known facets.
    std::vector<double> encode(std::span<const ValueIndex> cells, std::span<const std::uint8_t> dropped = {}) const;

    /// Loss of predicting `targets` from `input_cells`, in nats.
    double loss(std::span<const ValueIndex> input_cells, std::span<const ValueIndex> targets) const;

    /// Adds scale * dL/dparams for one example; returns the example's loss.
    double accumulate_gradients(std::span<const ValueIndex> input_cells, std::span<const ValueIndex> targets,
                                AeGradients& grads, double scale) const;

    AeGradients make_gradients() const;
    std::vector<neural::Matrix*> parameters();

    const neural::Matrix& embedding(std::size_t facet) const { return embeddings_.at(facet); }
    neural::Matrix& embedding(std::size_t facet) { return embeddings_.at(facet); }
    const neural::DenseNetwork& network() const noexcept { return network_; }

    /// Facets whose head never saw a training value; predict() leaves them empty.
    const std::vector<std::size_t>& untrained_facets() const noexcept { return untrained_; }

    void set_training_summary(double best_dev_loss, std::size_t epoch_reached);
    void set_untrained_facets(std::vector<std::size_t> facets) { untrained_ = std::move(facets); }

    bool operator==(const AeModel& other) const;

private:
    AeModel() = default;
    void check_cells(std::span<const ValueIndex> cells) const;

    std::shared_ptr<const FacetSchema> schema_;
    AeConfig config_;
    std::vector<neural::Matrix> embeddings_;
    neural::DenseNetwork network_;
    std::vector<std::size_t> untrained_;
    std::optional<double> best_dev_loss_;
    std::size_t epoch_reached_ = 0;
};

/// Per-facet Bernoulli(p) drop flags; only known cells can be dropped.
std::vector<std::uint8_t> sample_dropout(std::span<const ValueIndex> cells, double p, Rng& rng);

/// Mean held-out cross-entropy: each known cell of each row is hidden in turn
/// and predicted from the row's other known cells.
double holdout_loss(const AeModel& model, const ExemplarTable& table, std::span<const std::size_t> rows);

struct AeTrainingResult {
    AeModel model;
    TrainingLog log;
};

/// Minibatch ADAM with input dropout, oversampling, and DEV early stopping.
/// Returns the parameters from the best DEV epoch.
/// Throws ValidationError when the TRAIN or DEV split is empty.
AeTrainingResult train_autoencoder(const ExemplarTable& table, const AeConfig& config);

/// Finite-difference check on a 3-facet autoencoder (v_i <= 4, N_e = 2, 5 hidden units).
neural::GradCheckReport check_autoencoder_gradients(std::uint64_t seed, double tolerance = 1e-4);

}  // namespace profiling
