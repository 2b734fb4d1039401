#pragma once

#include <cstdint>
#include <memory>
#include <optional>
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

struct EmbConfig {
    std::size_t input_dim = 1000;  // 0: take the table's vector width
    std::size_t hidden_units = 128;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    neural::Activation activation = neural::Activation::Tanh;

    void validate() const;
    nlohmann::json to_json() const;
    static EmbConfig from_json(const nlohmann::json& j);
    bool operator==(const EmbConfig&) const = default;
};

/// Predicts every facet from a fixed, pretrained entity vector. The vectors
/// are inputs only; training never changes them.
class EmbModel final : public Profiler {
public:
    static EmbModel initialize(std::shared_ptr<const FacetSchema> schema, const EmbConfig& config, Rng& rng);
    static EmbModel from_checkpoint(const Checkpoint& checkpoint);

    ModelKind kind() const override { return ModelKind::EMB; }
    const FacetSchema& schema() const override { return *schema_; }
    std::shared_ptr<const FacetSchema> schema_ptr() const override { return schema_; }
    /// Reads input.entity_vector; throws ShapeError on a width mismatch.
    std::vector<std::vector<double>> predict(const ProfileInput& input) const override;
    bool uses_entity_vector() const override { return true; }
    std::size_t entity_vector_dim() const override { return network_.input_dim(); }
    Checkpoint to_checkpoint() const override;

    const EmbConfig& config() const noexcept { return config_; }
    std::size_t input_dim() const noexcept { return network_.input_dim(); }
    const neural::DenseNetwork& network() const noexcept { return network_; }
    neural::DenseNetwork& network() noexcept { return network_; }

    double loss(std::span<const double> vector, std::span<const ValueIndex> targets) const;
    double accumulate_gradients(std::span<const double> vector, std::span<const ValueIndex> targets,
                                neural::NetworkGradients& grads, double scale) const;

    const std::vector<std::size_t>& untrained_facets() const noexcept { return untrained_; }
    void set_untrained_facets(std::vector<std::size_t> facets) { untrained_ = std::move(facets); }
    void set_training_summary(double best_dev_loss, std::size_t epoch_reached);

    bool operator==(const EmbModel& other) const;

private:
    EmbModel() = default;

    std::shared_ptr<const FacetSchema> schema_;
    EmbConfig config_;
    neural::DenseNetwork network_;
    std::vector<std::size_t> untrained_;
    std::optional<double> best_dev_loss_;
    std::size_t epoch_reached_ = 0;
};

struct EmbTrainingResult {
    EmbModel model;
    TrainingLog log;
};

/// Same schedule as the autoencoder, without input dropout. Rows lacking a
/// vector are skipped and counted in log.skipped_rows.
/// Throws ValidationError when the table has no vectors, the width disagrees
/// with config.input_dim, or TRAIN/DEV has no usable rows.
EmbTrainingResult train_embedding_predictor(const ExemplarTable& table, const EmbConfig& config);

/// Finite-difference check on a 6-dimensional-input predictor with three small heads.
neural::GradCheckReport check_embedding_gradients(std::uint64_t seed, double tolerance = 1e-4);

}  // namespace profiling
