#include "profiling/embedding_predictor.hpp"

#include <algorithm>

#include "profiling/errors.hpp"
#include "profiling/neural/adam.hpp"

namespace profiling {

using neural::Matrix;

void EmbConfig::validate() const {
    if (hidden_units == 0) throw ValidationError("hidden units must be at least 1");
    if (batch_size == 0) throw ValidationError("batch size must be at least 1");
    if (max_epochs == 0) throw ValidationError("max epochs must be at least 1");
    if (patience == 0) throw ValidationError("patience must be at least 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
}

nlohmann::json EmbConfig::to_json() const {
    return {{"input_dim", input_dim},         {"hidden_units", hidden_units}, {"batch_size", batch_size},
            {"max_epochs", max_epochs},       {"patience", patience},         {"learning_rate", learning_rate},
            {"seed", seed},                   {"activation", neural::to_string(activation)}};
}

EmbConfig EmbConfig::from_json(const nlohmann::json& j) {
    EmbConfig c;
    c.input_dim = j.value("input_dim", c.input_dim);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    c.activation = neural::activation_from_string(j.value("activation", std::string("tanh")));
    c.validate();
    return c;
}

namespace {

std::vector<std::size_t> vocabulary_sizes(const FacetSchema& schema) {
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < schema.size(); ++f) sizes.push_back(schema.vocabulary_size(f));
    return sizes;
}

}  // namespace

EmbModel EmbModel::initialize(std::shared_ptr<const FacetSchema> schema, const EmbConfig& config, Rng& rng) {
    if (!schema) throw ValidationError("embedding predictor needs a schema");
    config.validate();
    if (config.input_dim == 0) throw ValidationError("input dimension must be at least 1");
    EmbModel m;
    m.schema_ = std::move(schema);
    m.config_ = config;
    const auto sizes = vocabulary_sizes(*m.schema_);
    m.network_ = neural::DenseNetwork::create(config.input_dim, config.hidden_units, sizes, config.activation, rng);
    return m;
}

EmbModel EmbModel::from_checkpoint(const Checkpoint& cp) {
    if (cp.kind != ModelKind::EMB) throw FormatError("checkpoint holds a " + to_string(cp.kind) + " model, not EMB");
    EmbModel m;
    m.schema_ = cp.schema;
    m.config_ = EmbConfig::from_json(cp.config);
    const auto sizes = vocabulary_sizes(*m.schema_);
    m.network_ = neural::DenseNetwork::from_parameters(
        to_matrix(cp.blob("hidden_weights")), to_matrix(cp.blob("hidden_bias")), to_matrix(cp.blob("head_weights")),
        to_matrix(cp.blob("head_bias")), neural::head_offsets(sizes), m.config_.activation);
    if (m.network_.input_dim() != m.config_.input_dim)
        throw ShapeError("embedding predictor input", m.config_.input_dim, m.network_.input_dim());
    if (cp.config.contains("untrained"))
        m.untrained_ = cp.config.at("untrained").get<std::vector<std::size_t>>();
    m.best_dev_loss_ = cp.best_dev_loss;
    m.epoch_reached_ = cp.epoch_reached;
    return m;
}

Checkpoint EmbModel::to_checkpoint() const {
    Checkpoint cp;
    cp.kind = ModelKind::EMB;
    cp.schema = schema_;
    cp.config = config_.to_json();
    cp.config["untrained"] = untrained_;
    cp.best_dev_loss = best_dev_loss_;
    cp.epoch_reached = epoch_reached_;
    cp.blobs.push_back(to_blob("hidden_weights", network_.hidden_weights()));
    cp.blobs.push_back(to_blob("hidden_bias", network_.hidden_bias()));
    cp.blobs.push_back(to_blob("head_weights", network_.head_weights()));
    cp.blobs.push_back(to_blob("head_bias", network_.head_bias()));
    return cp;
}

std::vector<std::vector<double>> EmbModel::predict(const ProfileInput& input) const {
    if (input.entity_vector.size() != input_dim())
        throw ShapeError("entity vector", input_dim(), input.entity_vector.size());
    neural::ForwardCache cache;
    network_.forward(input.entity_vector, cache);
    std::vector<std::vector<double>> out(schema_->size());
    for (std::size_t f = 0; f < out.size(); ++f) {
        if (std::find(untrained_.begin(), untrained_.end(), f) != untrained_.end()) continue;
        const auto d = network_.distribution(cache, f);
        out[f].assign(d.begin(), d.end());
    }
    return out;
}

double EmbModel::loss(std::span<const double> vector, std::span<const ValueIndex> targets) const {
    neural::ForwardCache cache;
    network_.forward(vector, cache);
    return neural::masked_cross_entropy(cache, network_.heads().offsets, targets);
}

double EmbModel::accumulate_gradients(std::span<const double> vector, std::span<const ValueIndex> targets,
                                      neural::NetworkGradients& grads, double scale) const {
    neural::ForwardCache cache;
    network_.forward(vector, cache);
    const double l = neural::masked_cross_entropy(cache, network_.heads().offsets, targets);
    network_.backward(cache, targets, grads, scale);
    return l;
}

void EmbModel::set_training_summary(double best_dev_loss, std::size_t epoch_reached) {
    best_dev_loss_ = best_dev_loss;
    epoch_reached_ = epoch_reached;
}

bool EmbModel::operator==(const EmbModel& o) const {
    return *schema_ == *o.schema_ && config_ == o.config_ && network_ == o.network_ && untrained_ == o.untrained_;
}

EmbTrainingResult train_embedding_predictor(const ExemplarTable& table, const EmbConfig& config) {
    config.validate();
    if (table.vector_dim() == 0) throw ValidationError("table has no entity vectors");
    EmbConfig effective = config;
    if (effective.input_dim == 0) effective.input_dim = table.vector_dim();
    if (effective.input_dim != table.vector_dim())
        throw ValidationError("entity vectors have width " + std::to_string(table.vector_dim()) + ", model expects " +
                              std::to_string(effective.input_dim));

    TrainingLog log;
    auto with_vectors = [&](Split split) {
        std::vector<std::size_t> kept;
        for (std::size_t r : table.rows_in(split)) {
            if (table.has_vector(r))
                kept.push_back(r);
            else
                ++log.skipped_rows;
        }
        return kept;
    };
    const auto train = with_vectors(Split::Train);
    const auto dev = with_vectors(Split::Dev);
    if (train.empty()) throw ValidationError("no TRAIN rows with an entity vector");
    if (dev.empty()) throw ValidationError("no DEV rows with an entity vector");

    Rng rng(effective.seed);
    EmbModel model = EmbModel::initialize(table.schema_ptr(), effective, rng);
    Oversampler oversampler(table, train);
    model.set_untrained_facets(oversampler.empty_facets());
    for (std::size_t f : model.untrained_facets()) log.untrained_facets.push_back(table.schema().facet(f).name);

    neural::AdamState adam;
    adam.config.learning_rate = effective.learning_rate;
    auto grads = model.network().make_gradients();
    const auto params = model.network().parameters();
    const std::vector<const Matrix*> grad_list = {&grads.hidden_weights, &grads.hidden_bias, &grads.head_weights,
                                                  &grads.head_bias};
    EmbModel best = model;

    auto run_epoch = [&](std::size_t) {
        const auto batches = make_minibatches(train, effective.batch_size, oversampler, rng, &log.oversampled_rows);
        double total = 0.0;
        std::size_t seen = 0;
        for (const auto& batch : batches) {
            grads.zero();
            const double scale = 1.0 / static_cast<double>(batch.size());
            for (std::size_t r : batch) {
                total += model.accumulate_gradients(table.vector(r), table.row(r), grads, scale);
                ++seen;
            }
            neural::adam_step(params, grad_list, adam);
        }
        return total / static_cast<double>(seen);
    };
    auto dev_loss = [&] {
        double total = 0.0;
        for (std::size_t r : dev) total += model.loss(table.vector(r), table.row(r));
        return total / static_cast<double>(dev.size());
    };
    auto keep_best = [&] { best = model; };

    run_training_loop(effective.max_epochs, effective.patience, run_epoch, dev_loss, keep_best, log);
    best.set_training_summary(log.best_dev_loss, log.epochs.size());
    return {std::move(best), std::move(log)};
}

neural::GradCheckReport check_embedding_gradients(std::uint64_t seed, double tolerance) {
    auto schema = std::make_shared<const FacetSchema>(std::vector<Facet>{
        {"f0", {"a", "b", "c"}, {}}, {"f1", {"p", "q", "r", "s"}, {}}, {"f2", {"x", "y"}, {}}});
    EmbConfig config;
    config.input_dim = 6;
    config.hidden_units = 5;
    Rng rng(seed);
    EmbModel model = EmbModel::initialize(schema, config, rng);
    for (Matrix* p : model.network().parameters())
        for (double& v : p->values()) v = rng.uniform(-0.8, 0.8);

    std::vector<std::vector<double>> vectors;
    std::vector<std::vector<ValueIndex>> targets;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> v(config.input_dim);
        for (double& x : v) x = rng.normal();
        std::vector<ValueIndex> t;
        for (std::size_t f = 0; f < schema->size(); ++f)
            t.push_back(rng.bernoulli(0.2) ? kMissing : static_cast<ValueIndex>(rng.below(schema->vocabulary_size(f))));
        vectors.push_back(std::move(v));
        targets.push_back(std::move(t));
    }

    auto grads = model.network().make_gradients();
    for (std::size_t i = 0; i < vectors.size(); ++i) model.accumulate_gradients(vectors[i], targets[i], grads, 1.0);
    const auto params = model.network().parameters();
    std::vector<neural::CheckedParameter> checked = {{"hidden_weights", params[0], &grads.hidden_weights},
                                                     {"hidden_bias", params[1], &grads.hidden_bias},
                                                     {"head_weights", params[2], &grads.head_weights},
                                                     {"head_bias", params[3], &grads.head_bias}};
    auto loss = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < vectors.size(); ++i) total += model.loss(vectors[i], targets[i]);
        return total;
    };
    return neural::grad_check(checked, loss, 1e-5, tolerance);
}

}  // namespace profiling
