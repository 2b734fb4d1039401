#include "profiling/autoencoder.hpp"

#include <algorithm>
#include <cmath>

#include "profiling/errors.hpp"
#include "profiling/neural/adam.hpp"

namespace profiling {

using neural::Matrix;

void AeConfig::validate() const {
    if (embedding_size == 0) throw ValidationError("embedding size must be at least 1");
    if (hidden_units == 0) throw ValidationError("hidden units must be at least 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must be in [0, 1)");
    if (batch_size == 0) throw ValidationError("batch size must be at least 1");
    if (max_epochs == 0) throw ValidationError("max epochs must be at least 1");
    if (patience == 0) throw ValidationError("patience must be at least 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
}

nlohmann::json AeConfig::to_json() const {
    return {{"embedding_size", embedding_size}, {"hidden_units", hidden_units},
            {"dropout", dropout},               {"batch_size", batch_size},
            {"max_epochs", max_epochs},         {"patience", patience},
            {"learning_rate", learning_rate},   {"seed", seed},
            {"activation", neural::to_string(activation)}};
}

AeConfig AeConfig::from_json(const nlohmann::json& j) {
    AeConfig c;
    c.embedding_size = j.value("embedding_size", c.embedding_size);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.dropout = j.value("dropout", c.dropout);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    c.activation = neural::activation_from_string(j.value("activation", std::string("tanh")));
    c.validate();
    return c;
}

void AeGradients::zero() {
    for (auto& e : embeddings) e.fill(0.0);
    network.zero();
}

std::vector<const Matrix*> AeGradients::list() const {
    std::vector<const Matrix*> out;
    for (const auto& e : embeddings) out.push_back(&e);
    out.push_back(&network.hidden_weights);
    out.push_back(&network.hidden_bias);
    out.push_back(&network.head_weights);
    out.push_back(&network.head_bias);
    return out;
}

namespace {

std::vector<std::size_t> vocabulary_sizes(const FacetSchema& schema) {
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < schema.size(); ++f) sizes.push_back(schema.vocabulary_size(f));
    return sizes;
}

}  // namespace

AeModel AeModel::initialize(std::shared_ptr<const FacetSchema> schema, const AeConfig& config, Rng& rng) {
    if (!schema) throw ValidationError("autoencoder needs a schema");
    if (schema->size() == 0) throw ValidationError("autoencoder needs at least one facet");
    config.validate();
    AeModel m;
    m.schema_ = std::move(schema);
    m.config_ = config;
    for (std::size_t f = 0; f < m.schema_->size(); ++f) {
        const std::size_t v = m.schema_->vocabulary_size(f);
        Matrix e(v + 1, config.embedding_size);
        neural::glorot_uniform(e, std::max<std::size_t>(v, 1), config.embedding_size, rng);
        std::fill(e.row(v).begin(), e.row(v).end(), 0.0);
        m.embeddings_.push_back(std::move(e));
    }
    const auto sizes = vocabulary_sizes(*m.schema_);
    m.network_ = neural::DenseNetwork::create(m.input_dim(), config.hidden_units, sizes, config.activation, rng);
    return m;
}

AeModel AeModel::from_checkpoint(const Checkpoint& cp) {
    if (cp.kind != ModelKind::AE) throw FormatError("checkpoint holds a " + to_string(cp.kind) + " model, not AE");
    AeModel m;
    m.schema_ = cp.schema;
    m.config_ = AeConfig::from_json(cp.config);
    for (std::size_t f = 0; f < m.schema_->size(); ++f) {
        Matrix e = to_matrix(cp.blob("embedding/" + std::to_string(f)));
        if (e.rows() != m.schema_->vocabulary_size(f) + 1 || e.cols() != m.config_.embedding_size)
            throw ShapeError("embedding table " + std::to_string(f), m.schema_->vocabulary_size(f) + 1, e.rows());
        m.embeddings_.push_back(std::move(e));
    }
    const auto sizes = vocabulary_sizes(*m.schema_);
    m.network_ = neural::DenseNetwork::from_parameters(
        to_matrix(cp.blob("hidden_weights")), to_matrix(cp.blob("hidden_bias")), to_matrix(cp.blob("head_weights")),
        to_matrix(cp.blob("head_bias")), neural::head_offsets(sizes), m.config_.activation);
    if (m.network_.input_dim() != m.input_dim())
        throw ShapeError("autoencoder hidden weights", m.input_dim(), m.network_.input_dim());
    if (cp.config.contains("untrained"))
        m.untrained_ = cp.config.at("untrained").get<std::vector<std::size_t>>();
    m.best_dev_loss_ = cp.best_dev_loss;
    m.epoch_reached_ = cp.epoch_reached;
    return m;
}

Checkpoint AeModel::to_checkpoint() const {
    Checkpoint cp;
    cp.kind = ModelKind::AE;
    cp.schema = schema_;
    cp.config = config_.to_json();
    cp.config["untrained"] = untrained_;
    cp.best_dev_loss = best_dev_loss_;
    cp.epoch_reached = epoch_reached_;
    for (std::size_t f = 0; f < embeddings_.size(); ++f)
        cp.blobs.push_back(to_blob("embedding/" + std::to_string(f), embeddings_[f]));
    cp.blobs.push_back(to_blob("hidden_weights", network_.hidden_weights()));
    cp.blobs.push_back(to_blob("hidden_bias", network_.hidden_bias()));
    cp.blobs.push_back(to_blob("head_weights", network_.head_weights()));
    cp.blobs.push_back(to_blob("head_bias", network_.head_bias()));
    return cp;
}

void AeModel::check_cells(std::span<const ValueIndex> cells) const {
    if (cells.size() != schema_->size()) throw ShapeError("autoencoder cells", schema_->size(), cells.size());
    for (std::size_t f = 0; f < cells.size(); ++f)
        if (cells[f] != kMissing && cells[f] >= schema_->vocabulary_size(f))
            throw ValidationError("value index " + std::to_string(cells[f]) + " outside vocabulary of facet '" +
                                  schema_->facet(f).name + "'");
}

std::vector<double> AeModel::encode(std::span<const ValueIndex> cells, std::span<const std::uint8_t> dropped) const {
    check_cells(cells);
    if (!dropped.empty() && dropped.size() != cells.size())
        throw ShapeError("dropout mask", cells.size(), dropped.size());
    const std::size_t ne = config_.embedding_size;
    std::vector<double> x(input_dim(), 0.0);
    for (std::size_t f = 0; f < cells.size(); ++f) {
        // MISSING and dropped facets stay as literal zeros.
        if (cells[f] == kMissing || (!dropped.empty() && dropped[f])) continue;
        const auto row = embeddings_[f].row(cells[f]);
        std::copy(row.begin(), row.end(), x.begin() + static_cast<std::ptrdiff_t>(f * ne));
    }
    return x;
}

std::vector<std::vector<double>> AeModel::predict(const ProfileInput& input) const {
    const auto x = encode(input.cells);
    neural::ForwardCache cache;
    network_.forward(x, cache);
    std::vector<std::vector<double>> out(schema_->size());
    for (std::size_t f = 0; f < out.size(); ++f) {
        if (std::find(untrained_.begin(), untrained_.end(), f) != untrained_.end()) continue;
        const auto d = network_.distribution(cache, f);
        out[f].assign(d.begin(), d.end());
    }
    return out;
}

double AeModel::loss(std::span<const ValueIndex> input_cells, std::span<const ValueIndex> targets) const {
    const auto x = encode(input_cells);
    neural::ForwardCache cache;
    network_.forward(x, cache);
    return neural::masked_cross_entropy(cache, network_.heads().offsets, targets);
}

double AeModel::accumulate_gradients(std::span<const ValueIndex> input_cells, std::span<const ValueIndex> targets,
                                     AeGradients& grads, double scale) const {
    const auto x = encode(input_cells);
    neural::ForwardCache cache;
    network_.forward(x, cache);
    const double l = neural::masked_cross_entropy(cache, network_.heads().offsets, targets);
    std::vector<double> dx(x.size(), 0.0);
    network_.backward(cache, targets, grads.network, scale, dx);
    const std::size_t ne = config_.embedding_size;
    for (std::size_t f = 0; f < input_cells.size(); ++f) {
        if (input_cells[f] == kMissing) continue;
        auto row = grads.embeddings[f].row(input_cells[f]);
        for (std::size_t k = 0; k < ne; ++k) row[k] += dx[f * ne + k];
    }
    return l;
}

AeGradients AeModel::make_gradients() const {
    AeGradients g;
    for (const auto& e : embeddings_) g.embeddings.emplace_back(e.rows(), e.cols());
    g.network = network_.make_gradients();
    return g;
}

std::vector<Matrix*> AeModel::parameters() {
    std::vector<Matrix*> out;
    for (auto& e : embeddings_) out.push_back(&e);
    for (Matrix* p : network_.parameters()) out.push_back(p);
    return out;
}

void AeModel::set_training_summary(double best_dev_loss, std::size_t epoch_reached) {
    best_dev_loss_ = best_dev_loss;
    epoch_reached_ = epoch_reached;
}

bool AeModel::operator==(const AeModel& o) const {
    return *schema_ == *o.schema_ && config_ == o.config_ && embeddings_ == o.embeddings_ && network_ == o.network_ &&
           untrained_ == o.untrained_;
}

std::vector<std::uint8_t> sample_dropout(std::span<const ValueIndex> cells, double p, Rng& rng) {
    std::vector<std::uint8_t> dropped(cells.size(), 0);
    for (std::size_t f = 0; f < cells.size(); ++f)
        if (cells[f] != kMissing && rng.bernoulli(p)) dropped[f] = 1;
    return dropped;
}

double holdout_loss(const AeModel& model, const ExemplarTable& table, std::span<const std::size_t> rows) {
    const auto& untrained = model.untrained_facets();
    double total = 0.0;
    std::size_t scored = 0;
    std::vector<ValueIndex> input, target(table.facets(), kMissing);
    for (std::size_t r : rows) {
        const auto cells = table.row(r);
        for (std::size_t f = 0; f < cells.size(); ++f) {
            if (cells[f] == kMissing) continue;
            if (std::find(untrained.begin(), untrained.end(), f) != untrained.end()) continue;
            input.assign(cells.begin(), cells.end());
            input[f] = kMissing;
            target[f] = cells[f];
            total += model.loss(input, target);
            target[f] = kMissing;
            ++scored;
        }
    }
    return scored == 0 ? 0.0 : total / static_cast<double>(scored);
}

AeTrainingResult train_autoencoder(const ExemplarTable& table, const AeConfig& config) {
    config.validate();
    const auto train = table.rows_in(Split::Train);
    const auto dev = table.rows_in(Split::Dev);
    if (train.empty()) throw ValidationError("TRAIN split is empty");
    if (dev.empty()) throw ValidationError("DEV split is empty");

    Rng rng(config.seed);
    AeModel model = AeModel::initialize(table.schema_ptr(), config, rng);
    Oversampler oversampler(table, train);
    TrainingLog log;
    model.set_untrained_facets(oversampler.empty_facets());
    for (std::size_t f : model.untrained_facets()) log.untrained_facets.push_back(table.schema().facet(f).name);

    neural::AdamState adam;
    adam.config.learning_rate = config.learning_rate;
    AeGradients grads = model.make_gradients();
    const auto params = model.parameters();
    const auto grad_list = grads.list();
    AeModel best = model;

    std::vector<ValueIndex> input;
    auto run_epoch = [&](std::size_t) {
        const auto batches = make_minibatches(train, config.batch_size, oversampler, rng, &log.oversampled_rows);
        double total = 0.0;
        std::size_t seen = 0;
        for (const auto& batch : batches) {
            grads.zero();
            const double scale = 1.0 / static_cast<double>(batch.size());
            for (std::size_t r : batch) {
                const auto cells = table.row(r);
                const auto dropped = sample_dropout(cells, config.dropout, rng);
                input.assign(cells.begin(), cells.end());
                for (std::size_t f = 0; f < input.size(); ++f)
                    if (dropped[f]) input[f] = kMissing;
                // Dropped cells are still targets: the model must reconstruct them.
                total += model.accumulate_gradients(input, cells, grads, scale);
                ++seen;
            }
            neural::adam_step(params, grad_list, adam);
        }
        return total / static_cast<double>(seen);
    };
    auto dev_loss = [&] { return holdout_loss(model, table, dev); };
    auto keep_best = [&] { best = model; };

    run_training_loop(config.max_epochs, config.patience, run_epoch, dev_loss, keep_best, log);
    best.set_training_summary(log.best_dev_loss, log.epochs.size());
    return {std::move(best), std::move(log)};
}

neural::GradCheckReport check_autoencoder_gradients(std::uint64_t seed, double tolerance) {
    auto schema = std::make_shared<const FacetSchema>(std::vector<Facet>{
        {"f0", {"a", "b", "c"}, {}}, {"f1", {"p", "q", "r", "s"}, {}}, {"f2", {"x", "y"}, {}}});
    AeConfig config;
    config.embedding_size = 2;
    config.hidden_units = 5;
    Rng rng(seed);
    AeModel model = AeModel::initialize(schema, config, rng);
    for (Matrix* p : model.parameters())
        for (double& v : p->values()) v = rng.uniform(-0.8, 0.8);
    for (std::size_t f = 0; f < schema->size(); ++f) {
        auto missing = model.embedding(f).row(schema->vocabulary_size(f));
        std::fill(missing.begin(), missing.end(), 0.0);
    }

    // Targets are full rows; inputs hide some cells, as dropout would.
    std::vector<std::vector<ValueIndex>> targets, inputs;
    for (int i = 0; i < 6; ++i) {
        std::vector<ValueIndex> t, in;
        for (std::size_t f = 0; f < schema->size(); ++f) {
            t.push_back(rng.bernoulli(0.15) ? kMissing : static_cast<ValueIndex>(rng.below(schema->vocabulary_size(f))));
            in.push_back(rng.bernoulli(0.4) ? kMissing : t.back());
        }
        targets.push_back(std::move(t));
        inputs.push_back(std::move(in));
    }

    AeGradients grads = model.make_gradients();
    for (std::size_t i = 0; i < targets.size(); ++i) model.accumulate_gradients(inputs[i], targets[i], grads, 1.0);

    std::vector<neural::CheckedParameter> checked;
    const auto params = model.parameters();
    const auto analytic = grads.list();
    const std::vector<std::string> names = {"hidden_weights", "hidden_bias", "head_weights", "head_bias"};
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::size_t n = schema->size();
        std::string name = i < n ? "embedding/" + std::to_string(i) : names[i - n];
        checked.push_back({std::move(name), params[i], analytic[i]});
    }
    auto loss = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i) total += model.loss(inputs[i], targets[i]);
        return total;
    };
    return neural::grad_check(checked, loss, 1e-5, tolerance);
}

}  // namespace profiling
