#include "profiling/training.hpp"

#include <cmath>

#include "profiling/errors.hpp"

namespace profiling {

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
    if (patience == 0) throw ValidationError("early-stopping patience must be at least 1");
}

bool EarlyStopping::update(double loss) {
    ++epochs_;
    if (loss < best_loss_) {
        best_loss_ = loss;
        best_epoch_ = epochs_;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

Oversampler::Oversampler(const ExemplarTable& table, std::span<const std::size_t> eligible)
    : table_(&table), pools_(table.facets()) {
    for (std::size_t r : eligible)
        for (std::size_t f = 0; f < table.facets(); ++f)
            if (table.cell(r, f) != kMissing) pools_[f].push_back(r);
}

std::size_t Oversampler::top_up(std::vector<std::size_t>& batch, Rng& rng) const {
    std::size_t appended = 0;
    for (std::size_t f = 0; f < pools_.size(); ++f) {
        if (pools_[f].empty()) continue;
        bool covered = false;
        // Appended rows count as coverage for later facets.
        for (std::size_t r : batch)
            if (table_->cell(r, f) != kMissing) {
                covered = true;
                break;
            }
        if (covered) continue;
        batch.push_back(pools_[f][rng.below(pools_[f].size())]);
        ++appended;
    }
    return appended;
}

std::vector<std::size_t> Oversampler::empty_facets() const {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < pools_.size(); ++f)
        if (pools_[f].empty()) out.push_back(f);
    return out;
}

std::vector<std::vector<std::size_t>> make_minibatches(std::span<const std::size_t> rows, std::size_t batch_size,
                                                       const Oversampler& oversampler, Rng& rng, std::size_t* appended) {
    if (batch_size == 0) throw ValidationError("batch size must be at least 1");
    std::vector<std::size_t> order(rows.begin(), rows.end());
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
        const std::size_t added = oversampler.top_up(batch, rng);
        if (appended) *appended += added;
        batches.push_back(std::move(batch));
    }
    return batches;
}

nlohmann::json to_json(const TrainingLog& log) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : log.epochs)
        epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"dev_loss", e.dev_loss}, {"improved", e.improved}});
    return {{"epochs", std::move(epochs)},
            {"best_epoch", log.best_epoch},
            {"best_dev_loss", log.best_dev_loss},
            {"stopped_early", log.stopped_early},
            {"untrained_facets", log.untrained_facets},
            {"skipped_rows", log.skipped_rows},
            {"oversampled_rows", log.oversampled_rows}};
}

void run_training_loop(std::size_t max_epochs, std::size_t patience, const std::function<double(std::size_t)>& run_epoch,
                       const std::function<double()>& dev_loss, const std::function<void()>& keep_best,
                       TrainingLog& log) {
    EarlyStopping stopper(patience);
    for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
        const double train = run_epoch(epoch);
        const double dev = dev_loss();
        if (!std::isfinite(train) || !std::isfinite(dev))
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
        const bool improved = stopper.update(dev);
        if (improved) keep_best();
        log.epochs.push_back({epoch, train, dev, improved});
        if (stopper.should_stop()) {
            log.stopped_early = true;
            break;
        }
    }
    log.best_epoch = stopper.best_epoch();
    log.best_dev_loss = stopper.best_loss();
}

}  // namespace profiling
