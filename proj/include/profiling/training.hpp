#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "profiling/rng.hpp"
#include "profiling/table.hpp"

namespace profiling {

/// Tracks DEV loss per epoch; signals a stop after `patience` epochs without strict improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience);

    /// Records the loss for the next epoch; returns true when it is a new best.
    bool update(double loss);
    bool should_stop() const noexcept { return since_best_ >= patience_; }

    std::size_t best_epoch() const noexcept { return best_epoch_; }  // 1-based, 0 before any update
    std::size_t epochs() const noexcept { return epochs_; }
    double best_loss() const noexcept { return best_loss_; }

private:
    std::size_t patience_;
    std::size_t epochs_ = 0;
    std::size_t best_epoch_ = 0;
    std::size_t since_best_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
};

/// Per-facet pools of training rows holding a value, used to top up minibatches.
class Oversampler {
public:
    /// `eligible` lists the training rows that may be drawn.
    Oversampler(const ExemplarTable& table, std::span<const std::size_t> eligible);

    /// Appends one random pool row for every facet with no value anywhere in `batch`.
    /// Returns the number of rows appended. Draws are with replacement.
    std::size_t top_up(std::vector<std::size_t>& batch, Rng& rng) const;

    /// Facets with an empty pool: nothing to oversample, head stays untrained.
    std::vector<std::size_t> empty_facets() const;

private:
    const ExemplarTable* table_;
    std::vector<std::vector<std::size_t>> pools_;
};

/// Shuffles `rows`, cuts them into batches of `batch_size`, and tops each batch up.
std::vector<std::vector<std::size_t>> make_minibatches(std::span<const std::size_t> rows, std::size_t batch_size,
                                                       const Oversampler& oversampler, Rng& rng,
                                                       std::size_t* appended = nullptr);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double dev_loss = 0.0;
    bool improved = false;
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_dev_loss = std::numeric_limits<double>::infinity();
    bool stopped_early = false;
    std::vector<std::string> untrained_facets;
    std::size_t skipped_rows = 0;      // rows without an entity vector (EMB)
    std::size_t oversampled_rows = 0;
};

nlohmann::json to_json(const TrainingLog& log);

/// Shared epoch loop: `run_epoch(epoch)` trains and returns the mean train loss,
/// `dev_loss()` scores the DEV split, `keep_best()` snapshots the current
/// parameters. Runs up to `max_epochs` with early stopping.
void run_training_loop(std::size_t max_epochs, std::size_t patience, const std::function<double(std::size_t)>& run_epoch,
                       const std::function<double()>& dev_loss, const std::function<void()>& keep_best,
                       TrainingLog& log);

}  // namespace profiling
