#include "profiling/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "profiling/errors.hpp"

namespace profiling {

namespace {

void check_cells(const FacetSchema& schema, std::span<const ValueIndex> cells) {
    if (cells.size() != schema.size()) throw ShapeError("query cells", schema.size(), cells.size());
    for (std::size_t f = 0; f < cells.size(); ++f)
        if (cells[f] != kMissing && cells[f] >= schema.vocabulary_size(f))
            throw ValidationError("value index " + std::to_string(cells[f]) + " outside vocabulary of facet '" +
                                  schema.facet(f).name + "'");
}

std::uint64_t joint_key(ValueIndex target_value, ValueIndex evidence_value) {
    return (static_cast<std::uint64_t>(target_value) << 32) | evidence_value;
}

}  // namespace

MfvModel::MfvModel(std::shared_ptr<const FacetSchema> schema, std::vector<std::vector<std::uint64_t>> counts)
    : schema_(std::move(schema)), counts_(std::move(counts)) {
    for (std::size_t f = 0; f < counts_.size(); ++f) {
        std::uint64_t total = 0;
        for (auto c : counts_[f]) total += c;
        std::vector<double> freq;
        ValueIndex mode = kMissing;
        if (total > 0) {
            for (std::size_t j = 0; j < counts_[f].size(); ++j) {
                freq.push_back(static_cast<double>(counts_[f][j]) / static_cast<double>(total));
                const auto& label = schema_->label(f, static_cast<ValueIndex>(j));
                if (mode == kMissing || counts_[f][j] > counts_[f][mode] ||
                    (counts_[f][j] == counts_[f][mode] && label < schema_->label(f, mode)))
                    mode = static_cast<ValueIndex>(j);
            }
        }
        frequencies_.push_back(std::move(freq));
        modes_.push_back(mode);
    }
}

MfvModel MfvModel::fit(const ExemplarTable& table) {
    return MfvModel(table.schema_ptr(), training_value_counts(table));
}

std::vector<std::vector<double>> MfvModel::predict(const ProfileInput& input) const {
    if (!input.cells.empty()) check_cells(*schema_, input.cells);
    return frequencies_;
}

std::vector<double> MfvModel::predict_facet(const ProfileInput&, std::size_t facet) const {
    if (facet >= frequencies_.size()) throw ValidationError("facet index outside schema");
    if (frequencies_[facet].empty())
        throw ValidationError("facet '" + schema_->facet(facet).name + "' has no training values");
    return frequencies_[facet];
}

ValueIndex MfvModel::mode(std::size_t facet) const {
    if (modes_.at(facet) == kMissing)
        throw ValidationError("facet '" + schema_->facet(facet).name + "' has no training values");
    return modes_[facet];
}

Checkpoint MfvModel::to_checkpoint() const {
    Checkpoint cp;
    cp.kind = ModelKind::MFV;
    cp.schema = schema_;
    for (std::size_t f = 0; f < counts_.size(); ++f) {
        ParameterBlob b{"counts/" + std::to_string(f), counts_[f].size(), 1, {}};
        for (auto c : counts_[f]) b.values.push_back(static_cast<double>(c));
        cp.blobs.push_back(std::move(b));
    }
    return cp;
}

MfvModel MfvModel::from_checkpoint(const Checkpoint& cp) {
    std::vector<std::vector<std::uint64_t>> counts(cp.schema->size());
    for (std::size_t f = 0; f < counts.size(); ++f) {
        const auto& b = cp.blob("counts/" + std::to_string(f));
        if (b.rows != cp.schema->vocabulary_size(f)) throw FormatError("MFV count blob does not match vocabulary");
        for (double v : b.values) counts[f].push_back(static_cast<std::uint64_t>(v));
    }
    return MfvModel(cp.schema, std::move(counts));
}

NbModel NbModel::fit(const ExemplarTable& table, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("smoothing alpha must be finite and >= 0");
    NbModel m;
    m.schema_ = table.schema_ptr();
    m.alpha_ = alpha;
    const std::size_t n = table.facets();
    m.prior_counts_ = training_value_counts(table);
    for (const auto& c : m.prior_counts_) {
        std::uint64_t total = 0;
        for (auto x : c) total += x;
        m.prior_totals_.push_back(total);
    }
    m.pairs_.resize(n * n);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t e = 0; e < n; ++e) m.pairs_[t * n + e].target_totals.assign(m.schema_->vocabulary_size(t), 0);

    for (std::size_t r : table.rows_in(Split::Train)) {
        auto row = table.row(r);
        for (std::size_t t = 0; t < n; ++t) {
            if (row[t] == kMissing) continue;
            for (std::size_t e = 0; e < n; ++e) {
                if (e == t || row[e] == kMissing) continue;
                PairTable& p = m.pairs_[t * n + e];
                ++p.target_totals[row[t]];
                ++p.joint[joint_key(row[t], row[e])];
            }
        }
    }
    return m;
}

double NbModel::prior(std::size_t target, ValueIndex value) const {
    const double v = static_cast<double>(schema_->vocabulary_size(target));
    return (static_cast<double>(prior_counts_.at(target).at(value)) + alpha_) /
           (static_cast<double>(prior_totals_[target]) + alpha_ * v);
}

double NbModel::conditional(std::size_t target, ValueIndex target_value, std::size_t evidence, ValueIndex value) const {
    const PairTable& p = pair(target, evidence);
    auto it = p.joint.find(joint_key(target_value, value));
    const double joint = it == p.joint.end() ? 0.0 : static_cast<double>(it->second);
    const double ve = static_cast<double>(schema_->vocabulary_size(evidence));
    return (joint + alpha_) / (static_cast<double>(p.target_totals.at(target_value)) + alpha_ * ve);
}

std::vector<double> NbModel::posterior(std::span<const ValueIndex> cells, std::size_t target) const {
    const std::size_t vt = schema_->vocabulary_size(target);
    std::vector<double> log_post(vt);
    for (ValueIndex y = 0; y < vt; ++y) {
        double lp = std::log(prior(target, y));
        for (std::size_t e = 0; e < cells.size(); ++e) {
            if (e == target || cells[e] == kMissing) continue;
            lp += std::log(conditional(target, y, e, cells[e]));
        }
        log_post[y] = lp;
    }
    const double max = *std::max_element(log_post.begin(), log_post.end());
    if (!std::isfinite(max)) throw NumericError("evidence has zero likelihood under every value of facet '" +
                                                schema_->facet(target).name + "' (alpha = 0)");
    double sum = 0.0;
    for (double& v : log_post) sum += (v = std::exp(v - max));
    for (double& v : log_post) v /= sum;
    return log_post;
}

std::vector<std::vector<double>> NbModel::predict(const ProfileInput& input) const {
    check_cells(*schema_, input.cells);
    std::vector<std::vector<double>> out(schema_->size());
    for (std::size_t t = 0; t < schema_->size(); ++t)
        if (prior_totals_[t] > 0) out[t] = posterior(input.cells, t);
    return out;
}

std::vector<double> NbModel::predict_facet(const ProfileInput& input, std::size_t facet) const {
    check_cells(*schema_, input.cells);
    if (facet >= schema_->size()) throw ValidationError("facet index outside schema");
    if (prior_totals_[facet] == 0)
        throw ValidationError("facet '" + schema_->facet(facet).name + "' has no training values");
    return posterior(input.cells, facet);
}

Checkpoint NbModel::to_checkpoint() const {
    Checkpoint cp;
    cp.kind = ModelKind::NB;
    cp.schema = schema_;
    cp.config = {{"alpha", alpha_}};
    const std::size_t n = schema_->size();
    for (std::size_t t = 0; t < n; ++t) {
        ParameterBlob prior{"prior/" + std::to_string(t), prior_counts_[t].size(), 1, {}};
        for (auto c : prior_counts_[t]) prior.values.push_back(static_cast<double>(c));
        cp.blobs.push_back(std::move(prior));
    }
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t e = 0; e < n; ++e) {
            if (e == t) continue;
            const PairTable& p = pair(t, e);
            const std::string prefix = "pair/" + std::to_string(t) + "/" + std::to_string(e);
            ParameterBlob totals{prefix + "/totals", p.target_totals.size(), 1, {}};
            for (auto c : p.target_totals) totals.values.push_back(static_cast<double>(c));
            std::vector<std::pair<std::uint64_t, std::uint64_t>> entries(p.joint.begin(), p.joint.end());
            std::sort(entries.begin(), entries.end());
            ParameterBlob joint{prefix + "/joint", entries.size(), 3, {}};
            for (const auto& [key, count] : entries) {
                joint.values.push_back(static_cast<double>(key >> 32));
                joint.values.push_back(static_cast<double>(key & 0xFFFFFFFFu));
                joint.values.push_back(static_cast<double>(count));
            }
            cp.blobs.push_back(std::move(totals));
            cp.blobs.push_back(std::move(joint));
        }
    }
    return cp;
}

NbModel NbModel::from_checkpoint(const Checkpoint& cp) {
    NbModel m;
    m.schema_ = cp.schema;
    m.alpha_ = cp.config.value("alpha", 1.0);
    const std::size_t n = cp.schema->size();
    for (std::size_t t = 0; t < n; ++t) {
        const auto& b = cp.blob("prior/" + std::to_string(t));
        if (b.rows != cp.schema->vocabulary_size(t)) throw FormatError("NB prior blob does not match vocabulary");
        std::vector<std::uint64_t> counts;
        std::uint64_t total = 0;
        for (double v : b.values) {
            counts.push_back(static_cast<std::uint64_t>(v));
            total += counts.back();
        }
        m.prior_counts_.push_back(std::move(counts));
        m.prior_totals_.push_back(total);
    }
    m.pairs_.resize(n * n);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t e = 0; e < n; ++e) {
            PairTable& p = m.pairs_[t * n + e];
            p.target_totals.assign(cp.schema->vocabulary_size(t), 0);
            if (e == t) continue;
            const std::string prefix = "pair/" + std::to_string(t) + "/" + std::to_string(e);
            const auto& totals = cp.blob(prefix + "/totals");
            if (totals.rows != p.target_totals.size()) throw FormatError("NB totals blob does not match vocabulary");
            for (std::size_t j = 0; j < totals.values.size(); ++j)
                p.target_totals[j] = static_cast<std::uint64_t>(totals.values[j]);
            const auto& joint = cp.blob(prefix + "/joint");
            if (joint.cols != 3) throw FormatError("NB joint blob must have 3 columns");
            for (std::size_t k = 0; k < joint.rows; ++k)
                p.joint[joint_key(static_cast<ValueIndex>(joint.values[3 * k]),
                                  static_cast<ValueIndex>(joint.values[3 * k + 1]))] =
                    static_cast<std::uint64_t>(joint.values[3 * k + 2]);
        }
    }
    return m;
}

}  // namespace profiling
