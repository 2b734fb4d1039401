#include "profiling/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "profiling/errors.hpp"

namespace profiling {

namespace {

void check_distribution(std::span<const double> p, const char* name) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " has a negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw ValidationError(std::string(name) + " sums to " + std::to_string(sum) + ", not 1");
}

void check_pair(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw ValidationError("distributions have different supports (" + std::to_string(p.size()) + " vs " +
                              std::to_string(q.size()) + ")");
    check_distribution(p, "p");
    check_distribution(q, "q");
}

double kl_unchecked(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log2(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

double js_unchecked(std::span<const double> p, std::span<const double> q) {
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
    const double js = 0.5 * kl_unchecked(p, m) + 0.5 * kl_unchecked(q, m);
    return std::clamp(js, 0.0, 1.0);
}

}  // namespace

double js_divergence(std::span<const double> p, std::span<const double> q) {
    check_pair(p, q);
    return js_unchecked(p, q);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    check_pair(p, q);
    return kl_unchecked(p, q);
}

std::string to_string(DivergenceMetric metric) {
    switch (metric) {
        case DivergenceMetric::JsDivergence: return "js-divergence";
        case DivergenceMetric::JsDistance: return "js-distance";
        case DivergenceMetric::Kl: return "kl-divergence";
        case DivergenceMetric::KlAverage: return "kl-divergence-avg";
        case DivergenceMetric::KlMax: return "kl-divergence-max";
        case DivergenceMetric::Cosine: return "cosine-distance";
    }
    return "?";
}

const std::vector<DivergenceMetric>& all_divergence_metrics() {
    static const std::vector<DivergenceMetric> metrics{DivergenceMetric::JsDivergence, DivergenceMetric::JsDistance,
                                                       DivergenceMetric::Kl,           DivergenceMetric::KlAverage,
                                                       DivergenceMetric::KlMax,        DivergenceMetric::Cosine};
    return metrics;
}

double divergence(DivergenceMetric metric, std::span<const double> p, std::span<const double> q) {
    check_pair(p, q);
    switch (metric) {
        case DivergenceMetric::JsDivergence: return js_unchecked(p, q);
        case DivergenceMetric::JsDistance: return std::sqrt(js_unchecked(p, q));
        case DivergenceMetric::Kl: return kl_unchecked(p, q);
        case DivergenceMetric::KlAverage: return 0.5 * (kl_unchecked(p, q) + kl_unchecked(q, p));
        case DivergenceMetric::KlMax: return std::max(kl_unchecked(p, q), kl_unchecked(q, p));
        case DivergenceMetric::Cosine: {
            double dot = 0.0, np = 0.0, nq = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                dot += p[i] * q[i];
                np += p[i] * p[i];
                nq += q[i] * q[i];
            }
            return std::max(0.0, 1.0 - dot / std::sqrt(np * nq));
        }
    }
    return 0.0;
}

}  // namespace profiling
