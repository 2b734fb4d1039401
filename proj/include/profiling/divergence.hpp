#pragma once

#include <span>
#include <string>
#include <vector>

namespace profiling {

/// Jensen-Shannon divergence with log base 2, in [0, 1].
/// Throws ValidationError when supports differ or an input is not a distribution (1e-6).
double js_divergence(std::span<const double> p, std::span<const double> q);

/// KL(p || q) in bits; +inf when q is zero where p is not.
double kl_divergence(std::span<const double> p, std::span<const double> q);

enum class DivergenceMetric { JsDivergence, JsDistance, Kl, KlAverage, KlMax, Cosine };

std::string to_string(DivergenceMetric metric);
const std::vector<DivergenceMetric>& all_divergence_metrics();

double divergence(DivergenceMetric metric, std::span<const double> p, std::span<const double> q);

}  // namespace profiling
