#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "profiling/neural/matrix.hpp"

namespace profiling::neural {

struct CheckedParameter {
    std::string name;
    Matrix* value;           // perturbed in place, restored afterwards
    const Matrix* analytic;  // gradient computed by backpropagation
};

struct GradCheckReport {
    bool pass = false;
    double max_relative_error = 0.0;
    std::string worst_location;
    std::size_t checked = 0;
    std::optional<std::string> failure;  // set when the loss became non-finite
};

/// Compares analytic gradients against central differences of `loss`.
/// Relative error is |a - n| / max(|a|, |n|, 1e-6); the floor keeps
/// near-zero entries from amplifying rounding noise.
GradCheckReport grad_check(const std::vector<CheckedParameter>& params, const std::function<double()>& loss,
                           double step = 1e-5, double tolerance = 1e-4);

}  // namespace profiling::neural
