#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "profiling/neural/matrix.hpp"

namespace profiling::neural {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
    std::uint64_t step = 0;
};

/// One bias-corrected ADAM update. Moments are allocated on the first call;
/// later calls must pass the same parameter shapes (ShapeError otherwise).
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& state);

}  // namespace profiling::neural
