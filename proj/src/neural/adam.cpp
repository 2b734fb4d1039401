#include "profiling/neural/adam.hpp"

#include <cmath>

#include "profiling/errors.hpp"

namespace profiling::neural {

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& state) {
    if (params.size() != grads.size()) throw ShapeError("adam gradients", params.size(), grads.size());
    if (state.first_moment.empty()) {
        for (const Matrix* p : params) {
            state.first_moment.emplace_back(p->rows(), p->cols());
            state.second_moment.emplace_back(p->rows(), p->cols());
        }
    }
    if (state.first_moment.size() != params.size()) throw ShapeError("adam state", state.first_moment.size(), params.size());

    ++state.step;
    const auto& c = state.config;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);

    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = *grads[i];
        Matrix& m = state.first_moment[i];
        Matrix& v = state.second_moment[i];
        if (!p.same_shape(g)) throw ShapeError("adam gradient " + std::to_string(i), p.size(), g.size());
        if (!p.same_shape(m)) throw ShapeError("adam moment " + std::to_string(i), m.size(), p.size());
        auto pv = p.values();
        auto gv = g.values();
        auto mv = m.values();
        auto vv = v.values();
        for (std::size_t k = 0; k < pv.size(); ++k) {
            mv[k] = c.beta1 * mv[k] + (1.0 - c.beta1) * gv[k];
            vv[k] = c.beta2 * vv[k] + (1.0 - c.beta2) * gv[k] * gv[k];
            const double m_hat = mv[k] / correction1;
            const double v_hat = vv[k] / correction2;
            pv[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

}  // namespace profiling::neural
