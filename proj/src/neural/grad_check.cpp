#include "profiling/neural/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "profiling/errors.hpp"

namespace profiling::neural {

GradCheckReport grad_check(const std::vector<CheckedParameter>& params, const std::function<double()>& loss,
                           double step, double tolerance) {
    GradCheckReport report;
    for (const auto& p : params) {
        if (!p.value->same_shape(*p.analytic)) throw ShapeError("grad_check " + p.name, p.value->size(), p.analytic->size());
        auto values = p.value->values();
        auto analytic = p.analytic->values();
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double original = values[k];
            values[k] = original + step;
            const double plus = loss();
            values[k] = original - step;
            const double minus = loss();
            values[k] = original;
            const std::string location = p.name + "[" + std::to_string(k / p.value->cols()) + "," +
                                         std::to_string(k % p.value->cols()) + "]";
            if (!std::isfinite(plus) || !std::isfinite(minus)) {
                report.failure = "non-finite loss at " + location;
                report.worst_location = location;
                report.pass = false;
                return report;
            }
            const double numeric = (plus - minus) / (2.0 * step);
            const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
            const double rel = std::abs(analytic[k] - numeric) / denom;
            if (report.checked == 0 || rel > report.max_relative_error) {
                report.max_relative_error = rel;
                report.worst_location = location;
            }
            ++report.checked;
        }
    }
    report.pass = report.max_relative_error < tolerance;
    return report;
}

}  // namespace profiling::neural
