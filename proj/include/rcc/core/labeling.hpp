#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rcc/core/types.hpp"

namespace rcc {

/// True when the record counts as a DNN failure under the dataset's task.
/// Regression thresholds are exclusive: an error equal to the threshold passes.
inline bool is_failure(const ImageRecord& r, const Task& task) {
    if (is_classification(task)) return std::get<std::string>(r.predicted_output) != std::get<std::string>(r.true_output);
    const auto& reg = std::get<RegressionTask>(task);
    const auto& t = std::get<std::vector<double>>(r.true_output);
    const auto& p = std::get<std::vector<double>>(r.predicted_output);
    if (reg.metric == RegressionMetric::SquaredError) {
        double se = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) se += (p[i] - t[i]) * (p[i] - t[i]);
        return se > reg.threshold;
    }
    // Points are stored as x0;y0;x1;y1;... A single far point is enough.
    for (std::size_t i = 0; i + 1 < t.size(); i += 2) {
        if (std::hypot(p[i] - t[i], p[i + 1] - t[i + 1]) > reg.threshold) return true;
    }
    return false;
}

/// Ids of failing records, in dataset order.
inline std::vector<std::string> label_failures(const Dataset& d) {
    std::vector<std::string> out;
    for (const auto& r : d.records())
        if (is_failure(r, d.task())) out.push_back(r.id);
    return out;
}

/// Restricts the dataset to failing records and aligns the features to them.
inline FailureSet make_failure_set(const Dataset& d, const FeatureMatrix& features) {
    const auto failing = label_failures(d);
    if (failing.empty()) fail(Errc::InvalidArgument, "dataset has no failure-inducing images");
    return FailureSet{d.subset(failing), features.select(failing)};
}

}  // namespace rcc
