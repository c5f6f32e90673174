#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rcc/error.hpp"

namespace rcc {

/// Dense row-major matrix; one row per image.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Output of the DNN under test: a class label or a numeric vector.
using Output = std::variant<std::string, std::vector<double>>;

struct ImageRecord {
    std::string id;
    std::string path;  // relative to the image root; may be empty
    Output true_output;
    Output predicted_output;
    std::string scenario;  // empty: pre-existing / unknown cause

    bool is_injected() const { return !scenario.empty(); }
};

enum class RegressionMetric { SquaredError, PointDistance };

struct ClassificationTask {};

struct RegressionTask {
    double threshold = 0.0;
    RegressionMetric metric = RegressionMetric::SquaredError;
};

using Task = std::variant<ClassificationTask, RegressionTask>;

inline bool is_classification(const Task& t) { return std::holds_alternative<ClassificationTask>(t); }

class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<ImageRecord> records, Task task) : records_(std::move(records)), task_(task) {
        validate();
    }

    const std::vector<ImageRecord>& records() const { return records_; }
    const Task& task() const { return task_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    const ImageRecord* find(const std::string& id) const {
        for (const auto& r : records_)
            if (r.id == id) return &r;
        return nullptr;
    }

    /// Records whose id is in `ids`, in dataset order.
    Dataset subset(const std::vector<std::string>& ids) const {
        std::unordered_set<std::string> keep(ids.begin(), ids.end());
        std::vector<ImageRecord> out;
        for (const auto& r : records_)
            if (keep.count(r.id)) out.push_back(r);
        return Dataset(std::move(out), task_);
    }

    std::unordered_map<std::string, std::string> scenario_map() const {
        std::unordered_map<std::string, std::string> m;
        for (const auto& r : records_) m.emplace(r.id, r.scenario);
        return m;
    }

private:
    void validate() const {
        if (const auto* reg = std::get_if<RegressionTask>(&task_)) {
            if (!(reg->threshold > 0.0) || !std::isfinite(reg->threshold))
                fail(Errc::InvalidArgument, "regression threshold must be > 0");
        }
        const bool want_label = is_classification(task_);
        std::unordered_set<std::string> seen;
        std::size_t vec_len = 0;
        bool have_len = false;
        for (const auto& r : records_) {
            if (r.id.empty()) fail(Errc::InvalidArgument, "empty image id");
            if (!seen.insert(r.id).second) fail(Errc::DuplicateId, r.id);
            const bool t_label = std::holds_alternative<std::string>(r.true_output);
            const bool p_label = std::holds_alternative<std::string>(r.predicted_output);
            if (t_label != want_label || p_label != want_label)
                fail(Errc::MixedOutputKinds, "record " + r.id + " does not match the task output kind");
            if (!want_label) {
                const auto& t = std::get<std::vector<double>>(r.true_output);
                const auto& p = std::get<std::vector<double>>(r.predicted_output);
                if (t.size() != p.size() || t.empty())
                    fail(Errc::MixedOutputKinds, "record " + r.id + " has mismatched vector lengths");
                if (have_len && t.size() != vec_len)
                    fail(Errc::MixedOutputKinds, "record " + r.id + " vector length differs from earlier records");
                vec_len = t.size();
                have_len = true;
                if (std::get<RegressionTask>(task_).metric == RegressionMetric::PointDistance && t.size() % 2 != 0)
                    fail(Errc::MixedOutputKinds, "record " + r.id + " point vector has odd length");
            }
        }
    }

    std::vector<ImageRecord> records_;
    Task task_ = ClassificationTask{};
};

/// N x M feature matrix with one id per row.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(std::vector<std::string> ids, Matrix values) : ids_(std::move(ids)), values_(std::move(values)) {
        if (static_cast<Eigen::Index>(ids_.size()) != values_.rows())
            fail(Errc::InvalidArgument, "id count does not match row count");
        if (ids_.empty()) fail(Errc::InvalidArgument, "feature matrix has no rows");
        if (values_.cols() < 1) fail(Errc::InvalidArgument, "feature matrix has no columns");
        std::unordered_set<std::string> seen;
        for (const auto& id : ids_) {
            if (id.empty()) fail(Errc::InvalidArgument, "empty id");
            if (!seen.insert(id).second) fail(Errc::DuplicateId, id);
        }
        for (Eigen::Index r = 0; r < values_.rows(); ++r)
            for (Eigen::Index c = 0; c < values_.cols(); ++c)
                if (!std::isfinite(values_(r, c)))
                    fail(Errc::NonFiniteValue, "row " + std::to_string(r) + ", col " + std::to_string(c));
    }

    const std::vector<std::string>& ids() const { return ids_; }
    const Matrix& values() const { return values_; }
    std::size_t rows() const { return ids_.size(); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }

    /// Rows reordered/restricted to `ids`. Every requested id must exist.
    FeatureMatrix select(const std::vector<std::string>& ids) const {
        std::unordered_map<std::string, Eigen::Index> index;
        for (std::size_t i = 0; i < ids_.size(); ++i) index.emplace(ids_[i], static_cast<Eigen::Index>(i));
        Matrix out(static_cast<Eigen::Index>(ids.size()), values_.cols());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto it = index.find(ids[i]);
            if (it == index.end()) fail(Errc::InvalidArgument, "no feature row for id " + ids[i]);
            out.row(static_cast<Eigen::Index>(i)) = values_.row(it->second);
        }
        return FeatureMatrix(ids, std::move(out));
    }

    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
        return a.ids_ == b.ids_ && a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    std::vector<std::string> ids_;
    Matrix values_;
};

/// Failing records plus their features, aligned row-for-row.
struct FailureSet {
    Dataset dataset;
    FeatureMatrix features;

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        out.reserve(dataset.size());
        for (const auto& r : dataset.records()) out.push_back(r.id);
        return out;
    }
};

}  // namespace rcc
