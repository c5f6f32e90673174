#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcc/core/types.hpp"
#include "rcc/random.hpp"

namespace fixture {

using rcc::Matrix;

struct Blobs {
    Matrix points;
    std::vector<int> truth;  // generating blob per row; -1 for background points
    std::vector<std::string> ids;
    std::vector<std::string> tags;  // "s<blob>" or "" for background
};

/// Isotropic Gaussian blobs (stddev `sigma`) whose centers sit on scaled
/// coordinate axes, so every pair of centers is exactly `separation` apart.
/// Optional uniform background points fill the bounding box of the blobs.
inline Blobs gaussian_blobs(const std::vector<int>& sizes, int dim, double sigma, double separation,
                            std::uint64_t seed, int n_background = 0) {
    rcc::Rng rng(seed);
    const double axis = separation / std::sqrt(2.0);
    int total = n_background;
    for (int s : sizes) total += s;
    Blobs b;
    b.points.resize(total, dim);
    int row = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        for (int p = 0; p < sizes[k]; ++p, ++row) {
            for (int c = 0; c < dim; ++c) {
                const double center = (c == static_cast<int>(k % static_cast<std::size_t>(dim))) ? axis : 0.0;
                b.points(row, c) = center + sigma * rng.normal();
            }
            b.truth.push_back(static_cast<int>(k));
            b.tags.push_back("s" + std::to_string(k));
        }
    }
    if (n_background > 0) {
        Eigen::RowVectorXd lo = b.points.topRows(row).colwise().minCoeff();
        Eigen::RowVectorXd hi = b.points.topRows(row).colwise().maxCoeff();
        for (int p = 0; p < n_background; ++p, ++row) {
            for (int c = 0; c < dim; ++c) b.points(row, c) = rng.uniform(lo(c), hi(c));
            b.truth.push_back(-1);
            b.tags.emplace_back();
        }
    }
    for (int i = 0; i < total; ++i) b.ids.push_back("img" + std::to_string(i));
    return b;
}

inline rcc::FeatureMatrix as_features(const Blobs& b) { return rcc::FeatureMatrix(b.ids, b.points); }

inline Matrix column(std::initializer_list<double> xs) {
    Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double v : xs) m(i++, 0) = v;
    return m;
}

inline std::vector<std::string> make_ids(std::size_t n, const std::string& prefix = "img") {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
    return ids;
}

/// Classification failure set over the blobs: every image misclassified,
/// scenario tag from the generating blob.
inline rcc::FailureSet failure_set(const Blobs& b) {
    std::vector<rcc::ImageRecord> recs;
    for (std::size_t i = 0; i < b.ids.size(); ++i) recs.push_back({b.ids[i], "", "ok", "bad", b.tags[i]});
    return rcc::FailureSet{rcc::Dataset(std::move(recs), rcc::ClassificationTask{}), as_features(b)};
}

}  // namespace fixture
