#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "rcc/clustering/assignment.hpp"
#include "rcc/clustering/distance.hpp"

namespace rcc {

/// Mean silhouette over non-noise points. Singleton clusters score 0.
inline double silhouette(const DistanceMatrix& d, const std::vector<int>& labels) {
    const std::size_t n = d.size();
    if (labels.size() != n) fail(Errc::InvalidArgument, "label count does not match the distance matrix");
    int n_clusters = 0;
    for (int l : labels) n_clusters = std::max(n_clusters, l + 1);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n_clusters), 0);
    for (int l : labels)
        if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    const auto populated = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
    if (populated < 2) fail(Errc::TooFewClusters, "silhouette needs at least 2 non-empty clusters");

    double total = 0.0;
    std::size_t counted = 0;
    std::vector<double> sums(static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        ++counted;
        const auto own = static_cast<std::size_t>(labels[i]);
        if (sizes[own] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && labels[j] >= 0) sums[static_cast<std::size_t>(labels[j])] += d(i, j);
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sums.size(); ++c)
            if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(counted);
}

inline double silhouette(const Matrix& x, const std::vector<int>& labels) { return silhouette(DistanceMatrix(x), labels); }

inline double silhouette(const FeatureMatrix& x, const ClusterAssignment& a) {
    if (a.ids() != x.ids()) fail(Errc::InvalidArgument, "assignment ids do not match the feature rows");
    return silhouette(x.values(), a.labels());
}

}  // namespace rcc
