#pragma once

#include <deque>
#include <vector>

#include "rcc/clustering/assignment.hpp"
#include "rcc/clustering/distance.hpp"
#include "rcc/core/types.hpp"

namespace rcc {

struct DbscanParams {
    double eps = 0.0;
    int min_pts = 2;
};

inline void validate(const DbscanParams& p) {
    if (!(p.eps > 0.0)) fail(Errc::InvalidArgument, "dbscan eps must be > 0");
    if (p.min_pts < 2) fail(Errc::InvalidArgument, "dbscan min_pts must be >= 2");
}

/// DBSCAN over a precomputed distance matrix.
///
/// Neighborhoods are closed balls (d <= eps) that include the point itself,
/// and min_pts counts the point. Clusters are the connected components of
/// core points, numbered by their lowest core index. A border point joins the
/// cluster of its lowest-index core neighbor.
inline std::vector<int> dbscan(const DistanceMatrix& d, const DbscanParams& p) {
    validate(p);
    const std::size_t n = d.size();
    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (d(i, j) <= p.eps) ++count;
        core[i] = count >= static_cast<std::size_t>(p.min_pts);
    }

    std::vector<int> labels(n, kNoise);
    int next = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || labels[seed] != kNoise) continue;
        labels[seed] = next;
        std::deque<std::size_t> frontier{seed};
        while (!frontier.empty()) {
            const std::size_t i = frontier.front();
            frontier.pop_front();
            for (std::size_t j = 0; j < n; ++j) {
                if (core[j] && labels[j] == kNoise && d(i, j) <= p.eps) {
                    labels[j] = next;
                    frontier.push_back(j);
                }
            }
        }
        ++next;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (core[j] && d(i, j) <= p.eps) {
                labels[i] = labels[j];
                break;
            }
        }
    }
    return labels;
}

inline std::vector<int> dbscan(const Matrix& x, const DbscanParams& p) { return dbscan(DistanceMatrix(x), p); }

inline ClusterAssignment dbscan(const FeatureMatrix& x, const DbscanParams& p) {
    return ClusterAssignment(x.ids(), dbscan(x.values(), p));
}

}  // namespace rcc
