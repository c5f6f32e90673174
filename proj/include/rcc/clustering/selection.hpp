#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "rcc/clustering/dbscan.hpp"
#include "rcc/clustering/knee.hpp"
#include "rcc/clustering/silhouette.hpp"

namespace rcc {

/// Sorted nearest-neighbor distances (one per point).
inline std::vector<double> sorted_nn_distances(const DistanceMatrix& d) {
    const std::size_t n = d.size();
    std::vector<double> nn(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) nn[i] = std::min(nn[i], d(i, j));
    std::sort(nn.begin(), nn.end());
    return nn;
}

/// eps = the knee of the ascending nearest-neighbor distance curve.
inline double select_eps(const DistanceMatrix& d, std::size_t smoothing = 1) {
    if (d.size() < 3) fail(Errc::TooFewSamples, "select_eps needs N >= 3");
    const auto nn = sorted_nn_distances(d);
    KneeInput curve;
    curve.xs.resize(nn.size());
    for (std::size_t i = 0; i < nn.size(); ++i) curve.xs[i] = static_cast<double>(i);
    curve.ys = nn;
    const double eps = nn[knee_point(curve, smoothing)];
    // A knee on a zero distance (duplicates) is not a usable radius.
    if (!(eps > 0.0)) {
        for (double v : nn)
            if (v > 0.0) return v;
        fail(Errc::DegenerateDistances, "all nearest-neighbor distances are zero");
    }
    return eps;
}

inline double select_eps(const Matrix& x) { return select_eps(DistanceMatrix(x)); }

struct MinPtsRange {
    int lo = 3;
    int hi = 20;
};

struct MinPtsCandidate {
    int min_pts = 0;
    int n_clusters = 0;
    std::optional<double> silhouette;  // empty when skipped (< 2 clusters)
};

struct MinPtsSelection {
    int min_pts = 0;
    std::vector<int> labels;
    double silhouette = 0.0;
    std::vector<MinPtsCandidate> candidates;
};

/// Runs DBSCAN for each candidate min_pts at fixed eps and keeps the highest
/// silhouette (noise excluded). Candidates with < 2 clusters are skipped;
/// ties keep the smaller min_pts. Candidates above N are dropped.
inline MinPtsSelection select_min_pts(const DistanceMatrix& d, double eps, MinPtsRange range = {}) {
    if (range.lo < 2 || range.hi < range.lo) fail(Errc::InvalidArgument, "min_pts candidates must lie in [2, N]");
    const int hi = std::min(range.hi, static_cast<int>(d.size()));
    MinPtsSelection best;
    bool found = false;
    for (int m = range.lo; m <= hi; ++m) {
        auto labels = dbscan(d, DbscanParams{eps, m});
        MinPtsCandidate cand{m, 0, std::nullopt};
        for (int l : labels) cand.n_clusters = std::max(cand.n_clusters, l + 1);
        if (cand.n_clusters >= 2) {
            cand.silhouette = silhouette(d, labels);
            if (!found || *cand.silhouette > best.silhouette) {
                best.min_pts = m;
                best.labels = std::move(labels);
                best.silhouette = *cand.silhouette;
                found = true;
            }
        }
        best.candidates.push_back(cand);
    }
    if (!found) fail(Errc::NoValidConfiguration, "no min_pts candidate produced >= 2 clusters");
    return best;
}

inline MinPtsSelection select_min_pts(const Matrix& x, double eps, MinPtsRange range = {}) {
    return select_min_pts(DistanceMatrix(x), eps, range);
}

}  // namespace rcc
