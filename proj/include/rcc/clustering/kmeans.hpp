#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rcc/clustering/assignment.hpp"
#include "rcc/clustering/knee.hpp"
#include "rcc/core/types.hpp"
#include "rcc/random.hpp"

namespace rcc {

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
};

struct KMeansResult {
    std::vector<int> labels;  // canonical: clusters numbered by first appearance
    Matrix centers;           // row c is the center of cluster c
    double ssd = 0.0;
};

namespace detail {

inline double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double d = a(i, c) - b(j, c);
        s += d * d;
    }
    return s;
}

inline std::size_t count_distinct_rows(const Matrix& x) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            if (x(a, c) != x(b, c)) return x(a, c) < x(b, c);
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (less(order[i - 1], order[i])) ++distinct;
    return distinct;
}

inline Matrix kmeanspp_seed(const Matrix& x, int k, Rng& rng) {
    const Eigen::Index n = x.rows();
    Matrix centers(k, x.cols());
    const auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = x.row(first);
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(x, i, centers, 0);
    for (int c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        Eigen::Index pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
                    pick = i;
                    break;
                }
            }
            // Rounding can leave `target` past the last increment; fall back to
            // the last point that is not already a center.
            if (d2[static_cast<std::size_t>(pick)] == 0.0) {
                for (Eigen::Index i = n - 1; i >= 0; --i) {
                    if (d2[static_cast<std::size_t>(i)] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        }
        centers.row(c) = x.row(pick);
        for (Eigen::Index i = 0; i < n; ++i)
            d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], squared_distance(x, i, centers, c));
    }
    return centers;
}

inline KMeansResult lloyd(const Matrix& x, Matrix centers, int max_iterations) {
    const Eigen::Index n = x.rows();
    const int k = static_cast<int>(centers.rows());
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    double prev_ssd = std::numeric_limits<double>::infinity();
    double ssd = 0.0;
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        std::vector<double> dist(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = squared_distance(x, i, centers, 0);
            for (int c = 1; c < k; ++c) {
                const double d = squared_distance(x, i, centers, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) changed = true;
            labels[static_cast<std::size_t>(i)] = best;
            dist[static_cast<std::size_t>(i)] = best_d;
        }
        // Repair empty clusters with the point farthest from its center.
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto si = static_cast<std::size_t>(i);
                if (sizes[static_cast<std::size_t>(labels[si])] < 2) continue;
                if (far < 0 || dist[si] > dist[static_cast<std::size_t>(far)]) far = i;
            }
            const auto sf = static_cast<std::size_t>(far);
            --sizes[static_cast<std::size_t>(labels[sf])];
            labels[sf] = c;
            dist[sf] = 0.0;
            sizes[static_cast<std::size_t>(c)] = 1;
            centers.row(c) = x.row(far);
            changed = true;
        }
        centers.setZero();
        for (Eigen::Index i = 0; i < n; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
        for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);

        ssd = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) ssd += squared_distance(x, i, centers, labels[static_cast<std::size_t>(i)]);
        if (ssd > prev_ssd * (1.0 + 1e-12) + 1e-12) throw std::logic_error("k-means SSD increased across a Lloyd iteration");
        prev_ssd = ssd;
        if (!changed) break;
    }
    return KMeansResult{std::move(labels), std::move(centers), ssd};
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding, best SSD over restarts.
/// Restart r uses sub_seed(seed, r); equal SSDs keep the earlier restart.
inline KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed, const KMeansOptions& opts = {}) {
    const Eigen::Index n = x.rows();
    if (k < 1) fail(Errc::InvalidArgument, "k must be >= 1");
    if (k > n) fail(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds N=" + std::to_string(n));
    if (static_cast<std::size_t>(k) > detail::count_distinct_rows(x))
        fail(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds the number of distinct points");

    KMeansResult best;
    best.ssd = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        Rng rng(sub_seed(seed, static_cast<std::uint64_t>(r)));
        auto result = detail::lloyd(x, detail::kmeanspp_seed(x, k, rng), opts.max_iterations);
        if (result.ssd < best.ssd) best = std::move(result);
    }

    const auto canon = canonical_labels(best.labels);
    Matrix centers(best.centers.rows(), best.centers.cols());
    for (std::size_t i = 0; i < canon.size(); ++i) centers.row(canon[i]) = best.centers.row(best.labels[i]);
    best.labels = canon;
    best.centers = std::move(centers);
    return best;
}

inline ClusterAssignment kmeans(const FeatureMatrix& x, int k, std::uint64_t seed, const KMeansOptions& opts = {}) {
    return ClusterAssignment(x.ids(), kmeans(x.values(), k, seed, opts).labels);
}

struct KRange {
    int lo = 5;
    int hi = 35;
};

struct SelectKResult {
    int k = 0;
    std::vector<int> ks;
    std::vector<double> ssds;
};

/// Runs k-means for every k in the range and picks the knee of the (k, SSD) curve.
inline SelectKResult select_k_curve(const Matrix& x, KRange range, std::uint64_t seed, const KMeansOptions& opts = {},
                                    std::size_t smoothing = 1) {
    if (range.lo < 1 || range.hi < range.lo) fail(Errc::InvalidArgument, "invalid k range");
    if (range.hi - range.lo + 1 < 3) fail(Errc::InvalidArgument, "k range needs at least 3 values");
    SelectKResult out;
    for (int k = range.lo; k <= range.hi; ++k) {
        out.ks.push_back(k);
        out.ssds.push_back(kmeans(x, k, seed, opts).ssd);
    }
    KneeInput curve;
    curve.xs.assign(out.ks.begin(), out.ks.end());
    curve.ys = out.ssds;
    out.k = out.ks[knee_point(curve, smoothing)];
    return out;
}

inline int select_k(const Matrix& x, KRange range, std::uint64_t seed) { return select_k_curve(x, range, seed).k; }

}  // namespace rcc
