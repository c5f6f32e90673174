#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "rcc/clustering/assignment.hpp"
#include "rcc/clustering/distance.hpp"

namespace rcc {

struct WardMerge {
    std::size_t a, b;  // surviving slot (smaller index) and absorbed slot
    double cost;       // Ward distance at the merge
    std::size_t size;  // size of the merged cluster
};

struct WardLinkage {
    std::size_t n = 0;
    std::vector<WardMerge> merges;  // n - 1 merges in order
};

/// Ward agglomeration with Lance-Williams updates on Euclidean distances:
///   d(k, i+j) = sqrt(((n_i+n_k) d_ki^2 + (n_j+n_k) d_kj^2 - n_k d_ij^2) / (n_i+n_j+n_k))
/// Each step merges the closest active pair; ties go to the smallest (i, j).
/// Per-row nearest-neighbor caches keep the exact naive semantics.
inline WardLinkage ward_linkage(const DistanceMatrix& d0) {
    const std::size_t n = d0.size();
    WardLinkage out;
    out.n = n;
    if (n < 2) return out;
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = d0(i, j);
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_dist(n, inf);

    auto refresh = [&](std::size_t i) {
        nn[i] = n;
        nn_dist[i] = inf;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (active[j] && d[i * n + j] < nn_dist[i]) {
                nn_dist[i] = d[i * n + j];
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t i = n;
        for (std::size_t k = 0; k < n; ++k)
            if (active[k] && nn[k] < n && (i == n || nn_dist[k] < nn_dist[i])) i = k;
        const std::size_t j = nn[i];
        const double dij = nn_dist[i];
        out.merges.push_back({i, j, dij, size[i] + size[j]});

        const auto ni = static_cast<double>(size[i]), nj = static_cast<double>(size[j]);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == i || k == j) continue;
            const auto nk = static_cast<double>(size[k]);
            const double dki = d[k * n + i], dkj = d[k * n + j];
            const double v = ((ni + nk) * dki * dki + (nj + nk) * dkj * dkj - nk * dij * dij) / (ni + nj + nk);
            const double nd = std::sqrt(std::max(0.0, v));
            d[k * n + i] = nd;
            d[i * n + k] = nd;
        }
        active[j] = false;
        size[i] += size[j];

        refresh(i);
        for (std::size_t k = 0; k < i; ++k) {
            if (!active[k]) continue;
            if (nn[k] == i || nn[k] == j) {
                refresh(k);
            } else if (d[k * n + i] < nn_dist[k] || (d[k * n + i] == nn_dist[k] && i < nn[k])) {
                nn_dist[k] = d[k * n + i];
                nn[k] = i;
            }
        }
        for (std::size_t k = i + 1; k < j; ++k)
            if (active[k] && nn[k] == j) refresh(k);
    }
    return out;
}

/// Labels after applying the first n - n_clusters merges, numbered by first appearance.
inline std::vector<int> cut_linkage(const WardLinkage& link, std::size_t n_clusters) {
    const std::size_t n = link.n;
    if (n_clusters < 1 || n_clusters > n) fail(Errc::InvalidArgument, "n_clusters must lie in [1, N]");
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m < n - n_clusters; ++m) parent[find(link.merges[m].b)] = find(link.merges[m].a);
    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<int>(find(i));
    return canonical_labels(raw);
}

inline std::vector<int> hac_ward(const Matrix& x, std::size_t n_clusters) {
    if (n_clusters < 1 || n_clusters > static_cast<std::size_t>(x.rows()))
        fail(Errc::InvalidArgument, "n_clusters must lie in [1, N]");
    return cut_linkage(ward_linkage(DistanceMatrix(x)), n_clusters);
}

inline ClusterAssignment hac_ward(const FeatureMatrix& x, std::size_t n_clusters) {
    return ClusterAssignment(x.ids(), hac_ward(x.values(), n_clusters));
}

}  // namespace rcc
