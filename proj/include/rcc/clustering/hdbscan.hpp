#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "rcc/clustering/assignment.hpp"
#include "rcc/clustering/distance.hpp"

namespace rcc {

/// One node of the condensed cluster tree.
struct CondensedCluster {
    int parent = -1;  // -1 for the root
    double lambda_birth = 0.0;
    double stability = 0.0;
    std::vector<int> children;
    std::vector<std::size_t> points;  // every point that belongs to the cluster at birth
};

struct HdbscanResult {
    std::vector<int> labels;
    std::vector<CondensedCluster> tree;  // tree[0] is the root
    std::vector<int> selected;           // indices into tree
    std::vector<double> core_distances;
};

namespace detail {

struct MstEdge {
    std::size_t u, v;
    double w;
};

/// Prim's algorithm on the dense mutual-reachability graph. Ties pick the lowest index.
inline std::vector<MstEdge> dense_mst(const std::vector<double>& mr, std::size_t n) {
    std::vector<MstEdge> edges;
    if (n < 2) return edges;
    std::vector<bool> in_tree(n, false);
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    in_tree[0] = true;
    for (std::size_t j = 1; j < n; ++j) key[j] = mr[j];
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j)
            if (!in_tree[j] && (best == n || key[j] < key[best])) best = j;
        in_tree[best] = true;
        edges.push_back({from[best], best, key[best]});
        for (std::size_t j = 0; j < n; ++j) {
            if (!in_tree[j] && mr[best * n + j] < key[j]) {
                key[j] = mr[best * n + j];
                from[j] = best;
            }
        }
    }
    return edges;
}

struct MergeNode {
    double weight = 0.0;
    std::size_t size = 1;
    std::vector<std::size_t> children;  // empty for leaves (points)
};

/// Single-linkage merge tree in which merges at exactly equal distance are
/// flattened into one multi-way node, so ties cannot depend on edge order.
inline std::vector<MergeNode> merge_tree(std::vector<MstEdge> edges, std::size_t n) {
    std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
        if (a.w != b.w) return a.w < b.w;
        const auto a_lo = std::min(a.u, a.v), b_lo = std::min(b.u, b.v);
        if (a_lo != b_lo) return a_lo < b_lo;
        return std::max(a.u, a.v) < std::max(b.u, b.v);
    });
    std::vector<MergeNode> nodes(n);
    std::vector<std::size_t> parent(n), comp_node(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::iota(comp_node.begin(), comp_node.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : edges) {
        const auto ru = find(e.u), rv = find(e.v);
        MergeNode merged;
        merged.weight = e.w;
        for (const auto node : {comp_node[ru], comp_node[rv]}) {
            if (!nodes[node].children.empty() && nodes[node].weight == e.w) {
                merged.children.insert(merged.children.end(), nodes[node].children.begin(), nodes[node].children.end());
            } else {
                merged.children.push_back(node);
            }
        }
        merged.size = nodes[comp_node[ru]].size + nodes[comp_node[rv]].size;
        nodes.push_back(std::move(merged));
        parent[rv] = ru;
        comp_node[ru] = nodes.size() - 1;
    }
    return nodes;
}

inline void collect_leaves(const std::vector<MergeNode>& nodes, std::size_t root, std::vector<std::size_t>& out) {
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        if (nodes[id].children.empty()) {
            out.push_back(id);
        } else {
            for (auto c : nodes[id].children) stack.push_back(c);
        }
    }
    std::sort(out.begin(), out.end());
}

}  // namespace detail

/// HDBSCAN*: mutual reachability with core distance to the k-th nearest point
/// (k = min_cluster_size, the point itself counted), exact MST, condensed tree
/// at min_cluster_size, excess-of-mass selection. The root is never selected;
/// a cluster is kept only if its stability strictly exceeds the summed
/// stability of the best selection among its descendants.
inline HdbscanResult hdbscan(const DistanceMatrix& d, int min_cluster_size) {
    const std::size_t n = d.size();
    if (min_cluster_size < 2) fail(Errc::InvalidArgument, "min_cluster_size must be >= 2");
    if (static_cast<std::size_t>(min_cluster_size) > n)
        fail(Errc::MinClusterSizeTooLarge, "min_cluster_size exceeds N=" + std::to_string(n));
    const auto mcs = static_cast<std::size_t>(min_cluster_size);

    HdbscanResult result;
    result.core_distances.resize(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row[j] = d(i, j);
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(mcs - 1), row.end());
        result.core_distances[i] = row[mcs - 1];
    }
    const auto& core = result.core_distances;
    std::vector<double> mr(n * n, 0.0);
    double min_positive = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double w = std::max({core[i], core[j], d(i, j)});
            mr[i * n + j] = w;
            if (w > 0.0) min_positive = std::min(min_positive, w);
        }
    }
    // Zero distances would give infinite lambda; cap them above every finite one.
    const double lambda_cap = std::isfinite(min_positive) ? 2.0 / min_positive : 1.0;
    auto lambda_of = [&](double w) { return w > 0.0 ? 1.0 / w : lambda_cap; };

    const auto nodes = detail::merge_tree(detail::dense_mst(mr, n), n);
    auto& tree = result.tree;
    tree.push_back(CondensedCluster{});
    detail::collect_leaves(nodes, nodes.size() - 1, tree[0].points);

    std::vector<std::pair<std::size_t, int>> work{{nodes.size() - 1, 0}};
    while (!work.empty()) {
        const auto [node_id, cid] = work.back();
        work.pop_back();
        const auto& node = nodes[node_id];
        const double lambda = lambda_of(node.weight);
        const double gain = lambda - tree[static_cast<std::size_t>(cid)].lambda_birth;
        std::vector<std::size_t> big;
        for (auto c : node.children)
            if (nodes[c].size >= mcs) big.push_back(c);
        // Every point under this node leaves `cid` here, except when exactly one
        // child is large enough to carry the cluster on.
        if (big.size() == 1) {
            for (auto c : node.children)
                if (c != big[0]) tree[static_cast<std::size_t>(cid)].stability += static_cast<double>(nodes[c].size) * gain;
            work.emplace_back(big[0], cid);
            continue;
        }
        tree[static_cast<std::size_t>(cid)].stability += static_cast<double>(node.size) * gain;
        if (big.size() >= 2) {
            for (auto c : big) {
                CondensedCluster child;
                child.parent = cid;
                child.lambda_birth = lambda;
                detail::collect_leaves(nodes, c, child.points);
                tree.push_back(std::move(child));
                const int child_id = static_cast<int>(tree.size() - 1);
                tree[static_cast<std::size_t>(cid)].children.push_back(child_id);
                work.emplace_back(c, child_id);
            }
        }
    }

    // Excess of mass, bottom-up; children always have larger indices than parents.
    std::vector<double> best(tree.size(), 0.0);
    std::vector<std::vector<int>> chosen(tree.size());
    for (std::size_t k = tree.size(); k-- > 0;) {
        double child_sum = 0.0;
        std::vector<int> child_sel;
        for (int c : tree[k].children) {
            child_sum += best[static_cast<std::size_t>(c)];
            child_sel.insert(child_sel.end(), chosen[static_cast<std::size_t>(c)].begin(),
                             chosen[static_cast<std::size_t>(c)].end());
        }
        if (k != 0 && (tree[k].children.empty() || tree[k].stability > child_sum)) {
            best[k] = tree[k].stability;
            chosen[k] = {static_cast<int>(k)};
        } else {
            best[k] = child_sum;
            chosen[k] = std::move(child_sel);
        }
    }
    result.selected = chosen[0];

    std::vector<int> raw(n, kNoise);
    for (int c : result.selected)
        for (auto p : tree[static_cast<std::size_t>(c)].points) raw[p] = c;
    result.labels = canonical_labels(raw);
    return result;
}

inline std::vector<int> hdbscan(const Matrix& x, int min_cluster_size) {
    return hdbscan(DistanceMatrix(x), min_cluster_size).labels;
}

inline ClusterAssignment hdbscan(const FeatureMatrix& x, int min_cluster_size) {
    return ClusterAssignment(x.ids(), hdbscan(x.values(), min_cluster_size));
}

}  // namespace rcc
