#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library beyond the Matrix type.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "rcc/core/types.hpp"

namespace oracle {

using rcc::Matrix;

inline double dist(const Matrix& x, Eigen::Index i, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
    return std::sqrt(s);
}

/// Relabel by first appearance so partitions can be compared directly.
inline std::vector<int> canon(const std::vector<int>& labels) {
    std::map<int, int> m;
    std::vector<int> out;
    for (int l : labels) {
        if (l < 0) {
            out.push_back(-1);
            continue;
        }
        out.push_back(m.emplace(l, static_cast<int>(m.size())).first->second);
    }
    return out;
}

/// Naive DBSCAN: core flags by counting, union-find over core pairs, border
/// points take the component of their lowest-index core neighbor.
inline std::vector<int> dbscan(const Matrix& x, double eps, int min_pts) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        int c = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (dist(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= eps) ++c;
        core[i] = c >= min_pts;
    }
    std::vector<std::size_t> uf(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) { return uf[a] == a ? a : uf[a] = find(uf[a]); };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (core[i] && core[j] && dist(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= eps)
                uf[find(j)] = find(i);
    std::vector<int> labels(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        if (core[i]) labels[i] = static_cast<int>(find(i));
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (core[j] && dist(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= eps) {
                labels[i] = static_cast<int>(find(j));
                break;
            }
    }
    return canon(labels);
}

/// Minimum SSD over every partition of the rows into exactly k non-empty groups.
inline double exhaustive_kmeans_ssd(const Matrix& x, int k, std::vector<int>* best_labels = nullptr) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<int> labels(n, 0);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
        if (i == n) {
            if (used != k) return;
            double ssd = 0.0;
            for (int c = 0; c < k; ++c) {
                Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
                int cnt = 0;
                for (std::size_t p = 0; p < n; ++p)
                    if (labels[p] == c) {
                        mean += x.row(static_cast<Eigen::Index>(p));
                        ++cnt;
                    }
                mean /= cnt;
                for (std::size_t p = 0; p < n; ++p)
                    if (labels[p] == c) ssd += (x.row(static_cast<Eigen::Index>(p)) - mean).squaredNorm();
            }
            if (ssd < best) {
                best = ssd;
                if (best_labels) *best_labels = labels;
            }
            return;
        }
        for (int c = 0; c <= std::min(used, k - 1); ++c) {
            labels[i] = c;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    rec(0, 0);
    return best;
}

/// Mean silhouette straight from the definition.
inline double silhouette(const Matrix& x, const std::vector<int>& labels) {
    double total = 0.0;
    int counted = 0;
    const auto n = static_cast<Eigen::Index>(labels.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] < 0) continue;
        ++counted;
        std::map<int, std::pair<double, int>> per;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i || labels[static_cast<std::size_t>(j)] < 0) continue;
            auto& e = per[labels[static_cast<std::size_t>(j)]];
            e.first += dist(x, i, j);
            e.second += 1;
        }
        const int own = labels[static_cast<std::size_t>(i)];
        if (!per.count(own)) continue;  // singleton
        const double a = per[own].first / per[own].second;
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [c, e] : per)
            if (c != own) b = std::min(b, e.first / e.second);
        total += (b - a) / std::max(a, b);
    }
    return total / counted;
}

/// HDBSCAN* evaluated by brute force: the cluster hierarchy comes from
/// thresholded connectivity of the full mutual-reachability graph (no MST),
/// and the final selection maximizes total stability over every antichain of
/// non-root clusters.
struct BruteHdbscan {
    struct Node {
        std::vector<int> points;
        double birth = 0.0;
        double stability = 0.0;
        int parent = -1;
        std::vector<int> children;
    };
    std::vector<Node> nodes;
    std::vector<int> labels;
};

inline BruteHdbscan hdbscan(const Matrix& x, int mcs) {
    const auto n = static_cast<int>(x.rows());
    std::vector<double> core(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<double> ds;
        for (int j = 0; j < n; ++j) ds.push_back(dist(x, i, j));
        std::sort(ds.begin(), ds.end());
        core[static_cast<std::size_t>(i)] = ds[static_cast<std::size_t>(mcs - 1)];
    }
    auto mr = [&](int i, int j) {
        return std::max({core[static_cast<std::size_t>(i)], core[static_cast<std::size_t>(j)], dist(x, i, j)});
    };
    double min_pos = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && mr(i, j) > 0) min_pos = std::min(min_pos, mr(i, j));
    const double cap = std::isfinite(min_pos) ? 2.0 / min_pos : 1.0;
    auto lam = [&](double w) { return w > 0 ? 1.0 / w : cap; };

    // Components of `pts` using only edges with weight < t.
    auto components = [&](const std::vector<int>& pts, double t) {
        std::vector<std::vector<int>> comps;
        std::set<int> left(pts.begin(), pts.end());
        while (!left.empty()) {
            std::vector<int> comp{*left.begin()};
            left.erase(left.begin());
            for (std::size_t q = 0; q < comp.size(); ++q) {
                for (auto it = left.begin(); it != left.end();) {
                    if (mr(comp[q], *it) < t) {
                        comp.push_back(*it);
                        it = left.erase(it);
                    } else {
                        ++it;
                    }
                }
            }
            std::sort(comp.begin(), comp.end());
            comps.push_back(comp);
        }
        return comps;
    };
    // Smallest threshold t such that `pts` is connected with edges <= t.
    auto connect_level = [&](const std::vector<int>& pts) {
        std::set<double> ws;
        for (int a : pts)
            for (int b : pts)
                if (a < b) ws.insert(mr(a, b));
        for (double w : ws) {
            auto c = components(pts, std::nextafter(w, std::numeric_limits<double>::infinity()));
            if (c.size() == 1) return w;
        }
        return 0.0;
    };

    BruteHdbscan out;
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    out.nodes.push_back({all, 0.0, 0.0, -1, {}});
    // (point set still attached to cluster, cluster id)
    std::vector<std::pair<std::vector<int>, int>> work{{all, 0}};
    while (!work.empty()) {
        auto [pts, cid] = work.back();
        work.pop_back();
        if (pts.size() < 2) {
            // a lone point can only be reached when cluster == point (mcs >= 2 prevents it)
            continue;
        }
        const double w = connect_level(pts);
        const double l = lam(w);
        auto parts = components(pts, w);
        std::vector<std::vector<int>> big;
        for (auto& p : parts)
            if (static_cast<int>(p.size()) >= mcs) big.push_back(p);
        auto& node = out.nodes[static_cast<std::size_t>(cid)];
        const double gain = l - node.birth;
        if (big.size() == 1) {
            node.stability += static_cast<double>(pts.size() - big[0].size()) * gain;
            work.emplace_back(big[0], cid);
            continue;
        }
        node.stability += static_cast<double>(pts.size()) * gain;
        if (big.size() >= 2) {
            for (auto& b : big) {
                out.nodes.push_back({b, l, 0.0, cid, {}});
                const int id = static_cast<int>(out.nodes.size() - 1);
                out.nodes[static_cast<std::size_t>(cid)].children.push_back(id);
                work.emplace_back(b, id);
            }
        }
    }

    // Enumerate antichains of non-root nodes, maximize summed stability.
    const int m = static_cast<int>(out.nodes.size());
    auto is_ancestor = [&](int a, int b) {  // a strict ancestor of b
        for (int p = out.nodes[static_cast<std::size_t>(b)].parent; p != -1; p = out.nodes[static_cast<std::size_t>(p)].parent)
            if (p == a) return true;
        return false;
    };
    std::vector<int> best_set;
    double best = -1.0;
    std::vector<int> cur;
    std::function<void(int, double)> rec = [&](int i, double s) {
        if (i == m) {
            if (s > best + 1e-12) {
                best = s;
                best_set = cur;
            }
            return;
        }
        rec(i + 1, s);
        if (i == 0) return;
        for (int c : cur)
            if (is_ancestor(c, i) || is_ancestor(i, c)) return;
        cur.push_back(i);
        rec(i + 1, s + out.nodes[static_cast<std::size_t>(i)].stability);
        cur.pop_back();
    };
    rec(0, 0.0);

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    for (int c : best_set)
        for (int p : out.nodes[static_cast<std::size_t>(c)].points) labels[static_cast<std::size_t>(p)] = c;
    out.labels = canon(labels);
    return out;
}

/// Knee by explicit perpendicular distance to the normalized chord, computed
/// with the point-to-line formula rather than a vertical offset.
inline std::size_t knee(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double x0 = *std::min_element(xs.begin(), xs.end()), x1 = *std::max_element(xs.begin(), xs.end());
    const double y0 = *std::min_element(ys.begin(), ys.end()), y1 = *std::max_element(ys.begin(), ys.end());
    std::vector<double> nx, ny;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        nx.push_back((xs[i] - x0) / (x1 - x0));
        ny.push_back((ys[i] - y0) / (y1 - y0));
    }
    const double ax = nx.front(), ay = ny.front(), bx = nx.back(), by = ny.back();
    const double len = std::hypot(bx - ax, by - ay);
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < nx.size(); ++i) {
        const double d = std::abs((by - ay) * nx[i] - (bx - ax) * ny[i] + bx * ay - by * ax) / len;
        if (d > best_d + 1e-12) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace oracle
