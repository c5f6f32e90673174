#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "rcc/clustering/distance.hpp"
#include "rcc/dimred/pca.hpp"
#include "rcc/random.hpp"

namespace rcc {

struct UmapParams {
    int n_neighbors = 15;
    double min_dist = 0.1;
    int n_epochs = 200;
    int n_components = 2;
    std::uint64_t seed = 0;
    double spread = 1.0;
    int negative_sample_rate = 5;
    double learning_rate = 1.0;
};

struct UmapCurve {
    double a = 0.0;
    double b = 0.0;
};

/// Samples used to fit the low-dimensional similarity curve: x on
/// [0, 3 * spread] (300 points) and the target offset kernel
/// 1 for x < min_dist, exp(-(x - min_dist) / spread) beyond it.
inline std::pair<std::vector<double>, std::vector<double>> umap_curve_targets(double min_dist, double spread) {
    constexpr int samples = 300;
    std::vector<double> xs(samples), ys(samples);
    for (int i = 0; i < samples; ++i) {
        xs[static_cast<std::size_t>(i)] = 3.0 * spread * i / (samples - 1);
        const double x = xs[static_cast<std::size_t>(i)];
        ys[static_cast<std::size_t>(i)] = x < min_dist ? 1.0 : std::exp(-(x - min_dist) / spread);
    }
    return {xs, ys};
}

inline double umap_curve_residual(const UmapCurve& c, double min_dist, double spread) {
    const auto [xs, ys] = umap_curve_targets(min_dist, spread);
    double r = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = 1.0 / (1.0 + c.a * std::pow(xs[i], 2.0 * c.b)) - ys[i];
        r += e * e;
    }
    return r;
}

/// Least-squares fit of 1 / (1 + a x^(2b)) to the offset kernel
/// (Levenberg-Marquardt from a = b = 1).
inline UmapCurve fit_umap_curve(double min_dist, double spread = 1.0) {
    const auto [xs, ys] = umap_curve_targets(min_dist, spread);
    double a = 1.0, b = 1.0, damping = 1e-3;
    auto cost = [&](double ca, double cb) {
        double r = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = 1.0 / (1.0 + ca * std::pow(xs[i], 2.0 * cb)) - ys[i];
            r += e * e;
        }
        return r;
    };
    double current = cost(a, b);
    for (int iter = 0; iter < 500; ++iter) {
        double jtj00 = 0, jtj01 = 0, jtj11 = 0, g0 = 0, g1 = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            if (x <= 0.0) continue;  // model is 1 at x = 0 regardless of (a, b)
            const double u = std::pow(x, 2.0 * b);
            const double g = 1.0 / (1.0 + a * u);
            const double e = g - ys[i];
            const double da = -u * g * g;
            const double db = -a * u * 2.0 * std::log(x) * g * g;
            jtj00 += da * da;
            jtj01 += da * db;
            jtj11 += db * db;
            g0 += da * e;
            g1 += db * e;
        }
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries) {
            const double m00 = jtj00 * (1.0 + damping), m11 = jtj11 * (1.0 + damping);
            const double det = m00 * m11 - jtj01 * jtj01;
            const double step_a = -(m11 * g0 - jtj01 * g1) / det;
            const double step_b = -(m00 * g1 - jtj01 * g0) / det;
            const double na = a + step_a, nb = b + step_b;
            const double trial = (na > 0.0 && nb > 0.0) ? cost(na, nb) : current + 1.0;
            if (trial < current) {
                const double rel = (current - trial) / std::max(current, 1e-300);
                a = na;
                b = nb;
                current = trial;
                damping = std::max(damping * 0.3, 1e-12);
                improved = true;
                if (rel < 1e-14) return {a, b};
            } else {
                damping *= 10.0;
            }
        }
        if (!improved) break;
    }
    return {a, b};
}

struct FuzzyEdge {
    std::size_t i, j;  // i < j
    double weight;
};

struct UmapGraph {
    std::vector<std::vector<std::size_t>> knn;  // per point, excluding itself
    std::vector<double> rho, sigma;
    std::vector<FuzzyEdge> edges;               // symmetrized, sorted by (i, j)
};

/// Exact k-NN (ties by index), per-point rho/sigma calibration and fuzzy union
/// w = a + b - a*b of the directed memberships.
inline UmapGraph umap_graph(const DistanceMatrix& d, int n_neighbors) {
    const std::size_t n = d.size();
    const auto k = static_cast<std::size_t>(n_neighbors);
    UmapGraph g;
    g.knn.resize(n);
    g.rho.resize(n);
    g.sigma.resize(n);
    const double target = std::log2(static_cast<double>(k));
    std::map<std::pair<std::size_t, std::size_t>, double> directed;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k + 1), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (a == i || b == i) return a == i && b != i;  // self first
                              if (d(i, a) != d(i, b)) return d(i, a) < d(i, b);
                              return a < b;
                          });
        g.knn[i].assign(order.begin() + 1, order.begin() + static_cast<std::ptrdiff_t>(k + 1));
        const double rho = d(i, g.knn[i].front());
        auto mass = [&](double sigma) {
            double s = 0.0;
            for (auto j : g.knn[i]) s += std::exp(-std::max(0.0, d(i, j) - rho) / sigma);
            return s;
        };
        double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
        for (int it = 0; it < 64; ++it) {
            const double s = mass(mid);
            if (std::abs(s - target) < 1e-5) break;
            if (s > target) {
                hi = mid;
                mid = (lo + hi) / 2.0;
            } else {
                lo = mid;
                mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
            }
        }
        g.rho[i] = rho;
        g.sigma[i] = mid;
        for (auto j : g.knn[i]) directed[{i, j}] = std::exp(-std::max(0.0, d(i, j) - rho) / mid);
    }
    std::map<std::pair<std::size_t, std::size_t>, double> sym;
    for (const auto& [key, w] : directed) {
        const auto [i, j] = key;
        const auto lo = std::min(i, j), hi = std::max(i, j);
        if (sym.count({lo, hi})) continue;
        const auto fwd = directed.find({lo, hi});
        const auto bwd = directed.find({hi, lo});
        const double a = fwd == directed.end() ? 0.0 : fwd->second;
        const double b = bwd == directed.end() ? 0.0 : bwd->second;
        sym[{lo, hi}] = a + b - a * b;
    }
    for (const auto& [key, w] : sym)
        if (w > 0.0) g.edges.push_back({key.first, key.second, w});
    return g;
}

/// UMAP embedding with uniform random initialization in [-10, 10]^d and
/// stochastic attraction/repulsion with negative sampling. Deterministic for
/// a fixed (input, params) pair.
inline Embedding umap_fit_transform(const FeatureMatrix& x, const UmapParams& p) {
    const std::size_t n = x.rows();
    if (p.n_neighbors < 2) fail(Errc::InvalidArgument, "n_neighbors must be >= 2");
    if (n <= static_cast<std::size_t>(p.n_neighbors))
        fail(Errc::TooFewSamples, "UMAP needs N > n_neighbors (N=" + std::to_string(n) + ")");
    if (!(p.min_dist > 0.0 && p.min_dist <= 1.0)) fail(Errc::InvalidArgument, "min_dist must lie in (0, 1]");
    if (p.n_epochs < 1 || p.n_components < 1) fail(Errc::InvalidArgument, "n_epochs and n_components must be >= 1");

    const DistanceMatrix d(x.values());
    bool any_positive = false;
    for (std::size_t i = 0; i < n && !any_positive; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (d(i, j) > 0.0) {
                any_positive = true;
                break;
            }
    if (!any_positive) fail(Errc::DegenerateDistances, "all pairwise distances are zero");

    const auto graph = umap_graph(d, p.n_neighbors);
    const auto curve = fit_umap_curve(p.min_dist, p.spread);
    const double a = curve.a, b = curve.b;
    const auto dim = static_cast<Eigen::Index>(p.n_components);

    Matrix y(static_cast<Eigen::Index>(n), dim);
    Rng init_rng(sub_seed(p.seed, 0));
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index c = 0; c < dim; ++c) y(i, c) = init_rng.uniform(-10.0, 10.0);

    // Both directions of every edge, each moving head and tail.
    struct Directed {
        std::size_t head, tail;
        double epochs_per_sample;
    };
    double max_w = 0.0;
    for (const auto& e : graph.edges) max_w = std::max(max_w, e.weight);
    std::vector<Directed> edges;
    for (const auto& e : graph.edges) {
        if (e.weight < max_w / p.n_epochs) continue;
        edges.push_back({e.i, e.j, max_w / e.weight});
        edges.push_back({e.j, e.i, max_w / e.weight});
    }
    std::sort(edges.begin(), edges.end(), [](const Directed& l, const Directed& r) {
        return l.head != r.head ? l.head < r.head : l.tail < r.tail;
    });

    const std::size_t m = edges.size();
    std::vector<double> next_sample(m), neg_period(m), next_neg(m);
    for (std::size_t e = 0; e < m; ++e) {
        next_sample[e] = edges[e].epochs_per_sample;
        neg_period[e] = edges[e].epochs_per_sample / p.negative_sample_rate;
        next_neg[e] = neg_period[e];
    }
    auto clip = [](double v) { return std::clamp(v, -4.0, 4.0); };
    Rng rng(sub_seed(p.seed, 1));

    for (int epoch = 0; epoch < p.n_epochs; ++epoch) {
        const double alpha = p.learning_rate * (1.0 - static_cast<double>(epoch) / p.n_epochs);
        const auto ep = static_cast<double>(epoch);
        for (std::size_t e = 0; e < m; ++e) {
            if (next_sample[e] > ep) continue;
            const auto j = static_cast<Eigen::Index>(edges[e].head);
            const auto k = static_cast<Eigen::Index>(edges[e].tail);
            double dist2 = (y.row(j) - y.row(k)).squaredNorm();
            double coef = 0.0;
            if (dist2 > 0.0) coef = -2.0 * a * b * std::pow(dist2, b - 1.0) / (a * std::pow(dist2, b) + 1.0);
            for (Eigen::Index c = 0; c < dim; ++c) {
                const double grad = clip(coef * (y(j, c) - y(k, c)));
                y(j, c) += grad * alpha;
                y(k, c) -= grad * alpha;
            }
            next_sample[e] += edges[e].epochs_per_sample;

            const int n_neg = std::max(0, static_cast<int>((ep - next_neg[e]) / neg_period[e]));
            for (int s = 0; s < n_neg; ++s) {
                const auto other = static_cast<Eigen::Index>(rng.below(n));
                dist2 = (y.row(j) - y.row(other)).squaredNorm();
                if (dist2 > 0.0) {
                    coef = 2.0 * b / ((0.001 + dist2) * (a * std::pow(dist2, b) + 1.0));
                } else if (j == other) {
                    continue;
                } else {
                    coef = 0.0;
                }
                for (Eigen::Index c = 0; c < dim; ++c) {
                    const double grad = coef > 0.0 ? clip(coef * (y(j, c) - y(other, c))) : 4.0;
                    y(j, c) += grad * alpha;
                }
            }
            next_neg[e] += n_neg * neg_period[e];
        }
    }
    return Embedding(x.ids(), std::move(y));
}

}  // namespace rcc
