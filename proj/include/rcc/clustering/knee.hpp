#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rcc/error.hpp"

namespace rcc {

struct KneeInput {
    std::vector<double> xs;  // strictly increasing
    std::vector<double> ys;
};

namespace detail {

inline std::vector<double> moving_average(const std::vector<double>& ys, std::size_t window) {
    if (window <= 1) return ys;
    const std::size_t n = ys.size();
    const std::size_t before = (window - 1) / 2;
    const std::size_t after = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= before ? i - before : 0;
        const std::size_t hi = std::min(n - 1, i + after);
        double s = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) s += ys[j];
        out[i] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

inline std::vector<double> min_max(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double range = *hi - *lo;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
    return out;
}

}  // namespace detail

/// Index of the point farthest from the chord joining the first and last
/// points of the min-max normalized curve. Ties (within 1e-12, in normalized
/// units) go to the smallest index.
/// `smoothing` is a centered moving-average window over ys (1 = off).
inline std::size_t knee_point(const KneeInput& c, std::size_t smoothing = 1) {
    const std::size_t n = c.xs.size();
    if (n != c.ys.size() || n < 3) fail(Errc::InvalidArgument, "knee curve needs >= 3 points with matching xs/ys");
    for (std::size_t i = 1; i < n; ++i)
        if (!(c.xs[i] > c.xs[i - 1])) fail(Errc::InvalidArgument, "knee xs must be strictly increasing");
    const auto ys = detail::moving_average(c.ys, smoothing);
    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    if (*lo == *hi) fail(Errc::ConstantCurve, "all curve values are equal");

    const auto xn = detail::min_max(c.xs);
    const auto yn = detail::min_max(ys);
    const double dx = xn.back() - xn.front();
    const double dy = yn.back() - yn.front();
    const double len = std::hypot(dx, dy);

    std::size_t best = 0;
    double best_dist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cross = dx * (yn[i] - yn.front()) - dy * (xn[i] - xn.front());
        const double dist = std::abs(cross) / len;
        if (dist > best_dist + 1e-12) {
            best_dist = dist;
            best = i;
        }
    }
    return best;
}

}  // namespace rcc
