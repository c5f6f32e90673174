#pragma once

#include <cmath>
#include <vector>

#include "rcc/core/types.hpp"

namespace rcc {

inline double euclidean(const Matrix& x, Eigen::Index i, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double d = x(i, c) - x(j, c);
        s += d * d;
    }
    return std::sqrt(s);
}

/// Dense symmetric N x N Euclidean distance matrix. Each entry is computed
/// once with a fixed summation order, so d(i,j) == d(j,i) bit-for-bit.
class DistanceMatrix {
public:
    explicit DistanceMatrix(const Matrix& x) : n_(static_cast<std::size_t>(x.rows())), d_(n_ * n_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double v = euclidean(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                d_[i * n_ + j] = v;
                d_[j * n_ + i] = v;
            }
        }
    }

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

}  // namespace rcc
