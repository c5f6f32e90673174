#pragma once

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "rcc/core/types.hpp"

namespace rcc {

/// Reduced representation; same ids as the input, d columns.
using Embedding = FeatureMatrix;

struct PcaResult {
    Embedding embedding;
    Matrix components;                            // n_components x M, unit rows
    Eigen::RowVectorXd mean;                      // 1 x M
    std::vector<double> explained_variance_ratio;  // non-increasing, sums to <= 1
};

/// PCA by thin SVD of the mean-centered matrix.
///
/// Component signs are fixed so that each component's largest-magnitude
/// loading is positive (first such loading on ties). Zero-variance input
/// yields zero projections and zero ratios.
inline PcaResult pca_fit_transform(const FeatureMatrix& x, std::size_t n_components) {
    const auto n = static_cast<Eigen::Index>(x.rows());
    const auto m = static_cast<Eigen::Index>(x.cols());
    if (n < 2) fail(Errc::TooFewSamples, "PCA needs at least 2 samples");
    if (n_components < 1 || static_cast<Eigen::Index>(n_components) > std::min(n, m))
        fail(Errc::InvalidArgument, "n_components must lie in [1, min(N, M)]");
    const auto k = static_cast<Eigen::Index>(n_components);

    PcaResult out;
    out.mean = x.values().colwise().mean();
    const Matrix centered = x.values().rowwise() - out.mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(centered), Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Matrix v = svd.matrixV().leftCols(k).transpose();
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::Index arg = 0;
        for (Eigen::Index j = 1; j < m; ++j)
            if (std::abs(v(c, j)) > std::abs(v(c, arg))) arg = j;
        if (v(c, arg) < 0.0) v.row(c) *= -1.0;
    }

    const double total = s.squaredNorm();
    out.explained_variance_ratio.resize(n_components);
    for (Eigen::Index c = 0; c < k; ++c)
        out.explained_variance_ratio[static_cast<std::size_t>(c)] = total > 0.0 ? s(c) * s(c) / total : 0.0;

    Matrix projected = centered * v.transpose();
    if (total == 0.0) projected.setZero();
    out.components = std::move(v);
    out.embedding = Embedding(x.ids(), std::move(projected));
    return out;
}

/// Maps embedded rows back to the input space: mean + projection * components.
inline Matrix pca_reconstruct(const PcaResult& p) {
    return (p.embedding.values() * p.components).rowwise() + p.mean;
}

}  // namespace rcc
