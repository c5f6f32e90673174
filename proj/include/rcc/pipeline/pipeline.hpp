#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rcc/clustering/assignment.hpp"
#include "rcc/clustering/dbscan.hpp"
#include "rcc/clustering/hdbscan.hpp"
#include "rcc/clustering/kmeans.hpp"
#include "rcc/clustering/selection.hpp"
#include "rcc/core/feature_io.hpp"
#include "rcc/core/labeling.hpp"
#include "rcc/dimred/pca.hpp"
#include "rcc/dimred/umap.hpp"
#include "rcc/faultgen/image_io.hpp"
#include "rcc/faultgen/transforms.hpp"
#include "rcc/heatmap/heatmap.hpp"
#include "rcc/metrics/metrics.hpp"
#include "rcc/random.hpp"

namespace rcc {

// ---------------------------------------------------------------- sources

/// Where a pipeline's features come from.
struct FeatureSource {
    enum class Kind { Provided, File, Heatmaps, RawPixels };
    Kind kind = Kind::Provided;
    std::string name;             // report label
    std::filesystem::path path;   // File: feature matrix; Heatmaps: heatmap index
    std::filesystem::path image_root;  // RawPixels: directory the manifest paths are relative to
    int raw_side = 32;            // RawPixels: downscaled square side

    static FeatureSource provided(std::string name) { return {Kind::Provided, std::move(name), {}, {}, 32}; }
    static FeatureSource file(const std::filesystem::path& p) { return {Kind::File, p.stem().string(), p, {}, 32}; }
    static FeatureSource heatmaps(const std::filesystem::path& p) {
        return {Kind::Heatmaps, "hudd_" + p.stem().string(), p, {}, 32};
    }
    static FeatureSource raw_pixels(const std::filesystem::path& root, int side) {
        return {Kind::RawPixels, "raw" + std::to_string(side), {}, root, side};
    }
};

/// Center square crop, grayscale (Rec. 601 luma), bilinear downscale to
/// side x side, flattened row-major in [0, 1].
inline std::vector<double> raw_pixel_features(const Raster& img, int side) {
    if (side < 1) fail(Errc::InvalidArgument, "raw pixel side must be >= 1");
    const int m = std::min(img.width, img.height);
    const int x0 = (img.width - m) / 2, y0 = (img.height - m) / 2;
    Raster crop(m, m);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x)
            for (int c = 0; c < 3; ++c) crop.at(x, y, c) = img.at(x + x0, y + y0, c);
    const Raster small = resize_bilinear(crop, side, side);
    std::vector<double> out(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            out[static_cast<std::size_t>(y * side + x)] =
                (0.299 * small.at(x, y, 0) + 0.587 * small.at(x, y, 1) + 0.114 * small.at(x, y, 2)) / 255.0;
    return out;
}

/// Features for `records`, in record order. Provided sources cannot be resolved here.
inline FeatureMatrix resolve_features(const FeatureSource& src, const Dataset& records) {
    std::vector<std::string> ids;
    for (const auto& r : records.records()) ids.push_back(r.id);
    switch (src.kind) {
        case FeatureSource::Kind::File: return load_feature_matrix(src.path).select(ids);
        case FeatureSource::Kind::Heatmaps: return select_layer(load_heatmaps(src.path)).features.select(ids);
        case FeatureSource::Kind::RawPixels: {
            const auto n = static_cast<Eigen::Index>(ids.size());
            Matrix m(n, static_cast<Eigen::Index>(src.raw_side) * src.raw_side);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& r = records.records()[static_cast<std::size_t>(i)];
                if (r.path.empty()) fail(Errc::InvalidArgument, "record " + r.id + " has no image path");
                const auto v = raw_pixel_features(load_image(src.image_root / r.path), src.raw_side);
                m.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
            }
            return FeatureMatrix(ids, std::move(m));
        }
        case FeatureSource::Kind::Provided: break;
    }
    fail(Errc::InvalidArgument, "source " + src.name + " has in-memory features only");
}

// ---------------------------------------------------------------- spec

enum class DimRed { None, Pca, Umap };
enum class Clusterer { KMeansAuto, DbscanAuto, Hdbscan };

inline const char* dimred_name(DimRed d) {
    switch (d) {
        case DimRed::None: return "none";
        case DimRed::Pca: return "pca";
        case DimRed::Umap: return "umap";
    }
    return "?";
}

inline const char* clusterer_name(Clusterer c) {
    switch (c) {
        case Clusterer::KMeansAuto: return "kmeans";
        case Clusterer::DbscanAuto: return "dbscan";
        case Clusterer::Hdbscan: return "hdbscan";
    }
    return "?";
}

inline DimRed parse_dimred(const std::string& s) {
    if (s == "none") return DimRed::None;
    if (s == "pca") return DimRed::Pca;
    if (s == "umap") return DimRed::Umap;
    fail(Errc::InvalidArgument, "unknown dimensionality reduction: " + s);
}

inline Clusterer parse_clusterer(const std::string& s) {
    if (s == "kmeans") return Clusterer::KMeansAuto;
    if (s == "dbscan") return Clusterer::DbscanAuto;
    if (s == "hdbscan") return Clusterer::Hdbscan;
    fail(Errc::InvalidArgument, "unknown clustering algorithm: " + s);
}

struct PipelineSpec {
    std::string source = "features";  // label of the feature source
    DimRed dimred = DimRed::None;
    Clusterer clusterer = Clusterer::DbscanAuto;
    std::uint64_t seed = 0;

    std::size_t pca_components = 10;
    UmapParams umap{};                   // seed is overridden by the cell seed
    KRange k_range{5, 35};
    MinPtsRange min_pts_range{3, 20};
    int min_cluster_size = 5;
    double coverage_threshold = 0.9;

    friend bool operator==(const PipelineSpec& a, const PipelineSpec& b) {
        return a.source == b.source && a.dimred == b.dimred && a.clusterer == b.clusterer && a.seed == b.seed;
    }
};

/// Values picked by the auto-selection routines and the clamped stage sizes.
struct Tuning {
    std::optional<int> pca_components;
    std::optional<int> umap_neighbors;
    std::optional<int> k;
    std::optional<double> eps;
    std::optional<int> min_pts;

    friend bool operator==(const Tuning&, const Tuning&) = default;
};

struct PipelineResult {
    PipelineSpec spec;
    std::optional<ClusterAssignment> assignment;
    std::optional<EvaluationReport> report;
    Tuning tuning;
    std::string error;                         // empty on success
    std::string failed_stage;
    std::vector<std::pair<std::string, double>> timings;  // stage -> seconds, wall clock

    bool ok() const { return error.empty(); }

    /// Equality of everything except wall-clock timings.
    bool same_outcome(const PipelineResult& o) const {
        return spec == o.spec && assignment == o.assignment && report == o.report && tuning == o.tuning &&
               error == o.error && failed_stage == o.failed_stage;
    }
};

// ---------------------------------------------------------------- stages

namespace detail {

template <class F>
auto timed_stage(const std::string& stage, PipelineResult& res, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            res.timings.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        } else {
            auto out = f();
            res.timings.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            return out;
        }
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e.code(), e.what());
    }
}

inline ScenarioMap scenario_map(const Dataset& d) {
    ScenarioMap m;
    for (const auto& r : d.records()) m[r.id] = r.scenario;
    return m;
}

}  // namespace detail

/// Reduces `x` according to the spec; records the clamped sizes in `t`.
inline FeatureMatrix reduce(const FeatureMatrix& x, const PipelineSpec& spec, Tuning& t) {
    switch (spec.dimred) {
        case DimRed::None: return x;
        case DimRed::Pca: {
            const std::size_t n = std::min({spec.pca_components, x.rows(), x.cols()});
            t.pca_components = static_cast<int>(n);
            return pca_fit_transform(x, n).embedding;
        }
        case DimRed::Umap: {
            UmapParams p = spec.umap;
            p.seed = sub_seed(spec.seed, 1);
            p.n_neighbors = std::min(p.n_neighbors, static_cast<int>(x.rows()) - 1);
            t.umap_neighbors = p.n_neighbors;
            return umap_fit_transform(x, p);
        }
    }
    return x;
}

/// Runs the chosen clusterer with its self-tuning routine.
inline ClusterAssignment cluster(const FeatureMatrix& x, const PipelineSpec& spec, Tuning& t) {
    switch (spec.clusterer) {
        case Clusterer::KMeansAuto: {
            // The upper end cannot exceed the number of distinct points.
            KRange r = spec.k_range;
            r.hi = std::min<int>(r.hi, static_cast<int>(detail::count_distinct_rows(x.values())));
            if (r.hi < r.lo) fail(Errc::KTooLarge, "fewer distinct points than the smallest candidate k");
            const std::uint64_t seed = sub_seed(spec.seed, 2);
            const int k = select_k(x.values(), r, seed);
            t.k = k;
            return kmeans(x, k, seed);
        }
        case Clusterer::DbscanAuto: {
            const DistanceMatrix d(x.values());
            const double eps = select_eps(d);
            const auto sel = select_min_pts(d, eps, spec.min_pts_range);
            t.eps = eps;
            t.min_pts = sel.min_pts;
            return ClusterAssignment(x.ids(), canonical_labels(sel.labels));
        }
        case Clusterer::Hdbscan: return hdbscan(x, spec.min_cluster_size);
    }
    fail(Errc::InvalidArgument, "unknown clusterer");
}

/// Dimensionality reduction, clustering and scoring of one failure set.
/// Stage errors are rethrown as StageError carrying the stage name.
inline PipelineResult run_pipeline(const PipelineSpec& spec, const FailureSet& fs) {
    if (fs.dataset.empty() || fs.features.rows() == 0) fail(Errc::InvalidArgument, "failure set is empty");
    if (fs.features.ids() != fs.ids()) fail(Errc::InvalidArgument, "features are not aligned with the failure set");
    PipelineResult res;
    res.spec = spec;
    const FeatureMatrix reduced = detail::timed_stage("dimred", res, [&] { return reduce(fs.features, spec, res.tuning); });
    res.assignment = detail::timed_stage("cluster", res, [&] { return cluster(reduced, spec, res.tuning); });
    res.report = detail::timed_stage("evaluate", res, [&] {
        return evaluate(*res.assignment, detail::scenario_map(fs.dataset), spec.coverage_threshold);
    });
    return res;
}

}  // namespace rcc
