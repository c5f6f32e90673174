#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcc/clustering/assignment.hpp"
#include "rcc/clustering/hac.hpp"
#include "rcc/clustering/knee.hpp"
#include "rcc/core/feature_io.hpp"

namespace rcc {

/// One DNN layer's heatmaps for every image: data is N x (rows * cols), each
/// row a heatmap flattened row-major.
struct HeatmapLayer {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Matrix data;

    Eigen::MatrixXd heatmap(std::size_t image) const {
        Eigen::MatrixXd h(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    data(static_cast<Eigen::Index>(image), static_cast<Eigen::Index>(r * cols + c));
        return h;
    }
};

/// Per-image view: all layers of one image.
struct HeatmapStack {
    std::string image_id;
    std::vector<std::pair<std::string, Eigen::MatrixXd>> layers;
};

class HeatmapCollection {
public:
    HeatmapCollection() = default;

    HeatmapCollection(std::vector<std::string> ids, std::vector<HeatmapLayer> layers)
        : ids_(std::move(ids)), layers_(std::move(layers)) {
        if (ids_.empty()) fail(Errc::InvalidArgument, "heatmap collection has no images");
        for (const auto& l : layers_) {
            if (l.rows == 0 || l.cols == 0) fail(Errc::InvalidArgument, "layer " + l.name + " has zero size");
            if (l.data.rows() != static_cast<Eigen::Index>(ids_.size()) ||
                l.data.cols() != static_cast<Eigen::Index>(l.rows * l.cols))
                fail(Errc::DimensionMismatch, "layer " + l.name + " does not match the image count or its shape");
            if (!l.data.allFinite()) fail(Errc::NonFiniteValue, "layer " + l.name);
        }
    }

    static HeatmapCollection from_stacks(const std::vector<HeatmapStack>& stacks) {
        if (stacks.empty()) fail(Errc::InvalidArgument, "no heatmap stacks");
        std::vector<std::string> ids;
        std::vector<HeatmapLayer> layers;
        for (const auto& [name, m] : stacks.front().layers) {
            HeatmapLayer l{name, static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), {}};
            l.data.resize(static_cast<Eigen::Index>(stacks.size()), m.size());
            layers.push_back(std::move(l));
        }
        for (std::size_t i = 0; i < stacks.size(); ++i) {
            ids.push_back(stacks[i].image_id);
            if (stacks[i].layers.size() != layers.size())
                fail(Errc::DimensionMismatch, "image " + stacks[i].image_id + " has a different layer count");
            for (std::size_t k = 0; k < layers.size(); ++k) {
                const auto& [name, m] = stacks[i].layers[k];
                auto& l = layers[k];
                if (name != l.name || static_cast<std::size_t>(m.rows()) != l.rows ||
                    static_cast<std::size_t>(m.cols()) != l.cols)
                    fail(Errc::DimensionMismatch, "image " + stacks[i].image_id + " layer " + name);
                for (std::size_t r = 0; r < l.rows; ++r)
                    for (std::size_t c = 0; c < l.cols; ++c)
                        l.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r * l.cols + c)) =
                            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
        return HeatmapCollection(std::move(ids), std::move(layers));
    }

    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<HeatmapLayer>& layers() const { return layers_; }

    const HeatmapLayer& layer(const std::string& name) const {
        for (const auto& l : layers_)
            if (l.name == name) return l;
        fail(Errc::LayerNotFound, name);
    }

    HeatmapStack stack(std::size_t image) const {
        HeatmapStack s{ids_.at(image), {}};
        for (const auto& l : layers_) s.layers.emplace_back(l.name, l.heatmap(image));
        return s;
    }

private:
    std::vector<std::string> ids_;
    std::vector<HeatmapLayer> layers_;
};

/// Min-max normalization of one layer with a single min/max taken over every
/// image's entries. A constant layer maps to zeros. Result keeps the
/// N x (rows * cols) flattened layout.
inline Matrix normalize_layer(const HeatmapLayer& layer) {
    const double lo = layer.data.minCoeff();
    const double hi = layer.data.maxCoeff();
    if (hi == lo) return Matrix::Zero(layer.data.rows(), layer.data.cols());
    return (layer.data.array() - lo) / (hi - lo);
}

inline std::vector<Eigen::MatrixXd> normalize_heatmaps(const HeatmapCollection& stacks, const std::string& layer_name) {
    const auto& layer = stacks.layer(layer_name);
    HeatmapLayer normalized{layer.name, layer.rows, layer.cols, normalize_layer(layer)};
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t i = 0; i < stacks.ids().size(); ++i) out.push_back(normalized.heatmap(i));
    return out;
}

/// Frobenius (entry-wise Euclidean) distance between equally shaped heatmaps.
inline double heatmap_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) fail(Errc::DimensionMismatch, "heatmap shapes differ");
    double s = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            const double d = a(r, c) - b(r, c);
            s += d * d;
        }
    return std::sqrt(s);
}

/// Mean pairwise heatmap distance within one cluster; 0 for a singleton.
inline double icd(const std::vector<Eigen::MatrixXd>& members) {
    if (members.size() < 2) return 0.0;
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            sum += heatmap_distance(members[i], members[j]);
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

/// Weighted average intra-cluster distance:
///   (sum_j ICD(C_j) * |C_j| / |C|) / #clusters,  |C| = clustered images.
/// `heatmaps[i]` belongs to assignment row i; noise rows are ignored.
inline double wicd(const ClusterAssignment& assignment, const std::vector<Eigen::MatrixXd>& heatmaps) {
    if (heatmaps.size() != assignment.size()) fail(Errc::InvalidArgument, "heatmaps do not cover the assignment");
    if (assignment.n_clusters() == 0) fail(Errc::EmptyAssignment, "no clusters");
    const auto members = assignment.members();
    std::size_t clustered = 0;
    for (const auto& m : members) clustered += m.size();
    double acc = 0.0;
    for (const auto& m : members) {
        std::vector<Eigen::MatrixXd> cluster;
        cluster.reserve(m.size());
        for (auto i : m) cluster.push_back(heatmaps[i]);
        acc += icd(cluster) * static_cast<double>(m.size()) / static_cast<double>(clustered);
    }
    return acc / static_cast<double>(members.size());
}

struct LayerScore {
    std::string layer;
    std::size_t n_clusters = 0;
    double wicd = 0.0;
};

struct LayerSelection {
    std::string layer;
    FeatureMatrix features;  // normalized heatmaps of the selected layer, flattened row-major
    std::vector<LayerScore> scores;
};

/// Cluster count for one layer: knee of the Ward merge-height curve, where
/// the height at k is the merge that reduced k + 1 clusters to k.
/// Falls back to a single cluster for N < 4 or a flat curve.
inline std::size_t ward_knee_clusters(const WardLinkage& link) {
    const std::size_t n = link.n;
    if (n < 4) return 1;
    KneeInput curve;
    for (std::size_t k = 1; k < n; ++k) {
        curve.xs.push_back(static_cast<double>(k));
        curve.ys.push_back(link.merges[n - 1 - k].cost);
    }
    try {
        return static_cast<std::size_t>(curve.xs[knee_point(curve)]);
    } catch (const Error& e) {
        if (e.code() != Errc::ConstantCurve) throw;
        return 1;
    }
}

/// Picks the layer whose Ward clustering has minimal WICD (ties: earliest).
inline LayerSelection select_layer(const HeatmapCollection& stacks) {
    if (stacks.layers().empty()) fail(Errc::LayerNotFound, "collection has no layers");
    if (stacks.ids().size() < 2) fail(Errc::TooFewSamples, "layer selection needs at least 2 images");
    LayerSelection out;
    std::size_t best = 0;
    std::vector<Matrix> normalized;
    for (std::size_t l = 0; l < stacks.layers().size(); ++l) {
        const auto& layer = stacks.layers()[l];
        normalized.push_back(normalize_layer(layer));
        const auto link = ward_linkage(DistanceMatrix(normalized.back()));
        const std::size_t k = ward_knee_clusters(link);
        const ClusterAssignment a(stacks.ids(), cut_linkage(link, k));
        HeatmapLayer norm_layer{layer.name, layer.rows, layer.cols, normalized.back()};
        std::vector<Eigen::MatrixXd> maps;
        for (std::size_t i = 0; i < stacks.ids().size(); ++i) maps.push_back(norm_layer.heatmap(i));
        out.scores.push_back({layer.name, k, wicd(a, maps)});
        if (out.scores.back().wicd < out.scores[best].wicd) best = l;
    }
    out.layer = out.scores[best].layer;
    out.features = FeatureMatrix(stacks.ids(), normalized[best]);
    return out;
}

// Heatmap index: {"layers":[{"name":..,"rows":R,"cols":C,"file":..}],"ids":[..]}
// Each layer file is a feature matrix (FMX1 or CSV) with one flattened heatmap per image.

inline HeatmapCollection load_heatmaps(const std::filesystem::path& index_path) {
    std::ifstream in(index_path);
    if (!in) fail(Errc::MissingFile, index_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, index_path.string() + ": " + e.what());
    }
    if (!j.contains("layers") || !j.contains("ids")) fail(Errc::ParseError, "heatmap index needs layers and ids");
    const auto ids = j["ids"].get<std::vector<std::string>>();
    std::vector<HeatmapLayer> layers;
    for (const auto& lj : j["layers"]) {
        HeatmapLayer l;
        l.name = lj.at("name").get<std::string>();
        l.rows = lj.at("rows").get<std::size_t>();
        l.cols = lj.at("cols").get<std::size_t>();
        const auto fm = load_feature_matrix(index_path.parent_path() / lj.at("file").get<std::string>());
        if (fm.ids() != ids) fail(Errc::DimensionMismatch, "layer " + l.name + " ids differ from the index");
        l.data = fm.values();
        layers.push_back(std::move(l));
    }
    return HeatmapCollection(ids, std::move(layers));
}

inline void write_heatmaps(const HeatmapCollection& c, const std::filesystem::path& index_path) {
    nlohmann::json j;
    j["ids"] = c.ids();
    j["layers"] = nlohmann::json::array();
    for (const auto& l : c.layers()) {
        const std::string file = l.name + ".fmx";
        write_feature_matrix(FeatureMatrix(c.ids(), l.data), index_path.parent_path() / file, FeatureFormat::Fmx1);
        j["layers"].push_back({{"name", l.name}, {"rows", l.rows}, {"cols", l.cols}, {"file", file}});
    }
    csv::write_text(index_path.string(), j.dump(2) + "\n");
}

}  // namespace rcc
