#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcc/clustering/assignment.hpp"

namespace rcc {

/// Image id -> injected scenario tag ("" for pre-existing / unknown).
using ScenarioMap = std::unordered_map<std::string, std::string>;

struct ClusterScore {
    int cluster_id = 0;
    std::size_t size = 0;
    std::optional<std::string> dominant_scenario;
    std::optional<double> purity;  // empty: no injected image in the cluster

    bool excluded() const { return !purity.has_value(); }
    friend bool operator==(const ClusterScore&, const ClusterScore&) = default;
};

struct PurityResult {
    std::vector<ClusterScore> clusters;
    std::optional<double> avg_purity;  // mean over non-excluded clusters
};

namespace detail {

inline const std::string& tag_of(const ScenarioMap& scenarios, const std::string& id) {
    const auto it = scenarios.find(id);
    if (it == scenarios.end()) fail(Errc::InvalidArgument, "no scenario entry for image " + id);
    return it->second;
}

// Per cluster: tag -> count over injected images only (noise skipped).
inline std::vector<std::map<std::string, std::size_t>> tag_counts(const ClusterAssignment& a,
                                                                  const ScenarioMap& scenarios) {
    std::vector<std::map<std::string, std::size_t>> counts(static_cast<std::size_t>(a.n_clusters()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& tag = tag_of(scenarios, a.ids()[i]);
        if (a.labels()[i] < 0 || tag.empty()) continue;
        ++counts[static_cast<std::size_t>(a.labels()[i])][tag];
    }
    return counts;
}

inline std::vector<std::size_t> cluster_sizes(const ClusterAssignment& a) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(a.n_clusters()), 0);
    for (int l : a.labels())
        if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

}  // namespace detail

/// Purity of a cluster: the largest share of its images carrying one injected
/// tag. Untagged images count in the denominator; clusters without any
/// injected image are excluded. Noise is ignored.
inline PurityResult cluster_purity(const ClusterAssignment& a, const ScenarioMap& scenarios) {
    if (a.n_clusters() == 0) fail(Errc::NoClusters, "assignment has no clusters");
    const auto counts = detail::tag_counts(a, scenarios);
    const auto sizes = detail::cluster_sizes(a);
    PurityResult out;
    double sum = 0.0;
    std::size_t scored = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        ClusterScore s;
        s.cluster_id = static_cast<int>(c);
        s.size = sizes[c];
        std::size_t top = 0;
        for (const auto& [tag, n] : counts[c]) {
            if (n > top) {  // map order: ties keep the lexicographically smallest tag
                top = n;
                s.dominant_scenario = tag;
            }
        }
        if (top > 0) {
            s.purity = static_cast<double>(top) / static_cast<double>(sizes[c]);
            sum += *s.purity;
            ++scored;
        }
        out.clusters.push_back(std::move(s));
    }
    if (scored > 0) out.avg_purity = sum / static_cast<double>(scored);
    return out;
}

struct CoverageResult {
    std::vector<std::string> scenarios;  // every injected tag in the ground truth, sorted
    std::vector<std::string> covered;    // sorted
    double coverage_pct = 0.0;           // in [0, 1]
};

/// A scenario is covered when some cluster has at least `threshold` of its
/// images tagged with it.
inline CoverageResult scenario_coverage(const ClusterAssignment& a, const ScenarioMap& scenarios,
                                        double threshold = 0.9) {
    if (!(threshold > 0.0 && threshold <= 1.0)) fail(Errc::InvalidArgument, "coverage threshold must lie in (0, 1]");
    std::set<std::string> all;
    for (const auto& id : a.ids()) {
        const auto& tag = detail::tag_of(scenarios, id);
        if (!tag.empty()) all.insert(tag);
    }
    if (all.empty()) fail(Errc::NoScenarios, "no injected scenario in the ground truth");
    const auto counts = detail::tag_counts(a, scenarios);
    const auto sizes = detail::cluster_sizes(a);
    std::set<std::string> covered;
    for (std::size_t c = 0; c < sizes.size(); ++c)
        for (const auto& [tag, n] : counts[c])
            if (static_cast<double>(n) / static_cast<double>(sizes[c]) >= threshold) covered.insert(tag);
    CoverageResult out;
    out.scenarios.assign(all.begin(), all.end());
    out.covered.assign(covered.begin(), covered.end());
    out.coverage_pct = static_cast<double>(covered.size()) / static_cast<double>(all.size());
    return out;
}

/// Clusters produced per covered scenario.
inline double redundancy_ratio(std::size_t n_clusters, std::size_t n_covered) {
    if (n_covered == 0) fail(Errc::NothingCovered, "no scenario is covered");
    return static_cast<double>(n_clusters) / static_cast<double>(n_covered);
}

/// Inspection effort saved relative to viewing every image.
inline double savings(std::size_t n_clusters, std::size_t n_images) {
    if (n_images == 0) fail(Errc::InvalidArgument, "savings needs at least one image");
    return 1.0 - static_cast<double>(n_clusters) / static_cast<double>(n_images);
}

struct FrequencySet {
    std::string name;
    std::map<std::string, std::size_t> counts;  // scenario -> images
    std::size_t total = 0;
};

struct FrequencyInstance {
    std::string set;
    std::string scenario;
    double proportion = 0.0;
    bool frequent = true;
};

struct FrequencyClassification {
    double median = 0.0;
    std::vector<FrequencyInstance> instances;
};

/// Proportion of each (set, scenario) instance, split at `median`, or at the
/// median of all proportions when none is given. Strictly below is infrequent.
inline FrequencyClassification classify_frequency(const std::vector<FrequencySet>& sets,
                                                  std::optional<double> median = std::nullopt) {
    if (sets.empty()) fail(Errc::InvalidArgument, "no failure-inducing sets");
    FrequencyClassification out;
    std::vector<double> props;
    for (const auto& s : sets) {
        if (s.total == 0) fail(Errc::InvalidArgument, "set " + s.name + " is empty");
        for (const auto& [scenario, n] : s.counts) {
            const double p = static_cast<double>(n) / static_cast<double>(s.total);
            out.instances.push_back({s.name, scenario, p, true});
            props.push_back(p);
        }
    }
    if (props.empty()) fail(Errc::NoScenarios, "no scenario instances");
    std::sort(props.begin(), props.end());
    const std::size_t mid = props.size() / 2;
    out.median = median ? *median : props.size() % 2 ? props[mid] : (props[mid - 1] + props[mid]) / 2.0;
    for (auto& inst : out.instances) inst.frequent = !(inst.proportion < out.median);
    return out;
}

struct EvaluationReport {
    std::vector<ClusterScore> clusters;
    std::optional<double> avg_purity;
    std::vector<std::string> scenarios;
    std::vector<std::string> covered_scenarios;
    double coverage_pct = 0.0;
    std::optional<double> redundancy_ratio;  // empty when nothing is covered
    double savings = 0.0;
    std::size_t n_images = 0;
    std::size_t n_clusters = 0;
    std::size_t n_noise = 0;
    std::map<std::string, double> scenario_frequencies;  // share of all images per injected tag

    friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

inline EvaluationReport evaluate(const ClusterAssignment& a, const ScenarioMap& scenarios,
                                 double coverage_threshold = 0.9) {
    EvaluationReport r;
    r.n_images = a.size();
    r.n_clusters = static_cast<std::size_t>(a.n_clusters());
    r.n_noise = a.n_noise();
    auto purity = cluster_purity(a, scenarios);
    r.clusters = std::move(purity.clusters);
    r.avg_purity = purity.avg_purity;
    const auto cov = scenario_coverage(a, scenarios, coverage_threshold);
    r.scenarios = cov.scenarios;
    r.covered_scenarios = cov.covered;
    r.coverage_pct = cov.coverage_pct;
    if (!cov.covered.empty()) r.redundancy_ratio = redundancy_ratio(r.n_clusters, cov.covered.size());
    r.savings = savings(r.n_clusters, r.n_images);
    std::map<std::string, std::size_t> tally;
    for (const auto& id : a.ids()) {
        const auto& tag = detail::tag_of(scenarios, id);
        if (!tag.empty()) ++tally[tag];
    }
    for (const auto& [tag, n] : tally)
        r.scenario_frequencies[tag] = static_cast<double>(n) / static_cast<double>(r.n_images);
    return r;
}

// JSON mapping. Optional values serialize as null.

namespace detail {

template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> opt_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const ClusterScore& s) {
    j = {{"cluster", s.cluster_id},
         {"size", s.size},
         {"dominant_scenario", detail::opt_json(s.dominant_scenario)},
         {"purity", detail::opt_json(s.purity)}};
}

inline void from_json(const nlohmann::json& j, ClusterScore& s) {
    s.cluster_id = j.at("cluster").get<int>();
    s.size = j.at("size").get<std::size_t>();
    s.dominant_scenario = detail::opt_from<std::string>(j.at("dominant_scenario"));
    s.purity = detail::opt_from<double>(j.at("purity"));
}

inline void to_json(nlohmann::json& j, const EvaluationReport& r) {
    j = {{"n_images", r.n_images},
         {"n_clusters", r.n_clusters},
         {"n_noise", r.n_noise},
         {"avg_purity", detail::opt_json(r.avg_purity)},
         {"scenarios", r.scenarios},
         {"covered_scenarios", r.covered_scenarios},
         {"coverage_pct", r.coverage_pct},
         {"redundancy_ratio", detail::opt_json(r.redundancy_ratio)},
         {"savings", r.savings},
         {"scenario_frequencies", r.scenario_frequencies},
         {"clusters", r.clusters}};
}

inline void from_json(const nlohmann::json& j, EvaluationReport& r) {
    r.n_images = j.at("n_images").get<std::size_t>();
    r.n_clusters = j.at("n_clusters").get<std::size_t>();
    r.n_noise = j.at("n_noise").get<std::size_t>();
    r.avg_purity = detail::opt_from<double>(j.at("avg_purity"));
    r.scenarios = j.at("scenarios").get<std::vector<std::string>>();
    r.covered_scenarios = j.at("covered_scenarios").get<std::vector<std::string>>();
    r.coverage_pct = j.at("coverage_pct").get<double>();
    r.redundancy_ratio = detail::opt_from<double>(j.at("redundancy_ratio"));
    r.savings = j.at("savings").get<double>();
    r.scenario_frequencies = j.at("scenario_frequencies").get<std::map<std::string, double>>();
    r.clusters = j.at("clusters").get<std::vector<ClusterScore>>();
}

}  // namespace rcc
