// rcc: command-line front end for failure-corpus injection, clustering
// pipelines and their evaluation.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rcc/core/manifest.hpp"
#include "rcc/faultgen/corpus.hpp"
#include "rcc/pipeline/grid.hpp"
#include "rcc/pipeline/report.hpp"

namespace fs = std::filesystem;
using namespace rcc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitStage = 4;

// INI/TOML through CLI11, or a JSON object whose nested objects are
// subcommand sections: {"seed": 3, "grid": {"jobs": 8}}.
class JsonOrIniConfig : public CLI::ConfigBase {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream again(text);
            return CLI::ConfigBase::from_config(again);
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }

    static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, v] : obj.items()) {
            if (v.is_object()) {
                auto p = parents;
                p.push_back(key);
                flatten(v, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (v.is_array())
                for (const auto& e : v) item.inputs.push_back(scalar(e));
            else
                item.inputs.push_back(scalar(v));
            out.push_back(std::move(item));
        }
    }
};

ScenarioMap scenarios_of(const Dataset& d) {
    ScenarioMap m;
    for (const auto& r : d.records()) m[r.id] = r.scenario;
    return m;
}

// "raw:<side>" selects downscaled pixels of the manifest images; anything
// else is a feature matrix file.
FeatureSource parse_source(const std::string& token, const fs::path& images) {
    if (token.rfind("raw:", 0) == 0) {
        int side = 0;
        try {
            side = std::stoi(token.substr(4));
        } catch (const std::exception&) {
            fail(Errc::InvalidArgument, "bad raw pixel source: " + token);
        }
        if (images.empty()) fail(Errc::InvalidArgument, "raw pixel sources need --images");
        return FeatureSource::raw_pixels(images, side);
    }
    return FeatureSource::file(token);
}

Dataset failing_records(const fs::path& manifest) {
    const Dataset d = load_manifest(manifest);
    const auto failing = label_failures(d);
    if (failing.empty()) fail(Errc::InvalidArgument, "manifest has no failure-inducing images");
    return d.subset(failing);
}

struct Args {
    // shared
    std::string manifest;
    std::uint64_t seed = 0;
    std::string out;
    // inject
    std::string images, keypoints, plan;
    // cluster / grid
    std::vector<std::string> features;
    std::vector<std::string> heatmaps;
    std::string dimred = "umap", algo = "dbscan";
    int jobs = 1;
    double coverage_threshold = 0.9;
    // evaluate / report
    std::string assignment, in, format = "csv";
};

int run_inject(const Args& a) {
    const Dataset d = load_manifest(a.manifest);
    const auto plan = load_plan(a.plan);
    const auto kp = a.keypoints.empty() ? std::map<std::string, KeypointSet>{} : load_keypoints(a.keypoints);
    const fs::path plan_dir = fs::path(a.plan).parent_path();
    const Dataset out = build_failure_corpus(d, kp, plan, {a.images, a.out, plan_dir});
    std::cout << "injected " << out.size() << " images into " << a.out << "\n";
    return kExitOk;
}

int run_cluster(const Args& a) {
    if (a.features.size() + a.heatmaps.size() != 1)
        fail(Errc::InvalidArgument, "cluster takes exactly one of --features or --heatmaps");
    const Dataset failures = failing_records(a.manifest);
    const FeatureSource src = a.heatmaps.empty() ? parse_source(a.features[0], a.images)
                                                 : FeatureSource::heatmaps(a.heatmaps[0]);
    FeatureMatrix features;
    try {
        features = resolve_features(src, failures);
    } catch (const Error& e) {
        throw StageError("features", e.code(), e.what());
    }
    PipelineSpec spec;
    spec.source = src.name;
    spec.dimred = parse_dimred(a.dimred);
    spec.clusterer = parse_clusterer(a.algo);
    spec.seed = a.seed;
    spec.coverage_threshold = a.coverage_threshold;
    const auto res = run_pipeline(spec, FailureSet{failures, std::move(features)});
    if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
    write_assignment(*res.assignment, a.out);
    std::cout << res.assignment->n_clusters() << " clusters, " << res.assignment->n_noise() << " noise, written to "
              << a.out << "\n";
    return kExitOk;
}

int run_grid_cmd(const Args& a) {
    if (a.features.empty() && a.heatmaps.empty()) fail(Errc::InvalidArgument, "grid needs --features or --heatmaps");
    const Dataset failures = failing_records(a.manifest);
    std::vector<GridSource> sources;
    for (const auto& f : a.features) sources.push_back({parse_source(f, a.images), std::nullopt});
    for (const auto& h : a.heatmaps) sources.push_back({FeatureSource::heatmaps(h), std::nullopt});
    GridOptions opt;
    opt.seed = a.seed;
    opt.jobs = a.jobs;
    opt.base.coverage_threshold = a.coverage_threshold;
    const auto results = run_grid(sources, failures, opt);
    write_grid_outputs(results, a.out);
    std::size_t failed = 0;
    for (const auto& r : results) failed += !r.ok();
    std::cout << results.size() << " pipelines, " << failed << " failed, results in " << a.out << "\n";
    if (const auto* best = best_cell(results))
        std::cout << "best: " << best->spec.source << "/" << dimred_name(best->spec.dimred) << "/"
                  << clusterer_name(best->spec.clusterer) << "\n";
    return failed == results.size() ? kExitStage : kExitOk;
}

int run_evaluate(const Args& a) {
    const auto assignment = load_assignment(a.assignment);
    const Dataset d = load_manifest(a.manifest);
    const auto report = evaluate(assignment, scenarios_of(d), a.coverage_threshold);
    if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
    csv::write_text(a.out, nlohmann::json(report).dump(2) + "\n");
    std::cout << "avg purity "
              << (report.avg_purity ? csv::format_double(*report.avg_purity) : std::string("n/a")) << ", coverage "
              << csv::format_double(report.coverage_pct) << "\n";
    return kExitOk;
}

int run_report(const Args& a) {
    const fs::path in = fs::path(a.in) / "results.json";
    std::ifstream f(in);
    if (!f) fail(Errc::MissingFile, in.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, in.string() + ": " + e.what());
    }
    const auto results = results_from_json(j);
    const auto format = parse_report_format(a.format);
    fs::create_directories(a.out);
    emit_report(results, format, fs::path(a.out) / (std::string("pipelines.") + a.format));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Root-cause clustering of DNN failure images"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonOrIniConfig>());
    app.set_config("--config", "", "INI/TOML or JSON file with option defaults; flags override it");
    Args a;

    auto* inject = app.add_subcommand("inject", "Derive tagged failure images from correctly handled ones");
    inject->add_option("--manifest", a.manifest, "Source manifest")->required()->check(CLI::ExistingFile);
    inject->add_option("--images", a.images, "Directory the manifest paths are relative to")->required();
    inject->add_option("--keypoints", a.keypoints, "Face key point JSON (needed by occlusion scenarios)");
    inject->add_option("--plan", a.plan, "Injection plan JSON")->required()->check(CLI::ExistingFile);
    inject->add_option("--out", a.out, "Output directory")->required();

    auto* cluster = app.add_subcommand("cluster", "Run one pipeline over the failing images of a manifest");
    cluster->add_option("--features", a.features, "Feature matrix (.fmx/.csv) or raw:<side>")->expected(1);
    cluster->add_option("--heatmaps", a.heatmaps, "Heatmap index JSON; uses the layer with minimal WICD")->expected(1);
    cluster->add_option("--manifest", a.manifest, "Manifest")->required()->check(CLI::ExistingFile);
    cluster->add_option("--images", a.images, "Image root for raw:<side> features");
    cluster->add_option("--dimred", a.dimred, "none|pca|umap")->check(CLI::IsMember({"none", "pca", "umap"}));
    cluster->add_option("--algo", a.algo, "kmeans|dbscan|hdbscan")->check(CLI::IsMember({"kmeans", "dbscan", "hdbscan"}));
    cluster->add_option("--seed", a.seed, "Seed");
    cluster->add_option("--out", a.out, "Assignment CSV")->required();

    auto* grid = app.add_subcommand("grid", "Run every source x {none,pca,umap} x {kmeans,dbscan,hdbscan} pipeline");
    grid->add_option("--features", a.features, "Comma-separated feature sources (files or raw:<side>)")->delimiter(',');
    grid->add_option("--heatmaps", a.heatmaps, "Heatmap index JSON files")->delimiter(',');
    grid->add_option("--manifest", a.manifest, "Manifest")->required()->check(CLI::ExistingFile);
    grid->add_option("--images", a.images, "Image root for raw:<side> features");
    grid->add_option("--seed", a.seed, "Master seed");
    grid->add_option("--jobs", a.jobs, "Concurrent pipelines")->check(CLI::PositiveNumber);
    grid->add_option("--coverage-threshold", a.coverage_threshold, "Coverage threshold")->check(CLI::Range(0.0, 1.0));
    grid->add_option("--out", a.out, "Results directory")->required();

    auto* eval = app.add_subcommand("evaluate", "Score a cluster assignment against the manifest scenarios");
    eval->add_option("--assignment", a.assignment, "Assignment CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--manifest", a.manifest, "Manifest")->required()->check(CLI::ExistingFile);
    eval->add_option("--coverage-threshold", a.coverage_threshold, "Coverage threshold")->check(CLI::Range(0.0, 1.0));
    eval->add_option("--out", a.out, "Report JSON")->required();

    auto* report = app.add_subcommand("report", "Render grid results as a table");
    report->add_option("--in", a.in, "Grid results directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--format", a.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    report->add_option("--out", a.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*inject) return run_inject(a);
        if (*cluster) return run_cluster(a);
        if (*grid) return run_grid_cmd(a);
        if (*eval) return run_evaluate(a);
        if (*report) return run_report(a);
    } catch (const StageError& e) {
        std::cerr << "rcc: stage failure: " << e.what() << "\n";
        return kExitStage;
    } catch (const Error& e) {
        std::cerr << "rcc: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "rcc: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
