#pragma once

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcc/clustering/assignment.hpp"
#include "rcc/csv.hpp"
#include "rcc/pipeline/pipeline.hpp"

namespace rcc {

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    fail(Errc::InvalidArgument, "unknown report format: " + s);
}

/// Copies sorted by (source, dimred, clusterer); equal keys keep input order.
inline std::vector<const PipelineResult*> report_order(const std::vector<PipelineResult>& results) {
    std::vector<const PipelineResult*> rows;
    for (const auto& r : results) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(), [](const PipelineResult* a, const PipelineResult* b) {
        return std::tuple(a->spec.source, a->spec.dimred, a->spec.clusterer) <
               std::tuple(b->spec.source, b->spec.dimred, b->spec.clusterer);
    });
    return rows;
}

inline const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols{
        "source",   "dimred",       "clusterer", "seed",  "status",     "n_images",   "n_clusters",
        "n_noise",  "avg_purity",   "coverage_pct", "n_covered", "n_scenarios", "redundancy_ratio", "savings",
        "k",        "eps",          "min_pts",   "failed_stage", "error"};
    return cols;
}

namespace detail {

template <class T>
std::string opt_field(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_floating_point_v<T>) return csv::format_double(*v);
    else return std::to_string(*v);
}

}  // namespace detail

inline std::string encode_report_csv(const std::vector<PipelineResult>& results) {
    std::ostringstream out;
    const auto& cols = report_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const PipelineResult* r : report_order(results)) {
        std::vector<std::string> f{r->spec.source, dimred_name(r->spec.dimred), clusterer_name(r->spec.clusterer),
                                   std::to_string(r->spec.seed), r->ok() ? "ok" : "failed"};
        if (r->report) {
            const auto& e = *r->report;
            f.insert(f.end(), {std::to_string(e.n_images), std::to_string(e.n_clusters), std::to_string(e.n_noise),
                               detail::opt_field(e.avg_purity), csv::format_double(e.coverage_pct),
                               std::to_string(e.covered_scenarios.size()), std::to_string(e.scenarios.size()),
                               detail::opt_field(e.redundancy_ratio), csv::format_double(e.savings)});
        } else {
            f.insert(f.end(), 9, "");
        }
        f.insert(f.end(), {detail::opt_field(r->tuning.k), detail::opt_field(r->tuning.eps),
                           detail::opt_field(r->tuning.min_pts), r->failed_stage, r->error});
        for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << csv::quote(f[i]);
        out << '\n';
    }
    return out.str();
}

inline nlohmann::json tuning_to_json(const Tuning& t) {
    return {{"pca_components", detail::opt_json(t.pca_components)},
            {"umap_neighbors", detail::opt_json(t.umap_neighbors)},
            {"k", detail::opt_json(t.k)},
            {"eps", detail::opt_json(t.eps)},
            {"min_pts", detail::opt_json(t.min_pts)}};
}

inline Tuning tuning_from_json(const nlohmann::json& j) {
    return {detail::opt_from<int>(j.at("pca_components")), detail::opt_from<int>(j.at("umap_neighbors")),
            detail::opt_from<int>(j.at("k")), detail::opt_from<double>(j.at("eps")),
            detail::opt_from<int>(j.at("min_pts"))};
}

inline nlohmann::json results_to_json(const std::vector<PipelineResult>& results) {
    nlohmann::json rows = nlohmann::json::array();
    for (const PipelineResult* r : report_order(results)) {
        rows.push_back({{"source", r->spec.source},
                        {"dimred", dimred_name(r->spec.dimred)},
                        {"clusterer", clusterer_name(r->spec.clusterer)},
                        {"seed", r->spec.seed},
                        {"status", r->ok() ? "ok" : "failed"},
                        {"tuning", tuning_to_json(r->tuning)},
                        {"report", r->report ? nlohmann::json(*r->report) : nlohmann::json(nullptr)},
                        {"failed_stage", r->failed_stage},
                        {"error", r->error}});
    }
    return {{"pipelines", rows}};
}

/// Inverse of results_to_json; assignments and timings are not part of the report.
inline std::vector<PipelineResult> results_from_json(const nlohmann::json& j) {
    std::vector<PipelineResult> out;
    try {
        for (const auto& row : j.at("pipelines")) {
            PipelineResult r;
            r.spec.source = row.at("source").get<std::string>();
            r.spec.dimred = parse_dimred(row.at("dimred").get<std::string>());
            r.spec.clusterer = parse_clusterer(row.at("clusterer").get<std::string>());
            r.spec.seed = row.at("seed").get<std::uint64_t>();
            r.tuning = tuning_from_json(row.at("tuning"));
            if (!row.at("report").is_null()) r.report = row.at("report").get<EvaluationReport>();
            r.failed_stage = row.at("failed_stage").get<std::string>();
            r.error = row.at("error").get<std::string>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, std::string("pipeline results: ") + e.what());
    }
    return out;
}

inline std::string encode_report(const std::vector<PipelineResult>& results, ReportFormat format) {
    if (format == ReportFormat::Csv) return encode_report_csv(results);
    return results_to_json(results).dump(2) + "\n";
}

/// One row per pipeline in a fixed column order; the bytes depend only on the results.
inline void emit_report(const std::vector<PipelineResult>& results, ReportFormat format,
                        const std::filesystem::path& path) {
    if (results.empty()) fail(Errc::InvalidArgument, "no pipeline results to report");
    csv::write_text(path.string(), encode_report(results, format));
}

/// Wall-clock stage timings, kept apart so the reports stay reproducible.
inline std::string encode_timings_csv(const std::vector<PipelineResult>& results) {
    std::ostringstream out;
    out << "source,dimred,clusterer,stage,seconds\n";
    for (const PipelineResult* r : report_order(results))
        for (const auto& [stage, sec] : r->timings)
            out << csv::quote(r->spec.source) << ',' << dimred_name(r->spec.dimred) << ','
                << clusterer_name(r->spec.clusterer) << ',' << stage << ',' << csv::format_double(sec) << '\n';
    return out.str();
}

inline std::string assignment_file_name(const PipelineSpec& s) {
    return s.source + "__" + dimred_name(s.dimred) + "__" + clusterer_name(s.clusterer) + ".csv";
}

/// Grid output directory: results.json, results.csv, timings.csv and one
/// assignment file per successful cell under assignments/.
inline void write_grid_outputs(const std::vector<PipelineResult>& results, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "assignments");
    emit_report(results, ReportFormat::Json, dir / "results.json");
    emit_report(results, ReportFormat::Csv, dir / "results.csv");
    csv::write_text((dir / "timings.csv").string(), encode_timings_csv(results));
    for (const auto& r : results)
        if (r.assignment) write_assignment(*r.assignment, dir / "assignments" / assignment_file_name(r.spec));
}

}  // namespace rcc
