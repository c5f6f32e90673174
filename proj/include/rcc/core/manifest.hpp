#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcc/core/types.hpp"
#include "rcc/csv.hpp"

namespace rcc {

// Manifest layout:
//   manifest.csv   header id,path,true,pred,scenario
//   manifest.json  {"task":"classification"|"regression","metric":"squared_error"|"point_distance","threshold":t}
// The sidecar sits next to the CSV with the extension replaced by .json
// (or with .json appended). Without a sidecar the task is classification.

inline std::filesystem::path manifest_sidecar_path(const std::filesystem::path& manifest) {
    auto replaced = manifest;
    replaced.replace_extension(".json");
    if (replaced != manifest && std::filesystem::exists(replaced)) return replaced;
    auto appended = manifest;
    appended += ".json";
    if (std::filesystem::exists(appended)) return appended;
    return replaced;
}

inline Task parse_task_json(const nlohmann::json& j) {
    const std::string kind = j.value("task", "classification");
    if (kind == "classification") return ClassificationTask{};
    if (kind != "regression") fail(Errc::ParseError, "unknown task '" + kind + "'");
    RegressionTask t;
    const std::string metric = j.value("metric", "squared_error");
    if (metric == "squared_error") t.metric = RegressionMetric::SquaredError;
    else if (metric == "point_distance") t.metric = RegressionMetric::PointDistance;
    else fail(Errc::ParseError, "unknown regression metric '" + metric + "'");
    if (!j.contains("threshold") || !j["threshold"].is_number())
        fail(Errc::ParseError, "regression sidecar needs a numeric threshold");
    t.threshold = j["threshold"].get<double>();
    return t;
}

inline nlohmann::json task_to_json(const Task& task) {
    if (is_classification(task)) return {{"task", "classification"}};
    const auto& r = std::get<RegressionTask>(task);
    return {{"task", "regression"},
            {"metric", r.metric == RegressionMetric::SquaredError ? "squared_error" : "point_distance"},
            {"threshold", r.threshold}};
}

namespace detail {

inline Output parse_output(const std::string& field, bool classification, const std::string& id, std::size_t line) {
    if (classification) return field;
    std::vector<double> v;
    std::string_view rest = field;
    while (true) {
        const auto pos = rest.find(';');
        const auto part = rest.substr(0, pos);
        const auto value = csv::parse_double(part);
        if (!value) {
            fail(Errc::MixedOutputKinds, "line " + std::to_string(line) + ": record " + id +
                                             " has a non-numeric output '" + field + "' in a regression manifest");
        }
        if (!std::isfinite(*value)) fail(Errc::ParseError, "line " + std::to_string(line) + ": non-finite output");
        v.push_back(*value);
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 1);
    }
    return v;
}

inline std::string format_output(const Output& o) {
    if (const auto* s = std::get_if<std::string>(&o)) return *s;
    std::string out;
    for (double x : std::get<std::vector<double>>(o)) {
        if (!out.empty()) out += ';';
        out += csv::format_double(x);
    }
    return out;
}

}  // namespace detail

inline Task load_task_sidecar(const std::filesystem::path& manifest) {
    const auto sidecar = manifest_sidecar_path(manifest);
    if (!std::filesystem::exists(sidecar)) return ClassificationTask{};
    std::ifstream in(sidecar);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, sidecar.string() + ": " + e.what());
    }
    return parse_task_json(j);
}

inline Dataset load_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(Errc::MissingFile, path.string());
    const Task task = load_task_sidecar(path);
    const bool classification = is_classification(task);
    const auto lines = csv::read_lines(path.string());
    if (lines.empty()) fail(Errc::ParseError, "line 1: empty manifest");
    const auto header = csv::split_line(lines[0]);
    const std::vector<std::string> expected{"id", "path", "true", "pred", "scenario"};
    if (header != expected) fail(Errc::ParseError, "line 1: header must be id,path,true,pred,scenario");

    std::vector<ImageRecord> records;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const std::size_t line_no = i + 1;
        const auto f = csv::split_line(lines[i]);
        if (f.size() != 5) {
            fail(Errc::ParseError,
                 "line " + std::to_string(line_no) + ": expected 5 fields, got " + std::to_string(f.size()));
        }
        ImageRecord r;
        r.id = f[0];
        if (r.id.empty()) fail(Errc::ParseError, "line " + std::to_string(line_no) + ": empty id");
        if (!seen.insert(r.id).second) fail(Errc::DuplicateId, r.id);
        r.path = f[1];
        r.true_output = detail::parse_output(f[2], classification, r.id, line_no);
        r.predicted_output = detail::parse_output(f[3], classification, r.id, line_no);
        r.scenario = f[4];
        records.push_back(std::move(r));
    }
    return Dataset(std::move(records), task);
}

inline void write_manifest(const Dataset& d, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "id,path,true,pred,scenario\n";
    for (const auto& r : d.records()) {
        out << csv::quote(r.id) << ',' << csv::quote(r.path) << ',' << csv::quote(detail::format_output(r.true_output))
            << ',' << csv::quote(detail::format_output(r.predicted_output)) << ',' << csv::quote(r.scenario) << '\n';
    }
    csv::write_text(path.string(), out.str());
    auto sidecar = path;
    sidecar.replace_extension(".json");
    csv::write_text(sidecar.string(), task_to_json(d.task()).dump(2) + "\n");
}

}  // namespace rcc
