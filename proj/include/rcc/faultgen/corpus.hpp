#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcc/core/labeling.hpp"
#include "rcc/core/manifest.hpp"
#include "rcc/faultgen/image_io.hpp"
#include "rcc/faultgen/occlusion.hpp"
#include "rcc/faultgen/transforms.hpp"
#include "rcc/random.hpp"

namespace rcc {

/// One injected scenario: its tag, how many images to derive and the
/// transform parameters. `params.kind` picks the transform; it defaults to
/// the tag itself.
struct ScenarioPlan {
    std::string tag;
    std::optional<std::size_t> per_class;  // classification
    std::optional<std::size_t> count;      // regression
    nlohmann::ordered_json params = nlohmann::ordered_json::object();

    std::string kind() const { return params.value("kind", tag); }
};

struct InjectionPlan {
    std::uint64_t seed = 0;
    std::vector<ScenarioPlan> scenarios;  // file order
};

/// Transform kinds understood by apply_scenario.
inline const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds{"noise", "blur",      "dark",       "scale", "mask",
                                                "sunglasses", "eyeglasses", "hand", "object"};
    return kinds;
}

inline InjectionPlan parse_plan(const nlohmann::ordered_json& j) {
    InjectionPlan plan;
    try {
        plan.seed = j.value("seed", std::uint64_t{0});
        if (!j.contains("scenarios") || !j["scenarios"].is_object()) fail(Errc::ParseError, "plan needs a scenarios object");
        for (const auto& [tag, body] : j["scenarios"].items()) {
            ScenarioPlan s;
            s.tag = tag;
            if (tag.empty()) fail(Errc::ParseError, "empty scenario tag");
            for (const auto& [key, value] : body.items()) {
                if (key == "per_class") s.per_class = value.get<std::size_t>();
                else if (key == "count") s.count = value.get<std::size_t>();
                else s.params[key] = value;
            }
            if (s.per_class.has_value() == s.count.has_value())
                fail(Errc::ParseError, "scenario " + tag + " needs exactly one of per_class or count");
            const auto kinds = scenario_kinds();
            if (std::find(kinds.begin(), kinds.end(), s.kind()) == kinds.end())
                fail(Errc::ParseError, "scenario " + tag + " has unknown kind " + s.kind());
            plan.scenarios.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, std::string("injection plan: ") + e.what());
    }
    return plan;
}

inline nlohmann::ordered_json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) fail(Errc::MissingFile, p.string());
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, p.string() + ": " + e.what());
    }
}

inline InjectionPlan load_plan(const std::filesystem::path& p) { return parse_plan(read_json_file(p)); }

inline std::map<std::string, KeypointSet> load_keypoints(const std::filesystem::path& p) {
    return parse_keypoints(nlohmann::json::parse(read_json_file(p).dump()));
}

namespace detail {

inline std::optional<Occlusion> occlusion_kind(const std::string& kind) {
    if (kind == "mask") return Occlusion::Mask;
    if (kind == "sunglasses") return Occlusion::Sunglasses;
    if (kind == "eyeglasses") return Occlusion::Eyeglasses;
    if (kind == "hand") return Occlusion::Hand;
    return std::nullopt;
}

inline std::vector<std::string> required_keypoints(const std::string& kind) {
    if (kind == "mask") return {"nose", "mouth", "chin"};
    if (kind == "sunglasses" || kind == "eyeglasses") return {"left_eye", "right_eye"};
    return {};
}

inline bool has_keypoints(const std::map<std::string, KeypointSet>& kp, const std::string& id, const std::string& kind) {
    const auto occ = occlusion_kind(kind);
    if (!occ) return true;
    const auto it = kp.find(id);
    if (it == kp.end() || it->second.empty()) return false;
    for (const auto& n : required_keypoints(kind))
        if (!it->second.count(n)) return false;
    return true;
}

}  // namespace detail

/// Applies one scenario transform. `seed` feeds the noise generator.
inline Raster apply_scenario(const ScenarioPlan& s, const Raster& img, const KeypointSet& kp, std::uint64_t seed,
                             const std::filesystem::path& plan_dir = {}) {
    const auto kind = s.kind();
    const auto& p = s.params;
    if (kind == "noise") return add_gaussian_noise(img, p.value("sigma", 0.1), seed);
    if (kind == "blur") return gaussian_blur(img, p.value("radius", 30.0));
    if (kind == "dark") return darken(img, p.value("factor", 0.3));
    if (kind == "scale") return scale_shrink(img, p.value("delta", default_shrink_delta(img.width, img.height)));
    if (kind == "object") {
        if (!p.contains("sprite")) fail(Errc::InvalidArgument, "object scenario needs a sprite path");
        const auto path = plan_dir / p["sprite"].get<std::string>();
        const Sprite sprite = read_sprite(path);
        const int x = p.value("x", (img.width - sprite.image.width) / 2);
        const int y = p.value("y", (img.height - sprite.image.height) / 2);
        return paste_object(img, sprite, x, y);
    }
    OcclusionStyle st;
    st.hand_fraction = p.value("fraction", st.hand_fraction);
    st.stroke = p.value("stroke", st.stroke);
    return overlay_occlusion(img, *detail::occlusion_kind(kind), kp, st);
}

struct CorpusOptions {
    std::filesystem::path image_dir;     // source images, record paths are relative to it
    std::filesystem::path out_dir;       // receives <tag>/<file> images and manifest.csv
    std::filesystem::path plan_dir;      // base for relative sprite paths
    std::string manifest_name = "manifest.csv";
};

/// Derives tagged failure images from correctly handled records.
///
/// Per scenario (in plan order) the eligible pool is every correct record
/// that has the key points its transform needs. Sampling is without
/// replacement inside one scenario and uses its own sub-seed; classification
/// plans take `per_class` images from every class label in the dataset.
/// New records copy the source outputs and carry the scenario tag.
inline Dataset build_failure_corpus(const Dataset& d, const std::map<std::string, KeypointSet>& keypoints,
                                    const InjectionPlan& plan, const CorpusOptions& opt) {
    if (plan.scenarios.empty()) fail(Errc::InvalidArgument, "injection plan has no scenarios");
    const bool classification = is_classification(d.task());
    const auto& recs = d.records();
    std::vector<bool> correct(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) correct[i] = !is_failure(recs[i], d.task());

    std::vector<ImageRecord> out;
    for (std::size_t si = 0; si < plan.scenarios.size(); ++si) {
        const auto& s = plan.scenarios[si];
        if (classification != s.per_class.has_value())
            fail(Errc::InvalidArgument, "scenario " + s.tag + (classification ? " needs per_class" : " needs count"));
        const std::uint64_t seed = sub_seed(plan.seed, si);
        Rng rng(seed);

        // Pools keyed by class label ("" for regression), in record order.
        std::map<std::string, std::vector<std::size_t>> pools;
        if (classification)
            for (const auto& r : recs) pools[std::get<std::string>(r.true_output)];
        else
            pools[""];
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (!correct[i] || !detail::has_keypoints(keypoints, recs[i].id, s.kind())) continue;
            pools[classification ? std::get<std::string>(recs[i].true_output) : ""].push_back(i);
        }
        const std::size_t want = classification ? *s.per_class : *s.count;
        std::vector<std::size_t> chosen;
        for (auto& [label, pool] : pools) {
            if (pool.size() < want)
                fail(Errc::InsufficientCorrectImages, "scenario " + s.tag + (classification ? ", class " + label : "") +
                                                          ": " + std::to_string(pool.size()) + " eligible, " +
                                                          std::to_string(want) + " requested");
            rng.shuffle(pool.begin(), pool.end());
            chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
        }
        std::sort(chosen.begin(), chosen.end());

        std::filesystem::create_directories(opt.out_dir / s.tag);
        for (auto i : chosen) {
            const auto& src = recs[i];
            if (src.path.empty()) fail(Errc::InvalidArgument, "record " + src.id + " has no image path");
            const Raster img = load_image(opt.image_dir / src.path);
            const auto kp_it = keypoints.find(src.id);
            const KeypointSet kp = kp_it == keypoints.end() ? KeypointSet{} : kp_it->second;
            const Raster mod = apply_scenario(s, img, kp, sub_seed(seed, i + 1), opt.plan_dir);
            const auto rel = std::filesystem::path(s.tag) / std::filesystem::path(src.path).filename();
            save_image(mod, opt.out_dir / rel);
            out.push_back({src.id + "__" + s.tag, rel.generic_string(), src.true_output, src.predicted_output, s.tag});
        }
    }
    Dataset result(std::move(out), d.task());
    write_manifest(result, opt.out_dir / opt.manifest_name);
    return result;
}

}  // namespace rcc
