#pragma once

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>
#include <vector>

#include "rcc/pipeline/pipeline.hpp"

namespace rcc {

/// A grid input: a feature source, optionally with its features already in memory.
struct GridSource {
    FeatureSource source;
    std::optional<FeatureMatrix> features;
};

struct GridOptions {
    std::uint64_t seed = 0;
    int jobs = 1;
    PipelineSpec base{};  // stage parameters shared by every cell
};

inline constexpr DimRed kGridDimreds[] = {DimRed::None, DimRed::Pca, DimRed::Umap};
inline constexpr Clusterer kGridClusterers[] = {Clusterer::KMeansAuto, Clusterer::DbscanAuto, Clusterer::Hdbscan};

/// Cell seed. It depends only on the master seed and the stage choices, so a
/// cell's outcome does not change with source order or thread count.
inline std::uint64_t cell_seed(std::uint64_t master, DimRed d, Clusterer c) {
    return sub_seed(master, static_cast<std::uint64_t>(d) * 3 + static_cast<std::uint64_t>(c));
}

/// Every source x {none, pca, umap} x {kmeans, dbscan, hdbscan}. Failed cells
/// carry the error and the stage; the rest of the grid still runs.
/// Results come back in enumeration order regardless of `jobs`.
inline std::vector<PipelineResult> run_grid(const std::vector<GridSource>& sources, const Dataset& failures,
                                            const GridOptions& opt) {
    if (sources.empty()) fail(Errc::InvalidArgument, "grid needs at least one feature source");
    if (failures.empty()) fail(Errc::InvalidArgument, "failure set is empty");
    std::vector<std::string> ids;
    for (const auto& r : failures.records()) ids.push_back(r.id);

    struct Cell {
        std::size_t source;
        PipelineSpec spec;
    };
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < sources.size(); ++s)
        for (DimRed d : kGridDimreds)
            for (Clusterer c : kGridClusterers) {
                PipelineSpec spec = opt.base;
                spec.source = sources[s].source.name;
                spec.dimred = d;
                spec.clusterer = c;
                spec.seed = cell_seed(opt.seed, d, c);
                cells.push_back({s, spec});
            }

    const std::size_t workers = static_cast<std::size_t>(std::max(1, opt.jobs));
    auto parallel = [workers](std::size_t n, auto&& body) {
        std::atomic<std::size_t> next{0};
        auto loop = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 1; w < std::min(workers, n); ++w) pool.emplace_back(loop);
        loop();
        for (auto& t : pool) t.join();
    };

    // Resolve each source once; cells only read the shared matrices.
    std::vector<std::optional<FailureSet>> inputs(sources.size());
    std::vector<std::string> source_errors(sources.size());
    std::vector<double> source_seconds(sources.size(), 0.0);
    parallel(sources.size(), [&](std::size_t s) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            FeatureMatrix f = sources[s].features ? sources[s].features->select(ids)
                                                  : resolve_features(sources[s].source, failures);
            inputs[s] = FailureSet{failures, std::move(f)};
        } catch (const Error& e) {
            source_errors[s] = e.what();
        }
        source_seconds[s] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    std::vector<PipelineResult> results(cells.size());
    parallel(cells.size(), [&](std::size_t i) {
        const auto& cell = cells[i];
        PipelineResult& out = results[i];
        if (!inputs[cell.source]) {
            out.spec = cell.spec;
            out.failed_stage = "features";
            out.error = source_errors[cell.source];
            return;
        }
        try {
            out = run_pipeline(cell.spec, *inputs[cell.source]);
        } catch (const StageError& e) {
            out = PipelineResult{};
            out.spec = cell.spec;
            out.failed_stage = e.stage();
            out.error = e.what();
        }
        out.timings.insert(out.timings.begin(), {"features", source_seconds[cell.source]});
    });
    return results;
}

inline std::vector<PipelineResult> run_grid(const std::vector<FeatureSource>& sources, const Dataset& failures,
                                            std::uint64_t seed, int jobs = 1) {
    std::vector<GridSource> gs;
    for (const auto& s : sources) gs.push_back({s, std::nullopt});
    return run_grid(gs, failures, GridOptions{seed, jobs, {}});
}

/// Highest average purity, then coverage; ties keep the earlier cell.
inline const PipelineResult* best_cell(const std::vector<PipelineResult>& results) {
    const PipelineResult* best = nullptr;
    auto key = [](const PipelineResult& r) {
        return std::pair{r.report->avg_purity.value_or(-1.0), r.report->coverage_pct};
    };
    for (const auto& r : results)
        if (r.ok() && r.report && (!best || key(r) > key(*best))) best = &r;
    return best;
}

}  // namespace rcc
