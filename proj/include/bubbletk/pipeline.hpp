#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bubbletk/critical_values.hpp"
#include "bubbletk/dissect.hpp"
#include "bubbletk/panel.hpp"

namespace bubbletk {

inline constexpr const char* kBubbletkVersion = "0.1.0";

struct RunConfig {
    enum class CvSource { Simulated, WildBootstrap };

    FundamentalSpec fund_spec = FundamentalSpec::Fcfe1;
    LagPolicy lags = LagPolicy::schwert();
    WindowRule rule = WindowRule::auto_rule();
    CvSource cv_source = CvSource::Simulated;
    double quantile = 0.95;
    std::uint64_t seed = 42;
    int workers = 1;
    bool log_spec = false;
    int min_obs = kMinSeriesLength;
    int cv_reps = 2000;
    int bootstrap_reps = 200;
    int min_episode_duration = 0;
    ExuberanceFlavor aggregate_output = ExuberanceFlavor::PostCriterion;
    ExuberanceFlavor second_order_input = ExuberanceFlavor::PreCriterion;
    IngestConfig ingest;
    std::filesystem::path cache_dir = "cv_cache";

    void validate() const;
};

std::string cv_source_name(RunConfig::CvSource source);

// Simulated tables keyed by (T, r0, lag policy, reps, seed) and persisted as
// JSON under one directory; corrupt or stale files are regenerated. Not
// thread-safe: the pipeline resolves every table before its parallel phase.
class CvCache {
public:
    explicit CvCache(std::filesystem::path dir, int workers = 1);

    const CvTable& get(int T, double r0, const LagPolicy& lags, int reps, std::uint64_t seed,
                       const std::vector<double>& levels);

    static std::string key(int T, double r0, const LagPolicy& lags, int reps,
                           std::uint64_t seed);
    const std::vector<std::string>& keys_used() const { return keys_used_; }

private:
    std::filesystem::path dir_;
    int workers_;
    std::map<std::string, CvTable> mem_;
    std::vector<std::string> keys_used_;
};

// One tested series segment with everything needed for reporting.
struct SeriesOutcome {
    std::string stock_id;
    std::string series_id;
    std::string kind;  // "price" or "fundamental"
    Quarter start;
    int len = 0;
    ShiftRecord shift;
    ExplosivenessResult test;
    SeriesEpisodes quarters;
};

struct DissectionResult {
    std::vector<SeriesOutcome> series;
    std::vector<StockVerdict> verdicts;
    AggregateResult post_criterion;
    AggregateResult pre_criterion;
    std::vector<SecondOrderResult> second_order;
    std::map<std::string, long long> diagnostics;
    nlohmann::json manifest;
};

DissectionResult run_dissection(const StockPanel& panel, const RunConfig& config);

// episodes.csv, verdicts.csv, sector_exuberance.csv, sector_episodes.csv,
// run_manifest.json. Content depends only on panel + config, never on
// worker count or paths.
void write_outputs(const DissectionResult& result, const RunConfig& config,
                   const std::filesystem::path& out_dir);

DissectionResult dissect_to_dir(const StockPanel& panel, const RunConfig& config,
                                const std::filesystem::path& out_dir);

}  // namespace bubbletk
