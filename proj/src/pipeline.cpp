#include "bubbletk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "bubbletk/parallel.hpp"
#include "bubbletk/rng.hpp"

namespace bubbletk {

void RunConfig::validate() const {
    if (!(quantile > 0.5) || !(quantile < 1.0))
        throw std::invalid_argument("RunConfig: quantile must lie in (0.5, 1)");
    if (workers < 1) throw std::invalid_argument("RunConfig: workers must be >= 1");
    if (min_obs < kMinSeriesLength)
        throw std::invalid_argument("RunConfig: min_obs must be >= " +
                                    std::to_string(kMinSeriesLength));
    if (cv_reps < 100) throw std::invalid_argument("RunConfig: cv_reps must be >= 100");
    if (bootstrap_reps < 1) throw std::invalid_argument("RunConfig: bootstrap_reps must be >= 1");
    if (min_episode_duration < 0)
        throw std::invalid_argument("RunConfig: min_episode_duration must be >= 0");
}

std::string cv_source_name(RunConfig::CvSource source) {
    return source == RunConfig::CvSource::Simulated ? "simulated" : "wild-bootstrap";
}

CvCache::CvCache(std::filesystem::path dir, int workers)
    : dir_(std::move(dir)), workers_(workers) {
    std::filesystem::create_directories(dir_);
}

std::string CvCache::key(int T, double r0, const LagPolicy& lags, int reps,
                         std::uint64_t seed) {
    return "cv_T" + std::to_string(T) + "_r" + csv::format_double(r0) + "_l" + lags.str() +
           "_n" + std::to_string(reps) + "_s" + std::to_string(seed);
}

const CvTable& CvCache::get(int T, double r0, const LagPolicy& lags, int reps,
                            std::uint64_t seed, const std::vector<double>& levels) {
    const std::string k = key(T, r0, lags, reps, seed);
    auto it = mem_.find(k);
    if (it == mem_.end()) {
        const auto path = dir_ / (k + ".json");
        CvTable table;
        bool have = false;
        if (std::filesystem::exists(path)) {
            try {
                table = CvTable::load(path);
                have = table.provenance.T == T && table.provenance.r0 == r0 &&
                       table.provenance.reps == reps && table.provenance.seed == seed &&
                       table.lags == lags.str();
                for (double level : levels)
                    if (have && std::find(table.levels.begin(), table.levels.end(), level) ==
                                    table.levels.end())
                        have = false;
            } catch (const std::exception&) {
                have = false;  // unreadable cache entry: regenerate below
            }
        }
        if (!have) {
            NullSpec spec;
            spec.T = T;
            spec.r0 = r0;
            spec.reps = reps;
            spec.seed = seed;
            table = simulate_null_cv(spec, lags, levels, workers_);
            table.save(path);
        }
        it = mem_.emplace(k, std::move(table)).first;
        keys_used_.push_back(k);
    }
    return it->second;
}

namespace {

struct Job {
    std::string stock_id;
    std::string kind;  // "price" or "fundamental"
    QuarterlySeries series;  // shifted (and logged when configured)
    ShiftRecord shift;
};

void bump(std::map<std::string, long long>& diag, const std::string& reason,
          long long n = 1) {
    if (n != 0) diag[reason] += n;
}

QuarterlySeries transform(QuarterlySeries seg, bool log_spec, ShiftRecord& shift) {
    auto [shifted, rec] = shift_positive(seg);
    shift = rec;
    if (log_spec) return log_transform(shifted);
    return shifted;
}

nlohmann::json counts_json(const FileCounts& c) {
    nlohmann::json j;
    j["rows_read"] = c.rows_read;
    j["kept"] = c.kept;
    j["excluded"] = c.excluded;
    return j;
}

nlohmann::json config_json(const RunConfig& config) {
    nlohmann::json j;
    j["fundamental_spec"] = fundamental_spec_name(config.fund_spec);
    j["lags"] = config.lags.str();
    if (config.rule.derivation == WindowRule::Derivation::Auto) {
        j["window_rule"] = "auto";
    } else {
        j["window_rule"] = "explicit";
        j["window_r0"] = config.rule.r0;
    }
    j["cv_source"] = cv_source_name(config.cv_source);
    j["quantile"] = config.quantile;
    j["seed"] = config.seed;
    j["log_spec"] = config.log_spec;
    j["min_obs"] = config.min_obs;
    j["cv_reps"] = config.cv_reps;
    j["bootstrap_reps"] = config.bootstrap_reps;
    j["min_episode_duration"] = config.min_episode_duration;
    j["aggregate_output"] = exuberance_flavor_name(config.aggregate_output);
    j["second_order_input"] = exuberance_flavor_name(config.second_order_input);
    j["exchange_keep"] = std::vector<std::string>(config.ingest.exchange_keep.begin(),
                                                  config.ingest.exchange_keep.end());
    j["ytd_fields"] = config.ingest.ytd_fields;
    return j;
}

}  // namespace

DissectionResult run_dissection(const StockPanel& panel, const RunConfig& config) {
    config.validate();
    DissectionResult result;
    auto& diag = result.diagnostics;

    // Stage 1: per-stock series construction. std::map iteration gives a
    // stable stock order, which pins job order and hence derived seeds.
    std::vector<Job> jobs;
    std::map<std::string, const SectorTag*> sector_by_stock;
    for (const auto& [permno, data] : panel.stocks) {
        if (!data.meta) {
            bump(diag, "stock-no-meta");
            continue;
        }
        const SectorTag& tag = data.meta->tag;
        if (!is_known_sector(tag.sector)) {
            bump(diag, "stock-unknown-sector");
            continue;
        }
        if (data.prices.empty()) {
            bump(diag, "stock-no-price-rows");
            continue;
        }

        std::vector<std::pair<Quarter, double>> price_obs;
        price_obs.reserve(data.prices.size());
        for (const auto& row : data.prices) price_obs.emplace_back(row.quarter, row.price);
        auto price_segs = split_on_gaps(permno, price_obs, config.min_obs);
        long long kept_price = 0;
        for (const auto& s : price_segs) kept_price += s.length();
        bump(diag, "price-obs-dropped-short-or-gap",
             static_cast<long long>(price_obs.size()) - kept_price);
        if (price_segs.empty()) {
            bump(diag, "stock-no-price-series");
            continue;
        }

        auto fund_obs = fundamental_observations(data.statements, config.fund_spec, tag);
        bump(diag, "fund-quarters-missing-value",
             static_cast<long long>(data.statements.size()) -
                 static_cast<long long>(fund_obs.size()));
        auto fund_segs = split_on_gaps(permno, fund_obs, config.min_obs);
        long long kept_fund = 0;
        for (const auto& s : fund_segs) kept_fund += s.length();
        bump(diag, "fund-obs-dropped-short-or-gap",
             static_cast<long long>(fund_obs.size()) - kept_fund);

        sector_by_stock[permno] = &tag;
        for (auto& seg : price_segs) {
            Job job;
            job.stock_id = permno;
            job.kind = "price";
            job.series = transform(std::move(seg), config.log_spec, job.shift);
            jobs.push_back(std::move(job));
        }
        for (auto& seg : fund_segs) {
            Job job;
            job.stock_id = permno;
            job.kind = "fundamental";
            job.series = transform(std::move(seg), config.log_spec, job.shift);
            jobs.push_back(std::move(job));
        }
    }

    // Stage 2: resolve every simulated table before going parallel.
    CvCache cache(config.cache_dir, config.workers);
    std::vector<double> levels = kDefaultCvLevels;
    if (std::find(levels.begin(), levels.end(), config.quantile) == levels.end())
        levels.push_back(config.quantile);
    std::sort(levels.begin(), levels.end());

    std::map<int, const CvTable*> table_by_len;
    if (config.cv_source == RunConfig::CvSource::Simulated) {
        std::set<int> lengths;
        for (const auto& job : jobs) lengths.insert(job.series.length());
        for (int T : lengths)
            table_by_len[T] = &cache.get(T, config.rule.fraction(T), config.lags,
                                         config.cv_reps, config.seed, levels);
    }

    // Stage 3: test every segment. Job index keys both the output slot and
    // the bootstrap seed, so any worker count produces identical results.
    const int n_jobs = static_cast<int>(jobs.size());
    result.series.resize(n_jobs);
    parallel_for(n_jobs, config.workers, [&](int i) {
        const Job& job = jobs[i];
        CvProvider provider;
        if (config.cv_source == RunConfig::CvSource::Simulated) {
            const CvTable* table = table_by_len.at(job.series.length());
            provider = [table, &config](std::span<const double>) {
                return GateCv{table->gsadf_at(config.quantile),
                              table->bsadf_at(config.quantile)};
            };
        } else {
            std::uint64_t boot_seed = derive_seed(config.seed, 2ULL * i);
            provider = [&config, boot_seed](std::span<const double> y) {
                WildBootstrapCv cv = wild_bootstrap_cv(y, config.rule, config.lags,
                                                       config.bootstrap_reps, boot_seed,
                                                       config.quantile, 1);
                return GateCv{cv.gsadf_cv, std::move(cv.bsadf_cv)};
            };
        }

        SeriesOutcome outcome;
        outcome.stock_id = job.stock_id;
        outcome.series_id = job.series.series_id;
        outcome.kind = job.kind;
        outcome.start = job.series.start;
        outcome.len = job.series.length();
        outcome.shift = job.shift;
        outcome.test = test_and_datestamp(job.series.values, config.rule, config.lags,
                                          provider, config.min_episode_duration);
        outcome.test.episodes.series_id = job.series.series_id;
        outcome.quarters =
            to_quarter_episodes(outcome.test.episodes, outcome.start, outcome.len);
        result.series[i] = std::move(outcome);
    });

    // Stage 4: per-stock classification on the price/fundamental overlap.
    std::map<std::string, std::pair<std::vector<SeriesEpisodes>, std::vector<SeriesEpisodes>>>
        by_stock;
    for (const auto& outcome : result.series) {
        auto& slot = by_stock[outcome.stock_id];
        (outcome.kind == "price" ? slot.first : slot.second).push_back(outcome.quarters);
    }
    for (const auto& [permno, segs] : by_stock) {
        if (segs.second.empty()) {
            bump(diag, "stock-no-fundamental-series");
            continue;
        }
        result.verdicts.push_back(
            classify_bubbles(permno, config.fund_spec, segs.first, segs.second));
    }

    // Stage 5: sector aggregation, both flavors.
    auto sector_of = [&](const std::string& stock_id) {
        return sector_by_stock.at(stock_id)->sector;
    };
    auto mcap_of = [&](const std::string& stock_id, Quarter q) {
        return panel.stocks.at(stock_id).market_cap_at(q);
    };
    result.post_criterion = aggregate_sector(result.verdicts, sector_of, mcap_of,
                                             ExuberanceFlavor::PostCriterion);
    result.pre_criterion = aggregate_sector(result.verdicts, sector_of, mcap_of,
                                            ExuberanceFlavor::PreCriterion);

    // Stage 6: second-order dating on the configured aggregate flavor.
    const AggregateResult& second_input =
        config.second_order_input == ExuberanceFlavor::PostCriterion ? result.post_criterion
                                                                     : result.pre_criterion;
    for (std::size_t s = 0; s < second_input.sectors.size(); ++s) {
        const SectorExuberance& agg = second_input.sectors[s];
        CvProvider provider;
        if (config.cv_source == RunConfig::CvSource::Simulated) {
            if (agg.length() >= kMinSeriesLength) {
                const CvTable& table =
                    cache.get(agg.length(), config.rule.fraction(agg.length()), config.lags,
                              config.cv_reps, config.seed, levels);
                provider = [&table, &config](std::span<const double>) {
                    return GateCv{table.gsadf_at(config.quantile),
                                  table.bsadf_at(config.quantile)};
                };
            } else {
                provider = [](std::span<const double>) -> GateCv {
                    throw std::logic_error("cv provider called for a skipped sector");
                };
            }
        } else {
            std::uint64_t boot_seed = derive_seed(config.seed, 2ULL * s + 1);
            provider = [&config, boot_seed](std::span<const double> y) {
                WildBootstrapCv cv = wild_bootstrap_cv(y, config.rule, config.lags,
                                                       config.bootstrap_reps, boot_seed,
                                                       config.quantile, 1);
                return GateCv{cv.gsadf_cv, std::move(cv.bsadf_cv)};
            };
        }
        result.second_order.push_back(second_order_explosiveness(
            agg, config.rule, config.lags, provider, config.min_episode_duration));
    }

    // Manifest: everything that pins the outputs; worker count and paths
    // deliberately omitted so reruns compare byte-identical.
    nlohmann::json manifest;
    manifest["artifact"] = "bubbletk";
    manifest["version"] = kBubbletkVersion;
    manifest["config"] = config_json(config);
    manifest["ingest"]["prices"] = counts_json(panel.diag.prices);
    manifest["ingest"]["fundamentals"] = counts_json(panel.diag.fundamentals);
    manifest["ingest"]["meta"] = counts_json(panel.diag.meta);
    manifest["dissection"]["diagnostics"] = diag;
    manifest["dissection"]["stocks_in_panel"] = panel.stocks.size();
    manifest["dissection"]["stocks_tested"] = by_stock.size();
    manifest["dissection"]["series_tested"] = result.series.size();
    manifest["dissection"]["verdicts"] = result.verdicts.size();
    manifest["dissection"]["mcap_missing_post"] = result.post_criterion.mcap_missing;
    manifest["dissection"]["mcap_missing_pre"] = result.pre_criterion.mcap_missing;
    if (config.cv_source == RunConfig::CvSource::Simulated)
        manifest["dissection"]["cv_tables"] = cache.keys_used();
    nlohmann::json skipped = nlohmann::json::object();
    for (const auto& so : result.second_order)
        if (so.skipped) skipped[so.sector] = so.skip_reason;
    manifest["dissection"]["second_order_skipped"] = skipped;
    result.manifest = std::move(manifest);
    return result;
}

namespace {

std::string bool_cell(bool v) { return v ? "1" : "0"; }

std::string opt_bool_cell(const std::optional<bool>& v) {
    return v ? bool_cell(*v) : std::string();
}

void write_episode_rows(std::ostream& out, const std::string& series_id,
                        const std::string& kind, const SeriesEpisodes& quarters) {
    for (const auto& e : quarters.episodes) {
        std::vector<std::string> cells = {series_id, kind, e.start.str(),
                                          e.end_exclusive.prev().str(),
                                          bool_cell(e.open)};
        csv::write_row(out, cells);
    }
}

}  // namespace

void write_outputs(const DissectionResult& result, const RunConfig& config,
                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ofstream out(out_dir / "episodes.csv");
        out << "series_id,kind,start,end,open\n";
        for (const auto& s : result.series) write_episode_rows(out, s.series_id, s.kind, s.quarters);
    }

    {
        std::ofstream out(out_dir / "verdicts.csv");
        out << "permno,quarter,price_explosive,fundamental_explosive,in_bubble\n";
        for (const auto& v : result.verdicts) {
            for (const auto& [q, f] : v.flags) {
                std::vector<std::string> cells = {v.stock_id, q.str(),
                                                  bool_cell(f.price_explosive),
                                                  opt_bool_cell(f.fundamental_explosive),
                                                  opt_bool_cell(f.in_bubble)};
                csv::write_row(out, cells);
            }
        }
    }

    {
        const AggregateResult& agg = config.aggregate_output == ExuberanceFlavor::PostCriterion
                                         ? result.post_criterion
                                         : result.pre_criterion;
        std::ofstream out(out_dir / "sector_exuberance.csv");
        out << "sector,quarter,count,mcap\n";
        for (const auto& s : agg.sectors) {
            for (int i = 0; i < s.length(); ++i) {
                std::vector<std::string> cells = {s.sector, s.quarter_at(i).str(),
                                                  std::to_string(s.count[i]),
                                                  csv::format_double(s.mcap[i])};
                csv::write_row(out, cells);
            }
        }
    }

    {
        std::ofstream out(out_dir / "sector_episodes.csv");
        out << "sector,start,end,open\n";
        for (const auto& so : result.second_order) {
            if (so.skipped) continue;
            for (const auto& e : so.quarters.episodes) {
                std::vector<std::string> cells = {so.sector, e.start.str(),
                                                  e.end_exclusive.prev().str(),
                                                  bool_cell(e.open)};
                csv::write_row(out, cells);
            }
        }
    }

    {
        std::ofstream out(out_dir / "run_manifest.json");
        out << result.manifest.dump(1) << '\n';
    }
}

DissectionResult dissect_to_dir(const StockPanel& panel, const RunConfig& config,
                                const std::filesystem::path& out_dir) {
    DissectionResult result = run_dissection(panel, config);
    write_outputs(result, config, out_dir);
    return result;
}

}  // namespace bubbletk
