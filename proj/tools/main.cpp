#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bubbletk/csv.hpp"
#include "bubbletk/dgp.hpp"
#include "bubbletk/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bubbletk;

namespace {

// A series file is a CSV with either (quarter,value) columns or a lone
// value column (quarters then count up from 1990Q1).
QuarterlySeries read_series_csv(const fs::path& path) {
    csv::Table t = csv::read_file(path);
    QuarterlySeries s;
    s.stock_id = path.stem().string();
    s.start = Quarter{1990, 1};
    int vcol = t.column("value");
    int qcol = t.column("quarter");
    if (vcol < 0 || (qcol < 0 && t.header.size() != 1))
        throw std::invalid_argument(path.string() +
                                    ": expected columns (quarter,value) or (value)");
    std::optional<Quarter> prev;
    for (const auto& row : t.rows) {
        auto v = csv::parse_optional_double(row[vcol]);
        if (!v) throw std::invalid_argument(path.string() + ": missing value cell");
        if (qcol >= 0) {
            auto parsed = Quarter::parse(row[qcol]);
            if (!parsed)
                throw std::invalid_argument(path.string() + ": bad quarter '" + row[qcol] + "'");
            Quarter q = *parsed;
            if (prev && !(q - *prev == 1))
                throw std::invalid_argument(path.string() + ": quarters not consecutive at " +
                                            q.str());
            if (!prev) s.start = q;
            prev = q;
        }
        s.values.push_back(*v);
    }
    s.series_id = s.stock_id + ":" + s.start.str();
    return s;
}

void write_series_csv(const fs::path& path, const QuarterlySeries& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "quarter,value\n";
    for (int i = 0; i < s.length(); ++i) {
        std::vector<std::string> cells = {s.quarter_at(i).str(), csv::format_double(s.values[i])};
        csv::write_row(out, cells);
    }
}

struct CommonTestOpts {
    std::string lags = "schwert";
    double r0 = 0.0;  // 0 = auto
    std::string cv_source = "simulated";
    int cv_reps = 2000;
    int bootstrap_reps = 200;
    std::uint64_t seed = 42;
    double level = 0.95;
    bool log_spec = false;
    int min_duration = 0;
    std::string cache_dir = "cv_cache";
    int workers = 1;
};

void add_common_test_opts(CLI::App* cmd, CommonTestOpts& o, bool own_seed = true) {
    cmd->add_option("--lags", o.lags, "Lag policy: fixed:<k>, schwert, aic:<kmax>, bic:<kmax>");
    cmd->add_option("--r0", o.r0, "Minimum window fraction (default: 0.01 + 1.8/sqrt(T))");
    cmd->add_option("--cv", o.cv_source, "Critical values: simulated or wild-bootstrap")
        ->check(CLI::IsMember({"simulated", "wild-bootstrap"}));
    cmd->add_option("--cv-reps", o.cv_reps, "Monte Carlo replications for simulated tables");
    cmd->add_option("--bootstrap-reps", o.bootstrap_reps, "Wild bootstrap replications");
    cmd->add_option(own_seed ? "--seed" : "--cv-seed", o.seed, "Critical-value seed");
    cmd->add_option("--quantile", o.level, "Critical-value quantile");
    cmd->add_flag("--log", o.log_spec, "Test log series");
    cmd->add_option("--min-duration", o.min_duration,
                    "Drop episodes shorter than this many quarters");
    cmd->add_option("--cache-dir", o.cache_dir, "Critical-value cache directory")
        ->envname("BUBBLETK_CACHE_DIR");
    cmd->add_option("--workers", o.workers, "Worker threads");
}

WindowRule window_rule(const CommonTestOpts& o) {
    return o.r0 > 0.0 ? WindowRule::explicit_r0(o.r0) : WindowRule::auto_rule();
}

int cmd_test(const std::string& input, const CommonTestOpts& o, const std::string& episodes_out) {
    QuarterlySeries raw = read_series_csv(input);
    auto [series, shift] = shift_positive(raw);
    if (o.log_spec) series = log_transform(series);

    const WindowRule rule = window_rule(o);
    const LagPolicy lags = LagPolicy::parse(o.lags);
    CvProvider provider;
    CvCache cache(o.cache_dir, o.workers);
    std::vector<double> levels = kDefaultCvLevels;
    if (std::find(levels.begin(), levels.end(), o.level) == levels.end())
        levels.push_back(o.level);
    std::sort(levels.begin(), levels.end());
    if (o.cv_source == "simulated") {
        const CvTable& table = cache.get(series.length(), rule.fraction(series.length()), lags,
                                         o.cv_reps, o.seed, levels);
        provider = [&table, &o](std::span<const double>) {
            return GateCv{table.gsadf_at(o.level), table.bsadf_at(o.level)};
        };
    } else {
        provider = [&o, &rule, &lags](std::span<const double> y) {
            WildBootstrapCv cv =
                wild_bootstrap_cv(y, rule, lags, o.bootstrap_reps, o.seed, o.level, o.workers);
            return GateCv{cv.gsadf_cv, std::move(cv.bsadf_cv)};
        };
    }

    SupResult s = sadf(series.values, rule, lags, o.workers);
    ExplosivenessResult r =
        test_and_datestamp(series.values, rule, lags, provider, o.min_duration);
    SeriesEpisodes quarters = to_quarter_episodes(r.episodes, series.start, series.length());

    std::cout << "series " << series.series_id << "  T=" << series.length();
    if (shift.c != 0.0) std::cout << "  shift=+" << csv::format_double(shift.c);
    if (o.log_spec) std::cout << "  log";
    std::cout << "\nsadf  " << csv::format_double(s.stat) << "\ngsadf " << csv::format_double(r.gsadf_stat)
              << "  cv(" << csv::format_double(o.level) << ") " << csv::format_double(r.gsadf_cv)
              << "  -> " << (r.gsadf_reject ? "explosive" : "not explosive") << "\n";
    for (const auto& e : quarters.episodes)
        std::cout << "episode " << e.start.str() << ".." << e.end_exclusive.prev().str()
                  << (e.open ? " (open)" : "") << "\n";
    if (r.diag.degenerate_windows > 0)
        std::cout << "degenerate windows skipped: " << r.diag.degenerate_windows << "\n";

    if (!episodes_out.empty()) {
        std::ofstream out(episodes_out);
        if (!out) throw std::runtime_error("cannot write " + episodes_out);
        out << "series_id,kind,start,end,open\n";
        for (const auto& e : quarters.episodes) {
            std::vector<std::string> cells = {series.series_id, "price", e.start.str(),
                                              e.end_exclusive.prev().str(), e.open ? "1" : "0"};
            csv::write_row(out, cells);
        }
    }
    return 0;
}

int cmd_cv(int T, const CommonTestOpts& o) {
    const WindowRule rule = window_rule(o);
    const LagPolicy lags = LagPolicy::parse(o.lags);
    CvCache cache(o.cache_dir, o.workers);
    std::vector<double> levels = kDefaultCvLevels;
    if (std::find(levels.begin(), levels.end(), o.level) == levels.end())
        levels.push_back(o.level);
    std::sort(levels.begin(), levels.end());
    const CvTable& table = cache.get(T, rule.fraction(T), lags, o.cv_reps, o.seed, levels);
    std::cout << "table " << CvCache::key(T, rule.fraction(T), lags, o.cv_reps, o.seed)
              << ".json\n";
    for (std::size_t i = 0; i < table.levels.size(); ++i)
        std::cout << "level " << csv::format_double(table.levels[i]) << "  sadf "
                  << csv::format_double(table.sadf_cv[i]) << "  gsadf "
                  << csv::format_double(table.gsadf_cv[i]) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explosive-episode detection in quarterly financial series"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI file");

    // test
    auto* test_cmd = app.add_subcommand("test", "Test one series file and date-stamp episodes");
    std::string test_input, episodes_out;
    CommonTestOpts test_opts;
    test_cmd->add_option("input", test_input, "Series CSV (quarter,value or value)")->required();
    test_cmd->add_option("--episodes-out", episodes_out, "Write episodes CSV here");
    add_common_test_opts(test_cmd, test_opts);

    // cv
    auto* cv_cmd = app.add_subcommand("cv", "Build or refresh a critical-value table");
    int cv_T = 0;
    CommonTestOpts cv_opts;
    cv_cmd->add_option("--T", cv_T, "Series length")->required();
    add_common_test_opts(cv_cmd, cv_opts);

    // dissect
    auto* dis_cmd = app.add_subcommand("dissect", "Full panel pipeline");
    std::string prices_path, funds_path, meta_path, out_dir;
    std::string spec_name = "fcfe1", aggregate = "post", second_input = "pre";
    std::vector<std::string> exchanges = {"3"};
    std::vector<std::string> ytd_fields = {"capex", "acq", "ltd_issue", "ltd_reduce"};
    int min_obs = kMinSeriesLength;
    CommonTestOpts dis_opts;
    dis_cmd->add_option("--prices", prices_path, "prices.csv")->required();
    dis_cmd->add_option("--fundamentals", funds_path, "fundamentals.csv")->required();
    dis_cmd->add_option("--meta", meta_path, "meta.csv")->required();
    dis_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
    dis_cmd->add_option("--spec", spec_name, "Fundamental: fcfe1, fcfe2, ni, div");
    dis_cmd->add_option("--min-obs", min_obs, "Minimum segment length");
    dis_cmd->add_option("--aggregate", aggregate, "sector_exuberance.csv flavor: post or pre")
        ->check(CLI::IsMember({"post", "pre"}));
    dis_cmd->add_option("--second-order-input", second_input,
                        "Aggregate the second-order test runs on: post or pre")
        ->check(CLI::IsMember({"post", "pre"}));
    dis_cmd->add_option("--exchange", exchanges, "Exchange codes to keep");
    dis_cmd->add_option("--ytd-fields", ytd_fields, "Statement fields arriving year-to-date");
    add_common_test_opts(dis_cmd, dis_opts);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate DGP series and power studies");
    std::string dgp_name = "random-walk", sim_out, power_test = "both";
    int sim_T = 100, power_reps = 0;
    std::uint64_t sim_seed = 42;
    double sigma = 1.0, y0 = 100.0, beta = 1.05;
    int ep_start = 1, ep_length = 0;
    EvansBubbleSpec evans;
    CommonTestOpts sim_opts;
    sim_cmd->add_option("--dgp", dgp_name, "random-walk, explosive-episode, or evans-bubble")
        ->check(CLI::IsMember({"random-walk", "explosive-episode", "evans-bubble"}));
    sim_cmd->add_option("--T", sim_T, "Series length");
    sim_cmd->add_option("--seed", sim_seed, "DGP seed");
    sim_cmd->add_option("--sigma", sigma, "Innovation scale");
    sim_cmd->add_option("--y0", y0, "Initial level (random walk / episode)");
    sim_cmd->add_option("--beta", beta, "Autoregressive root inside the episode");
    sim_cmd->add_option("--start", ep_start, "Episode start index");
    sim_cmd->add_option("--length", ep_length, "Episode length (default T/6)");
    sim_cmd->add_option("--r", evans.r, "Bubble growth rate");
    sim_cmd->add_option("--pi", evans.pi, "Per-period collapse probability above threshold");
    sim_cmd->add_option("--b", evans.b, "Collapse-regime threshold");
    sim_cmd->add_option("--zeta", evans.zeta, "Post-collapse base value");
    sim_cmd->add_option("--tau", evans.tau, "Lognormal shock scale");
    sim_cmd->add_option("--b0", evans.b0, "Initial bubble value");
    sim_cmd->add_option("--scale", evans.scale, "Bubble-to-price scale");
    sim_cmd->add_option("--f0", evans.f0, "Initial fundamental level");
    sim_cmd->add_option("--out", sim_out, "Write series CSV here");
    sim_cmd->add_option("--power-reps", power_reps, "Run a power study with this many reps");
    sim_cmd->add_option("--test", power_test, "Power study statistic: sadf, gsadf, both")
        ->check(CLI::IsMember({"sadf", "gsadf", "both"}));
    add_common_test_opts(sim_cmd, sim_opts, /*own_seed=*/false);

    // plotdata
    auto* plot_cmd = app.add_subcommand("plotdata", "Pivot sector_exuberance.csv for charting");
    std::string exuberance_path, plot_out_dir;
    plot_cmd->add_option("--exuberance", exuberance_path, "sector_exuberance.csv")->required();
    plot_cmd->add_option("--out-dir", plot_out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*test_cmd) return cmd_test(test_input, test_opts, episodes_out);
        if (*cv_cmd) return cmd_cv(cv_T, cv_opts);

        if (*dis_cmd) {
            RunConfig config;
            config.fund_spec = parse_fundamental_spec(spec_name);
            config.lags = LagPolicy::parse(dis_opts.lags);
            config.rule = window_rule(dis_opts);
            config.cv_source = dis_opts.cv_source == "simulated"
                                   ? RunConfig::CvSource::Simulated
                                   : RunConfig::CvSource::WildBootstrap;
            config.quantile = dis_opts.level;
            config.seed = dis_opts.seed;
            config.workers = dis_opts.workers;
            config.log_spec = dis_opts.log_spec;
            config.min_obs = min_obs;
            config.cv_reps = dis_opts.cv_reps;
            config.bootstrap_reps = dis_opts.bootstrap_reps;
            config.min_episode_duration = dis_opts.min_duration;
            config.aggregate_output = aggregate == "post" ? ExuberanceFlavor::PostCriterion
                                                          : ExuberanceFlavor::PreCriterion;
            config.second_order_input = second_input == "post"
                                            ? ExuberanceFlavor::PostCriterion
                                            : ExuberanceFlavor::PreCriterion;
            config.ingest.exchange_keep =
                std::set<std::string>(exchanges.begin(), exchanges.end());
            config.ingest.ytd_fields = ytd_fields;
            config.cache_dir = dis_opts.cache_dir;

            StockPanel panel = ingest(prices_path, funds_path, meta_path, config.ingest);
            DissectionResult result = dissect_to_dir(panel, config, out_dir);
            long long n_eps = 0;
            for (const auto& s : result.series)
                n_eps += static_cast<long long>(s.quarters.episodes.size());
            std::cout << "stocks tested: " << result.manifest["dissection"]["stocks_tested"]
                      << "\nseries tested: " << result.series.size()
                      << "\nepisodes dated: " << n_eps
                      << "\nverdicts: " << result.verdicts.size()
                      << "\noutputs: " << fs::path(out_dir).string() << "\n";
            return 0;
        }

        if (*sim_cmd) {
            DgpSpec spec;
            spec.seed = sim_seed;
            if (dgp_name == "random-walk") {
                spec.variant = RandomWalkSpec{sim_T, sigma, y0};
            } else if (dgp_name == "explosive-episode") {
                int len = ep_length > 0 ? ep_length : std::max(1, sim_T / 6);
                spec.variant = ExplosiveEpisodeSpec{sim_T, beta, ep_start, len, sigma, y0};
            } else {
                evans.T = sim_T;
                evans.sigma = sigma;
                spec.variant = evans;
            }

            QuarterlySeries series = generate(spec);
            if (!sim_out.empty()) {
                write_series_csv(sim_out, series);
                std::cout << "wrote " << sim_out << " (T=" << series.length() << ")\n";
            }

            if (power_reps > 0) {
                const WindowRule rule = window_rule(sim_opts);
                const LagPolicy lags = LagPolicy::parse(sim_opts.lags);
                CvCache cache(sim_opts.cache_dir, sim_opts.workers);
                const CvTable& table = cache.get(sim_T, rule.fraction(sim_T), lags,
                                                 sim_opts.cv_reps, sim_opts.seed,
                                                 kDefaultCvLevels);
                auto print = [](const PowerReport& r) {
                    std::cout << r.test << " rejection rate "
                              << csv::format_double(r.rejection_rate) << " (" << r.reps
                              << " reps, cv " << csv::format_double(r.cv_used) << ")\n";
                };
                if (power_test == "both") {
                    PowerPair pair =
                        power_study_pair(spec, table, power_reps, sim_opts.workers);
                    print(pair.sadf);
                    print(pair.gsadf);
                } else {
                    TestKind kind =
                        power_test == "sadf" ? TestKind::Sadf : TestKind::Gsadf;
                    print(power_study(spec, kind, table, power_reps, sim_opts.workers));
                }
            } else if (sim_out.empty()) {
                std::cout << "quarter,value\n";
                for (int i = 0; i < series.length(); ++i)
                    std::cout << series.quarter_at(i).str() << ","
                              << csv::format_double(series.values[i]) << "\n";
            }
            return 0;
        }

        if (*plot_cmd) {
            csv::Table t = csv::read_file(exuberance_path);
            int c_sector = t.column("sector"), c_quarter = t.column("quarter");
            int c_count = t.column("count"), c_mcap = t.column("mcap");
            if (c_sector < 0 || c_quarter < 0 || c_count < 0 || c_mcap < 0)
                throw std::invalid_argument("plotdata: expected sector,quarter,count,mcap");
            std::set<std::string> sectors;
            std::set<int> quarter_idx;
            std::map<std::pair<std::string, int>, std::pair<std::string, std::string>> cells;
            for (const auto& row : t.rows) {
                auto parsed = Quarter::parse(row[c_quarter]);
                if (!parsed)
                    throw std::invalid_argument("plotdata: bad quarter '" + row[c_quarter] + "'");
                int qi = parsed->index();
                sectors.insert(row[c_sector]);
                quarter_idx.insert(qi);
                cells[{row[c_sector], qi}] = {row[c_count], row[c_mcap]};
            }
            fs::create_directories(plot_out_dir);
            auto write_wide = [&](const std::string& name, bool mcap) {
                std::ofstream out(fs::path(plot_out_dir) / name);
                std::vector<std::string> header = {"quarter"};
                header.insert(header.end(), sectors.begin(), sectors.end());
                csv::write_row(out, header);
                for (int qi : quarter_idx) {
                    std::vector<std::string> row = {Quarter::from_index(qi).str()};
                    for (const auto& sec : sectors) {
                        auto it = cells.find({sec, qi});
                        if (it == cells.end())
                            row.push_back("0");
                        else
                            row.push_back(mcap ? it->second.second : it->second.first);
                    }
                    csv::write_row(out, row);
                }
            };
            write_wide("plot_count.csv", false);
            write_wide("plot_mcap.csv", true);
            std::cout << "wrote plot_count.csv and plot_mcap.csv in " << plot_out_dir << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
