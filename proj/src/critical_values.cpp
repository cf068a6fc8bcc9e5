#include "bubbletk/critical_values.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "bubbletk/parallel.hpp"
#include "bubbletk/rng.hpp"
#include "bubbletk/series.hpp"

namespace bubbletk {

void NullSpec::validate() const {
    if (T < kMinSeriesLength)
        throw std::invalid_argument("NullSpec: T must be >= " + std::to_string(kMinSeriesLength));
    if (!(r0 > 0.0) || r0 > 1.0) throw std::invalid_argument("NullSpec: r0 must lie in (0, 1]");
    if (reps < 100) throw std::invalid_argument("NullSpec: reps must be >= 100");
}

int CvTable::level_index(double level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] == level) return static_cast<int>(i);
    throw std::invalid_argument("CvTable: level " + std::to_string(level) + " not tabulated");
}

StatSequence CvTable::bsadf_at(double level) const {
    StatSequence seq;
    seq.endpoints = endpoints;
    seq.stats = bsadf_cv[level_index(level)];
    return seq;
}

nlohmann::json CvTable::to_json() const {
    nlohmann::json j;
    j["T"] = provenance.T;
    j["r0"] = provenance.r0;
    j["reps"] = provenance.reps;
    j["seed"] = provenance.seed;
    j["drift_d"] = provenance.d;
    j["drift_eta"] = provenance.eta;
    j["lags"] = lags;
    j["levels"] = levels;
    j["endpoints"] = endpoints;
    j["sadf_cv"] = sadf_cv;
    j["gsadf_cv"] = gsadf_cv;
    j["bsadf_cv"] = bsadf_cv;
    return j;
}

CvTable CvTable::from_json(const nlohmann::json& j) {
    CvTable t;
    t.provenance.T = j.at("T").get<int>();
    t.provenance.r0 = j.at("r0").get<double>();
    t.provenance.reps = j.at("reps").get<int>();
    t.provenance.seed = j.at("seed").get<std::uint64_t>();
    t.provenance.d = j.at("drift_d").get<double>();
    t.provenance.eta = j.at("drift_eta").get<double>();
    t.lags = j.at("lags").get<std::string>();
    t.levels = j.at("levels").get<std::vector<double>>();
    t.endpoints = j.at("endpoints").get<std::vector<int>>();
    t.sadf_cv = j.at("sadf_cv").get<std::vector<double>>();
    t.gsadf_cv = j.at("gsadf_cv").get<std::vector<double>>();
    t.bsadf_cv = j.at("bsadf_cv").get<std::vector<std::vector<double>>>();
    if (t.sadf_cv.size() != t.levels.size() || t.gsadf_cv.size() != t.levels.size() ||
        t.bsadf_cv.size() != t.levels.size())
        throw std::invalid_argument("CvTable: level-indexed arrays disagree with levels");
    for (const auto& row : t.bsadf_cv)
        if (row.size() != t.endpoints.size())
            throw std::invalid_argument("CvTable: bsadf_cv row length disagrees with endpoints");
    return t;
}

void CvTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("CvTable: cannot write " + path.string());
    out << to_json().dump(1) << '\n';
}

CvTable CvTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("CvTable: cannot read " + path.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

double quantile_type7(std::vector<double> sample, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_type7: p outside [0, 1]");
    std::erase_if(sample, [](double v) { return std::isnan(v); });
    if (sample.empty()) throw std::invalid_argument("quantile_type7: empty sample");
    std::sort(sample.begin(), sample.end());
    const double h = (sample.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sample.size()) return sample.back();
    const double frac = h - static_cast<double>(lo);
    return sample[lo] + frac * (sample[lo + 1] - sample[lo]);
}

CvTable simulate_null_cv(const NullSpec& spec, const LagPolicy& lags, std::vector<double> levels,
                         int workers) {
    spec.validate();
    if (levels.empty()) throw std::invalid_argument("simulate_null_cv: no quantile levels");
    std::sort(levels.begin(), levels.end());

    const WindowRule rule = WindowRule::explicit_r0(spec.r0);
    const int w0 = min_window(spec.T, rule, lags);
    if (w0 > spec.T)
        throw std::invalid_argument("simulate_null_cv: minimum window exceeds T");
    const int n_endpoints = spec.T - w0 + 1;

    std::vector<double> sadf_draws(spec.reps);
    std::vector<double> gsadf_draws(spec.reps);
    std::vector<std::vector<double>> bsadf_draws(spec.reps);

    parallel_for(spec.reps, workers, [&](int rep) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(rep)));
        std::vector<double> y(spec.T);
        double level_accum = 0.0;
        for (int t = 0; t < spec.T; ++t) {
            level_accum += rng.gaussian();
            y[t] = level_accum;
        }
        SweepResult sweep = run_sweep(y, rule, lags, 1);
        sadf_draws[rep] = sweep.sadf_stat;
        gsadf_draws[rep] = sweep.gsadf_stat;
        bsadf_draws[rep] = std::move(sweep.bsadf_seq.stats);
    });

    CvTable table;
    table.levels = levels;
    table.provenance = spec;
    table.lags = lags.str();
    table.endpoints.resize(n_endpoints);
    for (int i = 0; i < n_endpoints; ++i) table.endpoints[i] = w0 + i;

    for (double level : levels) {
        table.sadf_cv.push_back(quantile_type7(sadf_draws, level));
        table.gsadf_cv.push_back(quantile_type7(gsadf_draws, level));
        std::vector<double> row(n_endpoints);
        std::vector<double> column(spec.reps);
        for (int i = 0; i < n_endpoints; ++i) {
            for (int rep = 0; rep < spec.reps; ++rep) column[rep] = bsadf_draws[rep][i];
            row[i] = quantile_type7(column, level);
        }
        table.bsadf_cv.push_back(std::move(row));
    }
    return table;
}

namespace {

// Residuals of  dy_t = alpha + sum_{i=1..k} delta_i dy_{t-i} + e_t,
// the ADF regression with the unit root imposed.
std::vector<double> null_regression_residuals(std::span<const double> y, int k) {
    const int T = static_cast<int>(y.size());
    const int n = T - 1 - k;
    if (n < 3)
        throw std::invalid_argument("wild_bootstrap_cv: series too short for the lag policy");
    const int p = k + 1;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd z(n);
    for (int t = k + 1; t < T; ++t) {
        const int r = t - k - 1;
        z(r) = y[t] - y[t - 1];
        x(r, 0) = 1.0;
        for (int i = 1; i <= k; ++i) x(r, i) = y[t - i] - y[t - i - 1];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p)
        throw std::invalid_argument("wild_bootstrap_cv: singular null regression");
    Eigen::VectorXd resid = z - x * qr.solve(z);
    return {resid.data(), resid.data() + resid.size()};
}

}  // namespace

WildBootstrapCv wild_bootstrap_cv(std::span<const double> series, const WindowRule& rule,
                                  const LagPolicy& lags, int reps, std::uint64_t seed,
                                  double level, int workers) {
    const int T = static_cast<int>(series.size());
    if (T < kMinSeriesLength)
        throw std::invalid_argument("wild_bootstrap_cv: series shorter than " +
                                    std::to_string(kMinSeriesLength));
    if (reps < 1) throw std::invalid_argument("wild_bootstrap_cv: reps must be >= 1");
    if (!(level > 0.0) || level >= 1.0)
        throw std::invalid_argument("wild_bootstrap_cv: level must lie in (0, 1)");
    for (double v : series)
        if (!std::isfinite(v))
            throw std::invalid_argument("wild_bootstrap_cv: non-finite value in series");

    const int k = select_lags(lags, series);
    const std::vector<double> resid = null_regression_residuals(series, k);
    const int w0 = min_window(T, rule, lags);
    if (w0 > T) throw std::invalid_argument("wild_bootstrap_cv: minimum window exceeds length");
    const int n_endpoints = T - w0 + 1;

    std::vector<double> gsadf_draws(reps);
    std::vector<std::vector<double>> bsadf_draws(reps);

    parallel_for(reps, workers, [&](int rep) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
        std::vector<double> y(series.begin(), series.end());
        for (std::size_t i = 0; i < resid.size(); ++i) {
            const std::size_t t = k + 1 + i;
            y[t] = y[t - 1] + resid[i] * rng.rademacher();
        }
        SweepResult sweep = run_sweep(y, rule, lags, 1);
        gsadf_draws[rep] = sweep.gsadf_stat;
        bsadf_draws[rep] = std::move(sweep.bsadf_seq.stats);
    });

    WildBootstrapCv out;
    out.reps = reps;
    out.level = level;
    out.gsadf_cv = quantile_type7(gsadf_draws, level);
    out.bsadf_cv.endpoints.resize(n_endpoints);
    out.bsadf_cv.stats.resize(n_endpoints);
    std::vector<double> column(reps);
    for (int i = 0; i < n_endpoints; ++i) {
        out.bsadf_cv.endpoints[i] = w0 + i;
        bool any_finite = false;
        for (int rep = 0; rep < reps; ++rep) {
            column[rep] = bsadf_draws[rep][i];
            any_finite = any_finite || !std::isnan(column[rep]);
        }
        // An endpoint degenerate in every replication (flat stretches of the
        // original series reproduce themselves in every bootstrap path) has
        // no null distribution; its NaN is transparent in date-stamping.
        out.bsadf_cv.stats[i] =
            any_finite ? quantile_type7(column, level) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace bubbletk
