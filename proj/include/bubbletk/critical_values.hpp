#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bubbletk/recursive.hpp"

namespace bubbletk {

// What null distribution a CvTable was simulated from. d and eta document
// the asymptotically vanishing drift convention; the simulated null is the
// driftless random walk, so both stay 0.
struct NullSpec {
    int T = 0;
    double r0 = 0.0;
    int reps = 0;
    std::uint64_t seed = 0;
    double d = 0.0;
    double eta = 0.0;

    void validate() const;
};

// Empirical null quantiles for the whole recursive family on one endpoint
// grid. bsadf_cv[i] is the per-endpoint sequence for levels[i].
struct CvTable {
    std::vector<double> levels;
    std::vector<double> sadf_cv;
    std::vector<double> gsadf_cv;
    std::vector<int> endpoints;
    std::vector<std::vector<double>> bsadf_cv;
    NullSpec provenance;
    std::string lags;  // LagPolicy::str() of the policy simulated under

    int level_index(double level) const;  // throws when level absent
    double sadf_at(double level) const { return sadf_cv[level_index(level)]; }
    double gsadf_at(double level) const { return gsadf_cv[level_index(level)]; }
    StatSequence bsadf_at(double level) const;

    nlohmann::json to_json() const;
    static CvTable from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static CvTable load(const std::filesystem::path& path);
};

// Linear-interpolation empirical quantile (the common "type 7" definition:
// h = (n-1)p on the sorted sample). NaNs are dropped first; an all-NaN or
// empty sample is rejected.
double quantile_type7(std::vector<double> sample, double p);

inline const std::vector<double> kDefaultCvLevels = {0.90, 0.95, 0.99};

// Simulates `spec.reps` driftless Gaussian random walks (y_0 = 0, unit
// innovation variance), sweeps each, and tabulates empirical quantiles of
// SADF, GSADF, and per-endpoint BSADF. Deterministic in (spec.seed, spec)
// for any worker count: replication j draws from a seed derived from
// (seed, j).
CvTable simulate_null_cv(const NullSpec& spec, const LagPolicy& lags,
                         std::vector<double> levels = kDefaultCvLevels, int workers = 1);

struct WildBootstrapCv {
    double gsadf_cv = 0.0;
    StatSequence bsadf_cv;
    int reps = 0;
    double level = 0.0;
};

// Heteroskedasticity-robust critical values for one observed series: fits
// the ADF null regression with the unit root imposed (gamma = 0), recolors
// its residuals with iid Rademacher signs, rebuilds each bootstrap path from
// the observed initial values by cumulating the recolored increments, and
// returns empirical quantiles of GSADF and the BSADF sequence across
// replications. Endpoints degenerate in every replication carry NaN critical
// values (transparent downstream); only an entirely degenerate GSADF sample
// is an error.
WildBootstrapCv wild_bootstrap_cv(std::span<const double> series, const WindowRule& rule,
                                  const LagPolicy& lags, int reps = 200, std::uint64_t seed = 0,
                                  double level = 0.95, int workers = 1);

}  // namespace bubbletk
