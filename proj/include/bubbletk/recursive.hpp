#pragma once

#include <span>
#include <string>
#include <vector>

#include "bubbletk/adf.hpp"

namespace bubbletk {

// Minimum-window rule for the recursive test family. Auto derives the
// window fraction from the sample size; Explicit pins it.
struct WindowRule {
    enum class Derivation { Auto, Explicit };
    Derivation derivation = Derivation::Auto;
    double r0 = 0.0;  // used when Explicit; must lie in (0, 1]

    static WindowRule auto_rule() { return {}; }
    static WindowRule explicit_r0(double r0);

    // Fraction for a series of length T: 0.01 + 1.8/sqrt(T) under Auto.
    double fraction(int T) const;
};

// Smallest admissible window length for a series of T observations,
// ceil(r0 * T). The overload folds in the lag-policy floor w0 >= k + 3.
int min_window(int T);
int min_window(int T, const WindowRule& rule, const LagPolicy& lags);

// One statistic per window endpoint. Endpoints are window lengths
// (observation counts), running from w0 to T. A NaN stat marks an endpoint
// where every admissible window was degenerate.
struct StatSequence {
    std::vector<int> endpoints;
    std::vector<double> stats;

    int size() const { return static_cast<int>(endpoints.size()); }
};

struct SweepDiagnostics {
    long long degenerate_windows = 0;
    long long perfect_fit_windows = 0;
};

struct SupResult {
    double stat = 0.0;
    StatSequence seq;
    SweepDiagnostics diag;
};

// One pass over every admissible (start, endpoint) window, yielding all four
// products of the recursive family at once. gsadf_stat is the max over the
// bsadf sequence by construction.
struct SweepResult {
    double sadf_stat = 0.0;
    double gsadf_stat = 0.0;
    StatSequence sadf_seq;   // anchored windows [0, e)
    StatSequence bsadf_seq;  // sup over starts for each endpoint e
    SweepDiagnostics diag;
};

SweepResult run_sweep(std::span<const double> series, const WindowRule& rule,
                      const LagPolicy& lags, int workers = 1);

SupResult sadf(std::span<const double> series, const WindowRule& rule, const LagPolicy& lags,
               int workers = 1);
SupResult gsadf(std::span<const double> series, const WindowRule& rule, const LagPolicy& lags,
                int workers = 1);
StatSequence bsadf_seq(std::span<const double> series, const WindowRule& rule,
                       const LagPolicy& lags, int workers = 1);

// A spell of consecutive endpoints whose stat exceeds the critical value.
// Half-open in endpoint units: endpoints start..end-1 are explosive, and end
// is the first endpoint that fell back below (for open episodes, one past
// the final endpoint).
struct Episode {
    int start = 0;
    int end = 0;
    bool open = false;

    int duration() const { return end - start; }
};

struct EpisodeSet {
    std::string series_id;
    std::vector<Episode> episodes;
};

// Scans endpoints in order: an episode opens at the first endpoint with
// stat > cv, closes at the first later endpoint with stat < cv, and the scan
// repeats for further episodes. NaN stats are transparent: they neither open
// nor close. Episodes shorter than min_duration endpoints are dropped.
EpisodeSet datestamp(const StatSequence& seq, const StatSequence& cv, int min_duration = 0);
EpisodeSet datestamp(const StatSequence& seq, double cv, int min_duration = 0);

}  // namespace bubbletk
