#include "bubbletk/recursive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bubbletk/parallel.hpp"
#include "bubbletk/series.hpp"

namespace bubbletk {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

WindowRule WindowRule::explicit_r0(double r0) {
    if (!(r0 > 0.0) || r0 > 1.0)
        throw std::invalid_argument("WindowRule: r0 must lie in (0, 1]");
    return WindowRule{Derivation::Explicit, r0};
}

double WindowRule::fraction(int T) const {
    if (derivation == Derivation::Explicit) return r0;
    if (T < 1) throw std::invalid_argument("WindowRule: T must be >= 1");
    return 0.01 + 1.8 / std::sqrt(static_cast<double>(T));
}

int min_window(int T) { return min_window(T, WindowRule::auto_rule(), LagPolicy::fixed(0)); }

int min_window(int T, const WindowRule& rule, const LagPolicy& lags) {
    if (T < kMinSeriesLength)
        throw std::invalid_argument("min_window: need at least " +
                                    std::to_string(kMinSeriesLength) + " observations, got " +
                                    std::to_string(T));
    double frac = rule.fraction(T);
    // Guard against 0.19*100 = 19.000000000000004 style roundoff before ceil.
    int w0 = static_cast<int>(std::ceil(frac * T - 1e-9));
    w0 = std::min(w0, T);
    int k_floor = 0;
    switch (lags.kind) {
        case LagPolicy::Kind::Fixed: k_floor = lags.k; break;
        case LagPolicy::Kind::Schwert: k_floor = schwert_lag(T); break;
        case LagPolicy::Kind::Aic:
        case LagPolicy::Kind::Bic: k_floor = lags.k_max; break;
    }
    return std::max(w0, k_floor + 3);
}

namespace {

struct WindowStat {
    double stat = kNaN;  // NaN when degenerate
    bool perfect = false;
    bool degenerate = false;
};

WindowStat one_window(std::span<const double> y, int s, int e, const LagPolicy& lags,
                      int k_resolved) {
    WindowStat w;
    try {
        auto window = y.subspan(s, e - s);
        AdfResult r = lags.per_window() ? fit_adf_policy(window, lags) : fit_adf(window, k_resolved);
        w.stat = r.stat;
        w.perfect = r.perfect_fit;
    } catch (const DegenerateFit&) {
        w.degenerate = true;
    }
    return w;
}

}  // namespace

SweepResult run_sweep(std::span<const double> series, const WindowRule& rule,
                      const LagPolicy& lags, int workers) {
    const int T = static_cast<int>(series.size());
    const int w0 = min_window(T, rule, lags);
    if (w0 > T)
        throw std::invalid_argument("run_sweep: minimum window " + std::to_string(w0) +
                                    " exceeds series length " + std::to_string(T));
    for (double v : series)
        if (!std::isfinite(v))
            throw std::invalid_argument("run_sweep: non-finite value in series");

    int k_resolved = 0;
    if (!lags.per_window())
        k_resolved = lags.kind == LagPolicy::Kind::Schwert ? schwert_lag(T) : lags.k;

    const int n_endpoints = T - w0 + 1;
    SweepResult out;
    out.sadf_seq.endpoints.resize(n_endpoints);
    out.sadf_seq.stats.resize(n_endpoints);
    out.bsadf_seq.endpoints.resize(n_endpoints);
    out.bsadf_seq.stats.resize(n_endpoints);
    std::vector<SweepDiagnostics> diag(n_endpoints);

    parallel_for(n_endpoints, workers, [&](int i) {
        const int e = w0 + i;
        double best = kNaN;
        double anchored = kNaN;
        for (int s = 0; s <= e - w0; ++s) {
            WindowStat w = one_window(series, s, e, lags, k_resolved);
            if (w.degenerate) {
                ++diag[i].degenerate_windows;
                continue;
            }
            if (w.perfect) ++diag[i].perfect_fit_windows;
            if (s == 0) anchored = w.stat;
            if (std::isnan(best) || w.stat > best) best = w.stat;
        }
        out.sadf_seq.endpoints[i] = e;
        out.sadf_seq.stats[i] = anchored;
        out.bsadf_seq.endpoints[i] = e;
        out.bsadf_seq.stats[i] = best;
    });

    double sup_sadf = kNaN;
    double sup_gsadf = kNaN;
    for (int i = 0; i < n_endpoints; ++i) {
        double a = out.sadf_seq.stats[i];
        double b = out.bsadf_seq.stats[i];
        if (!std::isnan(a) && (std::isnan(sup_sadf) || a > sup_sadf)) sup_sadf = a;
        if (!std::isnan(b) && (std::isnan(sup_gsadf) || b > sup_gsadf)) sup_gsadf = b;
        out.diag.degenerate_windows += diag[i].degenerate_windows;
        out.diag.perfect_fit_windows += diag[i].perfect_fit_windows;
    }
    out.sadf_stat = sup_sadf;
    out.gsadf_stat = sup_gsadf;
    return out;
}

SupResult sadf(std::span<const double> series, const WindowRule& rule, const LagPolicy& lags,
               int workers) {
    const int T = static_cast<int>(series.size());
    const int w0 = min_window(T, rule, lags);
    if (w0 > T)
        throw std::invalid_argument("sadf: minimum window " + std::to_string(w0) +
                                    " exceeds series length " + std::to_string(T));
    for (double v : series)
        if (!std::isfinite(v)) throw std::invalid_argument("sadf: non-finite value in series");

    int k_resolved = 0;
    if (!lags.per_window())
        k_resolved = lags.kind == LagPolicy::Kind::Schwert ? schwert_lag(T) : lags.k;

    const int n_endpoints = T - w0 + 1;
    SupResult out;
    out.seq.endpoints.resize(n_endpoints);
    out.seq.stats.resize(n_endpoints);
    std::vector<SweepDiagnostics> diag(n_endpoints);

    parallel_for(n_endpoints, workers, [&](int i) {
        const int e = w0 + i;
        WindowStat w = one_window(series, 0, e, lags, k_resolved);
        if (w.degenerate) ++diag[i].degenerate_windows;
        if (w.perfect) ++diag[i].perfect_fit_windows;
        out.seq.endpoints[i] = e;
        out.seq.stats[i] = w.stat;
    });

    double sup = kNaN;
    for (int i = 0; i < n_endpoints; ++i) {
        double a = out.seq.stats[i];
        if (!std::isnan(a) && (std::isnan(sup) || a > sup)) sup = a;
        out.diag.degenerate_windows += diag[i].degenerate_windows;
        out.diag.perfect_fit_windows += diag[i].perfect_fit_windows;
    }
    out.stat = sup;
    return out;
}

SupResult gsadf(std::span<const double> series, const WindowRule& rule, const LagPolicy& lags,
                int workers) {
    SweepResult sweep = run_sweep(series, rule, lags, workers);
    SupResult out;
    out.stat = sweep.gsadf_stat;
    out.seq = std::move(sweep.bsadf_seq);
    out.diag = sweep.diag;
    return out;
}

StatSequence bsadf_seq(std::span<const double> series, const WindowRule& rule,
                       const LagPolicy& lags, int workers) {
    return run_sweep(series, rule, lags, workers).bsadf_seq;
}

EpisodeSet datestamp(const StatSequence& seq, const StatSequence& cv, int min_duration) {
    if (seq.endpoints != cv.endpoints)
        throw std::invalid_argument("datestamp: stat and critical-value endpoint grids differ");
    if (seq.size() != static_cast<int>(seq.stats.size()) ||
        cv.size() != static_cast<int>(cv.stats.size()))
        throw std::invalid_argument("datestamp: malformed StatSequence");

    EpisodeSet out;
    bool in_episode = false;
    Episode cur;
    for (int i = 0; i < seq.size(); ++i) {
        double s = seq.stats[i];
        double c = cv.stats[i];
        if (std::isnan(s) || std::isnan(c)) continue;
        if (!in_episode && s > c) {
            in_episode = true;
            cur = Episode{seq.endpoints[i], 0, false};
        } else if (in_episode && s < c) {
            cur.end = seq.endpoints[i];
            if (cur.duration() >= min_duration) out.episodes.push_back(cur);
            in_episode = false;
        }
    }
    if (in_episode) {
        cur.end = seq.endpoints.back() + 1;
        cur.open = true;
        if (cur.duration() >= min_duration) out.episodes.push_back(cur);
    }
    return out;
}

EpisodeSet datestamp(const StatSequence& seq, double cv, int min_duration) {
    StatSequence flat;
    flat.endpoints = seq.endpoints;
    flat.stats.assign(seq.endpoints.size(), cv);
    return datestamp(seq, flat, min_duration);
}

}  // namespace bubbletk
