#include "bubbletk/dissect.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace bubbletk {

SeriesEpisodes to_quarter_episodes(const EpisodeSet& eps, Quarter series_start, int series_len) {
    SeriesEpisodes out;
    out.series_id = eps.series_id;
    out.grid_start = series_start;
    out.grid_end_exclusive = series_start.plus(series_len);
    for (const Episode& e : eps.episodes) {
        if (e.start < 1 || e.end - 1 > series_len)
            throw std::invalid_argument("to_quarter_episodes: episode outside the series");
        out.episodes.push_back(QuarterInterval{series_start.plus(e.start - 1),
                                               series_start.plus(e.end - 1), e.open});
    }
    return out;
}

ExplosivenessResult test_and_datestamp(std::span<const double> series, const WindowRule& rule,
                                       const LagPolicy& lags, const CvProvider& cv,
                                       int min_duration) {
    SweepResult sweep = run_sweep(series, rule, lags, 1);
    ExplosivenessResult out;
    out.gsadf_stat = sweep.gsadf_stat;
    out.diag = sweep.diag;
    if (std::isnan(sweep.gsadf_stat)) {
        // Every window degenerate (constant series): nothing to test.
        out.gsadf_cv = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    GateCv gate = cv(series);
    out.gsadf_cv = gate.gsadf_cv;
    out.gsadf_reject = sweep.gsadf_stat > gate.gsadf_cv;
    if (out.gsadf_reject)
        out.episodes = datestamp(sweep.bsadf_seq, gate.bsadf_cv, min_duration);
    return out;
}

StockVerdict classify_bubbles(std::string stock_id, FundamentalSpec spec,
                              std::span<const SeriesEpisodes> price_segments,
                              std::span<const SeriesEpisodes> fund_segments) {
    StockVerdict verdict;
    verdict.stock_id = std::move(stock_id);
    verdict.spec = spec;

    // The fundamental condition looks at every dated fundamental episode of
    // the stock, across segments: none may touch quarter t-1 or later.
    // Episode quarters are half-open, so "touches s >= t-1" means
    // end_exclusive - 1 >= t - 1, i.e. end_exclusive >= t.
    std::vector<QuarterInterval> fund_eps;
    for (const auto& seg : fund_segments)
        fund_eps.insert(fund_eps.end(), seg.episodes.begin(), seg.episodes.end());

    for (const auto& pseg : price_segments) {
        for (Quarter q = pseg.grid_start; q < pseg.grid_end_exclusive; q = q.next()) {
            QuarterFlags f;
            f.price_explosive = std::any_of(pseg.episodes.begin(), pseg.episodes.end(),
                                            [&](const QuarterInterval& e) { return e.covers(q); });
            bool in_fund_grid = std::any_of(
                fund_segments.begin(), fund_segments.end(), [&](const SeriesEpisodes& seg) {
                    return seg.grid_start <= q && q < seg.grid_end_exclusive;
                });
            if (in_fund_grid) {
                f.fundamental_explosive = std::any_of(
                    fund_eps.begin(), fund_eps.end(),
                    [&](const QuarterInterval& e) { return e.covers(q); });
                bool fund_clear = std::none_of(
                    fund_eps.begin(), fund_eps.end(),
                    [&](const QuarterInterval& e) { return q <= e.end_exclusive; });
                f.in_bubble = f.price_explosive && fund_clear;
            }
            verdict.flags[q] = f;
        }
    }
    return verdict;
}

std::string exuberance_flavor_name(ExuberanceFlavor flavor) {
    return flavor == ExuberanceFlavor::PostCriterion ? "post-criterion" : "pre-criterion";
}

AggregateResult aggregate_sector(
    std::span<const StockVerdict> verdicts,
    const std::function<std::string(const std::string&)>& sector_of,
    const std::function<std::optional<double>(const std::string&, Quarter)>& mcap_of,
    ExuberanceFlavor flavor) {
    AggregateResult out;
    bool any = false;
    Quarter lo{}, hi{};
    std::set<std::string> sector_names;
    for (const auto& v : verdicts) {
        if (v.flags.empty()) continue;
        sector_names.insert(sector_of(v.stock_id));
        Quarter first = v.flags.begin()->first;
        Quarter last = v.flags.rbegin()->first;
        if (!any) {
            lo = first;
            hi = last;
            any = true;
        } else {
            if (first < lo) lo = first;
            if (hi < last) hi = last;
        }
    }
    if (!any) return out;

    out.grid_start = lo;
    out.grid_len = (hi - lo) + 1;
    for (const auto& name : sector_names) {
        SectorExuberance s;
        s.sector = name;
        s.start = lo;
        s.count.assign(out.grid_len, 0);
        s.mcap.assign(out.grid_len, 0.0);
        out.sectors.push_back(std::move(s));
    }

    auto sector_slot = [&](const std::string& name) -> SectorExuberance& {
        auto it = std::lower_bound(out.sectors.begin(), out.sectors.end(), name,
                                   [](const SectorExuberance& s, const std::string& n) {
                                       return s.sector < n;
                                   });
        return *it;
    };

    for (const auto& v : verdicts) {
        if (v.flags.empty()) continue;
        SectorExuberance& slot = sector_slot(sector_of(v.stock_id));
        for (const auto& [q, f] : v.flags) {
            bool flagged = flavor == ExuberanceFlavor::PostCriterion
                               ? f.in_bubble.value_or(false)
                               : f.price_explosive;
            if (!flagged) continue;
            int i = q - lo;
            slot.count[i] += 1;
            if (auto m = mcap_of(v.stock_id, q))
                slot.mcap[i] += *m;
            else
                ++out.mcap_missing;
        }
    }
    return out;
}

SecondOrderResult second_order_explosiveness(const SectorExuberance& agg, const WindowRule& rule,
                                             const LagPolicy& lags, const CvProvider& cv,
                                             int min_duration) {
    SecondOrderResult out;
    out.sector = agg.sector;
    if (agg.length() < kMinSeriesLength) {
        out.skipped = true;
        out.skip_reason = "aggregate length " + std::to_string(agg.length()) + " < " +
                          std::to_string(kMinSeriesLength);
        return out;
    }
    auto [shifted, shift] = shift_positive(agg.mcap);
    out.shift = shift;
    out.test = test_and_datestamp(shifted, rule, lags, cv, min_duration);
    out.test.episodes.series_id = agg.sector;
    out.quarters = to_quarter_episodes(out.test.episodes, agg.start, agg.length());
    return out;
}

}  // namespace bubbletk
