#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bubbletk/critical_values.hpp"
#include "bubbletk/fundamentals.hpp"
#include "bubbletk/quarter.hpp"
#include "bubbletk/recursive.hpp"
#include "bubbletk/series.hpp"

namespace bubbletk {

// [start, end_exclusive) in calendar quarters.
struct QuarterInterval {
    Quarter start;
    Quarter end_exclusive;
    bool open = false;

    bool covers(Quarter q) const { return start <= q && q < end_exclusive; }
};

// Dated episodes of one tested series segment, with the grid the segment
// lives on (flags are only defined inside the grid).
struct SeriesEpisodes {
    std::string series_id;
    Quarter grid_start;
    Quarter grid_end_exclusive;
    std::vector<QuarterInterval> episodes;
};

// Converts endpoint-unit episodes (endpoint e = window of the first e
// observations, so e corresponds to observation e-1) onto the calendar grid
// of the series they were computed from.
SeriesEpisodes to_quarter_episodes(const EpisodeSet& eps, Quarter series_start, int series_len);

// Critical values for one concrete series: the GSADF gate value and the
// per-endpoint sequence used for date-stamping. Implementations wrap either
// a simulated table matched to the series length or a wild bootstrap on the
// series itself.
struct GateCv {
    double gsadf_cv = 0.0;
    StatSequence bsadf_cv;
};

using CvProvider = std::function<GateCv(std::span<const double> series)>;

// The two-step criterion applied to every series: episodes are honored only
// when the whole-series GSADF statistic clears its critical value; then the
// BSADF sequence is date-stamped against the per-endpoint sequence.
struct ExplosivenessResult {
    double gsadf_stat = 0.0;
    double gsadf_cv = 0.0;
    bool gsadf_reject = false;
    EpisodeSet episodes;  // empty unless gsadf_reject
    SweepDiagnostics diag;
};

ExplosivenessResult test_and_datestamp(std::span<const double> series, const WindowRule& rule,
                                       const LagPolicy& lags, const CvProvider& cv,
                                       int min_duration = 0);

// Per-quarter classification flags. fundamental_explosive is only defined on
// quarters the fundamental series covers; in_bubble only where both series
// exist.
struct QuarterFlags {
    bool price_explosive = false;
    std::optional<bool> fundamental_explosive;
    std::optional<bool> in_bubble;
};

struct StockVerdict {
    std::string stock_id;
    FundamentalSpec spec = FundamentalSpec::Fcfe1;
    std::map<Quarter, QuarterFlags> flags;
};

// in_bubble(t) = price explosive at t, and no fundamental episode touches
// any quarter s >= t-1 (the previous quarter, the current one, or any later
// one). Segments are the gap-split pieces of each series; episodes must lie
// inside their segment grids.
StockVerdict classify_bubbles(std::string stock_id, FundamentalSpec spec,
                              std::span<const SeriesEpisodes> price_segments,
                              std::span<const SeriesEpisodes> fund_segments);

// Which stocks count toward sector exuberance: those passing the full
// bubble criterion, or every price-explosive stock (the criterion-free
// aggregate the second-order test runs on).
enum class ExuberanceFlavor { PostCriterion, PreCriterion };

std::string exuberance_flavor_name(ExuberanceFlavor flavor);

struct SectorExuberance {
    std::string sector;
    Quarter start;
    std::vector<int> count;
    std::vector<double> mcap;  // USD millions, raw unshifted prices

    int length() const { return static_cast<int>(count.size()); }
    Quarter quarter_at(int i) const { return start.plus(i); }
};

struct AggregateResult {
    std::vector<SectorExuberance> sectors;  // sorted by sector name
    Quarter grid_start;
    int grid_len = 0;
    long long mcap_missing = 0;  // flagged stock-quarters with no market cap
};

// Counts flagged stocks and sums their market cap per (sector, quarter) on
// the dense quarter grid spanning all verdicts; quarters with nothing
// flagged report zero. mcap_of returns the market cap for a stock-quarter
// or nothing when price or shares are unavailable.
AggregateResult aggregate_sector(
    std::span<const StockVerdict> verdicts,
    const std::function<std::string(const std::string&)>& sector_of,
    const std::function<std::optional<double>(const std::string&, Quarter)>& mcap_of,
    ExuberanceFlavor flavor);

// GSADF + date-stamping on one sector's exuberant-market-cap series (shifted
// positive first; sectors with fewer than kMinSeriesLength quarters are
// skipped).
struct SecondOrderResult {
    std::string sector;
    bool skipped = false;
    std::string skip_reason;
    ShiftRecord shift;
    ExplosivenessResult test;
    SeriesEpisodes quarters;
};

SecondOrderResult second_order_explosiveness(const SectorExuberance& agg, const WindowRule& rule,
                                             const LagPolicy& lags, const CvProvider& cv,
                                             int min_duration = 0);

}  // namespace bubbletk
