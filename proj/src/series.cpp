#include "bubbletk/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bubbletk {

std::vector<QuarterlySeries> split_on_gaps(
    const std::string& stock_id,
    std::span<const std::pair<Quarter, double>> observations,
    int min_len) {
    if (min_len < 1) throw std::invalid_argument("split_on_gaps: min_len must be >= 1");
    for (size_t i = 1; i < observations.size(); ++i) {
        int d = observations[i].first - observations[i - 1].first;
        if (d == 0)
            throw std::invalid_argument("split_on_gaps: duplicate quarter " +
                                        observations[i].first.str());
        if (d < 0)
            throw std::invalid_argument("split_on_gaps: observations not sorted at " +
                                        observations[i].first.str());
    }
    for (const auto& [q, v] : observations) {
        if (!std::isfinite(v))
            throw std::invalid_argument("split_on_gaps: non-finite value at " + q.str());
    }

    std::vector<QuarterlySeries> out;
    size_t i = 0;
    while (i < observations.size()) {
        size_t j = i + 1;
        while (j < observations.size() &&
               observations[j].first - observations[j - 1].first == 1) {
            ++j;
        }
        if (j - i >= static_cast<size_t>(min_len)) {
            QuarterlySeries seg;
            seg.stock_id = stock_id;
            seg.start = observations[i].first;
            seg.series_id = stock_id + ":" + seg.start.str();
            seg.values.reserve(j - i);
            for (size_t t = i; t < j; ++t) seg.values.push_back(observations[t].second);
            out.push_back(std::move(seg));
        }
        i = j;
    }
    return out;
}

std::pair<std::vector<double>, ShiftRecord> shift_positive(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("shift_positive: empty series");
    std::vector<double> out(values.begin(), values.end());
    double mn = *std::min_element(out.begin(), out.end());
    if (mn > 0.0) return {std::move(out), ShiftRecord{0.0}};
    double c = -mn + 1.0;
    for (double& v : out) v += c;
    return {std::move(out), ShiftRecord{c}};
}

std::pair<QuarterlySeries, ShiftRecord> shift_positive(const QuarterlySeries& s) {
    auto [values, rec] = shift_positive(std::span<const double>(s.values));
    QuarterlySeries shifted = s;
    shifted.values = std::move(values);
    return {std::move(shifted), rec};
}

QuarterlySeries log_transform(const QuarterlySeries& s) {
    QuarterlySeries out = s;
    for (double& v : out.values) {
        if (!(v > 0.0))
            throw std::invalid_argument("log_transform: nonpositive value in series " +
                                        s.series_id);
        v = std::log(v);
    }
    return out;
}

double market_cap(double price, double shares) {
    if (price < 0.0 || shares < 0.0)
        throw std::invalid_argument("market_cap: negative input");
    return price * shares / 1e6;
}

std::vector<std::optional<double>> ytd_to_quarterly(
    std::span<const std::pair<int, std::optional<double>>> ytd) {
    std::vector<std::optional<double>> out;
    out.reserve(ytd.size());
    // YTD value of the preceding fiscal quarter in the current fiscal year.
    std::optional<double> prev_ytd;
    int prev_fq = 0;  // 0 = before any observation
    for (const auto& [fq, val] : ytd) {
        if (fq < 1 || fq > 4)
            throw std::invalid_argument("ytd_to_quarterly: fiscal quarter out of 1..4");
        // A non-increasing index is only possible across a fiscal-year
        // boundary (same-year duplicates are rejected upstream), so it
        // marks a rollover even when the index repeats across a gap year.
        if (fq <= prev_fq || prev_fq == 0) {
            // New fiscal year. Q1 passes through; a year starting mid-stream
            // has no YTD base, so its first backed-out value is missing.
            out.push_back(fq == 1 ? val : std::nullopt);
        } else if (fq == prev_fq + 1) {
            if (val && prev_ytd)
                out.push_back(*val - *prev_ytd);
            else
                out.push_back(std::nullopt);
        } else {
            // Skipped fiscal quarter(s): the base is unknown.
            out.push_back(std::nullopt);
        }
        prev_ytd = val;
        prev_fq = fq;
    }
    return out;
}

}  // namespace bubbletk
