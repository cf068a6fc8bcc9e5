#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bubbletk/quarter.hpp"

namespace bubbletk {

// Gap-free, ordered run of quarterly values belonging to one stock segment.
// Value i corresponds to quarter start + i.
struct QuarterlySeries {
    std::string series_id;
    std::string stock_id;
    Quarter start{};
    std::vector<double> values;

    int length() const { return static_cast<int>(values.size()); }
    Quarter quarter_at(int i) const { return start.plus(i); }
    Quarter last_quarter() const { return start.plus(length() - 1); }
};

// Additive constant applied by shift_positive; c == 0 means the series was
// left untouched.
struct ShiftRecord {
    double c = 0.0;
};

inline constexpr int kMinSeriesLength = 9;

// Splits an ordered run of (quarter, value) observations at every calendar
// gap and drops segments shorter than min_len. Segments share stock_id and
// carry distinct series_ids derived from their start quarter.
// Throws std::invalid_argument on unsorted or duplicate quarters.
std::vector<QuarterlySeries> split_on_gaps(
    const std::string& stock_id,
    std::span<const std::pair<Quarter, double>> observations,
    int min_len = kMinSeriesLength);

// If min(values) <= 0, adds c = -min + 1 so the shifted minimum is exactly 1;
// otherwise returns the series unchanged with c = 0.
std::pair<QuarterlySeries, ShiftRecord> shift_positive(const QuarterlySeries& s);
std::pair<std::vector<double>, ShiftRecord> shift_positive(std::span<const double> values);

// Elementwise natural log. Throws std::invalid_argument on any value <= 0.
QuarterlySeries log_transform(const QuarterlySeries& s);

// price (USD/share) * shares -> USD millions. Negative inputs rejected.
double market_cap(double price, double shares);

// Backs quarterly flows out of year-to-date values. Input pairs are
// (fiscal-quarter index 1..4, YTD value or missing) in statement order; a
// drop in the fiscal-quarter index starts a new fiscal year. Fiscal Q1
// passes through; other quarters difference against the preceding fiscal
// quarter's YTD value and come out missing when that value is unknown.
std::vector<std::optional<double>> ytd_to_quarterly(
    std::span<const std::pair<int, std::optional<double>>> ytd);

}  // namespace bubbletk
