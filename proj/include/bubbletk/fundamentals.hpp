#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bubbletk/quarter.hpp"

namespace bubbletk {

// One quarter of statement fields, USD millions except div_per_share
// (USD per share). Absent fields are missing, not zero.
struct FinStatement {
    std::optional<double> net_income;
    std::optional<double> cash_sti;
    std::optional<double> capex;
    std::optional<double> debt_cl;
    std::optional<double> ltd_total;
    std::optional<double> acquisitions;
    std::optional<double> working_capital;
    std::optional<double> dep_amort;
    std::optional<double> pref_div;
    std::optional<double> ltd_issue;
    std::optional<double> ltd_reduce;
    std::optional<double> div_per_share;
};

// Which per-stock fundamental series to build.
enum class FundamentalSpec { Fcfe1, Fcfe2, NetIncome, Dividends };

std::string fundamental_spec_name(FundamentalSpec spec);  // "fcfe1", "ni", "div", ...
FundamentalSpec parse_fundamental_spec(const std::string& name);

// GICS classification strings. Cash-flow construction switches on the
// sector: "Financials" gets the net-income proxy, everything else
// (Real Estate included) the full free-cash-flow identity.
struct SectorTag {
    std::string sector;
    std::string group;
    std::string industry;
    std::string subindustry;

    bool is_financial() const { return sector == "Financials"; }
};

const std::vector<std::string>& known_sectors();
bool is_known_sector(const std::string& sector);

// Change in non-cash working capital:
// Δ(working_capital − cash_sti + debt_cl). Missing inputs propagate.
std::optional<double> delta_ncwc(const FinStatement& curr, const FinStatement& prev);

// Measure 1: ltd_issue − ltd_reduce + Δdebt_cl.
// Measure 2: Δltd_total + Δdebt_cl.
std::optional<double> net_borrowing(const FinStatement& curr, const FinStatement& prev,
                                    int measure);

// Free cash flow to equity. Non-financial:
//   net_income − capex − acquisitions + dep_amort − ΔNCWC + net_borrowing − pref_div
// (prev required; missing inputs propagate). Financials: net_income alone,
// prev unused and may be null.
std::optional<double> fcfe(const FinStatement& curr, const FinStatement* prev,
                           const SectorTag& sector, int measure);

// One stock-quarter of inputs for series construction. shares comes from the
// price panel and is only needed by the Dividends spec.
struct StockQuarterRecord {
    Quarter quarter;
    FinStatement stmt;
    std::optional<double> shares;
};

// The chosen fundamental per quarter for one stock, present values only;
// quarters whose inputs are incomplete simply do not appear, so downstream
// gap-splitting sees them as holes. Records must be sorted by quarter with
// no duplicates and the sector must be one of the known labels. A dividend
// series whose observed values are all zero comes back empty: a stock that
// never pays has no dividend fundamental to test.
std::vector<std::pair<Quarter, double>> fundamental_observations(
    std::span<const StockQuarterRecord> records, FundamentalSpec spec, const SectorTag& sector);

}  // namespace bubbletk
