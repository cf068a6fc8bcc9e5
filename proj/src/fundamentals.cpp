#include "bubbletk/fundamentals.hpp"

#include <algorithm>
#include <stdexcept>

namespace bubbletk {

std::string fundamental_spec_name(FundamentalSpec spec) {
    switch (spec) {
        case FundamentalSpec::Fcfe1: return "fcfe1";
        case FundamentalSpec::Fcfe2: return "fcfe2";
        case FundamentalSpec::NetIncome: return "ni";
        case FundamentalSpec::Dividends: return "div";
    }
    return "?";
}

FundamentalSpec parse_fundamental_spec(const std::string& name) {
    if (name == "fcfe1") return FundamentalSpec::Fcfe1;
    if (name == "fcfe2") return FundamentalSpec::Fcfe2;
    if (name == "ni") return FundamentalSpec::NetIncome;
    if (name == "div") return FundamentalSpec::Dividends;
    throw std::invalid_argument("unknown fundamental spec '" + name +
                                "' (expected fcfe1, fcfe2, ni, or div)");
}

const std::vector<std::string>& known_sectors() {
    static const std::vector<std::string> sectors = {
        "Communication Services", "Consumer Discretionary", "Consumer Staples",
        "Energy", "Financials", "Healthcare", "Industrials",
        "Information Technology", "Materials", "Other", "Real Estate", "Utilities"};
    return sectors;
}

bool is_known_sector(const std::string& sector) {
    const auto& s = known_sectors();
    return std::find(s.begin(), s.end(), sector) != s.end();
}

namespace {

std::optional<double> ncwc(const FinStatement& s) {
    if (!s.working_capital || !s.cash_sti || !s.debt_cl) return std::nullopt;
    return *s.working_capital - *s.cash_sti + *s.debt_cl;
}

}  // namespace

std::optional<double> delta_ncwc(const FinStatement& curr, const FinStatement& prev) {
    auto c = ncwc(curr);
    auto p = ncwc(prev);
    if (!c || !p) return std::nullopt;
    return *c - *p;
}

std::optional<double> net_borrowing(const FinStatement& curr, const FinStatement& prev,
                                    int measure) {
    if (measure != 1 && measure != 2)
        throw std::invalid_argument("net_borrowing: measure must be 1 or 2");
    if (!curr.debt_cl || !prev.debt_cl) return std::nullopt;
    const double d_debt_cl = *curr.debt_cl - *prev.debt_cl;
    if (measure == 1) {
        if (!curr.ltd_issue || !curr.ltd_reduce) return std::nullopt;
        return *curr.ltd_issue - *curr.ltd_reduce + d_debt_cl;
    }
    if (!curr.ltd_total || !prev.ltd_total) return std::nullopt;
    return *curr.ltd_total - *prev.ltd_total + d_debt_cl;
}

std::optional<double> fcfe(const FinStatement& curr, const FinStatement* prev,
                           const SectorTag& sector, int measure) {
    if (sector.is_financial()) return curr.net_income;
    if (!prev) return std::nullopt;
    if (!curr.net_income || !curr.capex || !curr.acquisitions || !curr.dep_amort ||
        !curr.pref_div)
        return std::nullopt;
    auto d_ncwc = delta_ncwc(curr, *prev);
    auto nb = net_borrowing(curr, *prev, measure);
    if (!d_ncwc || !nb) return std::nullopt;
    return *curr.net_income - *curr.capex - *curr.acquisitions + *curr.dep_amort - *d_ncwc +
           *nb - *curr.pref_div;
}

std::vector<std::pair<Quarter, double>> fundamental_observations(
    std::span<const StockQuarterRecord> records, FundamentalSpec spec, const SectorTag& sector) {
    if (!is_known_sector(sector.sector))
        throw std::invalid_argument("fundamental_observations: unknown sector '" +
                                    sector.sector + "'");
    for (std::size_t i = 1; i < records.size(); ++i)
        if (!(records[i - 1].quarter < records[i].quarter))
            throw std::invalid_argument(
                "fundamental_observations: records must be sorted by quarter, no duplicates");

    const int measure = spec == FundamentalSpec::Fcfe2 ? 2 : 1;
    std::vector<std::pair<Quarter, double>> obs;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        std::optional<double> value;
        switch (spec) {
            case FundamentalSpec::Fcfe1:
            case FundamentalSpec::Fcfe2: {
                const FinStatement* prev = nullptr;
                if (i > 0 && records[i - 1].quarter.index() + 1 == rec.quarter.index())
                    prev = &records[i - 1].stmt;
                value = fcfe(rec.stmt, prev, sector, measure);
                break;
            }
            case FundamentalSpec::NetIncome:
                value = rec.stmt.net_income;
                break;
            case FundamentalSpec::Dividends:
                if (rec.stmt.div_per_share && rec.shares)
                    value = *rec.stmt.div_per_share * *rec.shares / 1e6;
                break;
        }
        if (value) obs.emplace_back(rec.quarter, *value);
    }

    if (spec == FundamentalSpec::Dividends) {
        bool any_nonzero = std::any_of(obs.begin(), obs.end(),
                                       [](const auto& o) { return o.second != 0.0; });
        if (!any_nonzero) obs.clear();
    }
    return obs;
}

}  // namespace bubbletk
