#include "bubbletk/panel.hpp"

#include <algorithm>
#include <stdexcept>

#include "bubbletk/series.hpp"

namespace bubbletk {

std::optional<double> StockData::market_cap_at(Quarter q) const {
    auto it = std::lower_bound(prices.begin(), prices.end(), q,
                               [](const PricePanelRow& r, Quarter q) { return r.quarter < q; });
    if (it == prices.end() || !(it->quarter == q) || !it->shares) return std::nullopt;
    return market_cap(it->price, *it->shares);
}

namespace {

const std::vector<std::string> kPriceHeader = {"permno", "quarter", "price", "shares",
                                               "exchange"};
const std::vector<std::string> kFundHeader = {
    "permno", "quarter", "ni",        "cash_sti", "capex",     "debt_cl",   "ltd_total",
    "acq",    "wcap",    "dep_amort", "pref_div", "ltd_issue", "ltd_reduce", "div_ps"};
const std::vector<std::string> kMetaHeader = {"permno", "name",     "sector",
                                              "group",  "industry", "subindustry"};

void check_header(const csv::Table& t, const std::vector<std::string>& expected,
                  const std::string& what) {
    if (t.header == expected) return;
    std::string got;
    for (const auto& h : t.header) got += (got.empty() ? "" : ",") + h;
    throw std::invalid_argument(what + ": header mismatch, got '" + got + "'");
}

bool empty_table(const csv::Table& t) { return t.header.empty() && t.rows.empty(); }

std::optional<Quarter> try_quarter(const std::string& s) {
    try {
        return Quarter::parse(s);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void ingest_prices(const csv::Table& t, const IngestConfig& config, StockPanel& panel) {
    FileCounts& counts = panel.diag.prices;
    if (empty_table(t)) return;
    check_header(t, kPriceHeader, "prices.csv");
    for (const auto& row : t.rows) {
        ++counts.rows_read;
        auto q = try_quarter(row[1]);
        if (!q) {
            counts.exclude("malformed-quarter");
            continue;
        }
        if (!config.exchange_keep.contains(row[4])) {
            counts.exclude("exchange");
            continue;
        }
        std::optional<double> price, shares;
        try {
            price = csv::parse_optional_double(row[2]);
            shares = csv::parse_optional_double(row[3]);
        } catch (const std::exception&) {
            counts.exclude("malformed-number");
            continue;
        }
        if (!price) {
            counts.exclude("missing-price");
            continue;
        }
        if (*price < 0.0) {
            counts.exclude("negative-price");
            continue;
        }
        if (shares && *shares < 0.0) shares = std::nullopt;

        PricePanelRow r{row[0], *q, *price, shares, row[4]};
        auto& rows = panel.stocks[r.permno].prices;
        bool dup = std::any_of(rows.begin(), rows.end(),
                               [&](const PricePanelRow& x) { return x.quarter == *q; });
        if (dup) {
            counts.exclude("duplicate");
            continue;
        }
        rows.push_back(std::move(r));
        ++counts.kept;
    }
    for (auto& [permno, data] : panel.stocks) {
        data.permno = permno;
        std::sort(data.prices.begin(), data.prices.end(),
                  [](const PricePanelRow& a, const PricePanelRow& b) {
                      return a.quarter < b.quarter;
                  });
    }
}

std::optional<double>* statement_field(FinStatement& s, const std::string& column) {
    if (column == "ni") return &s.net_income;
    if (column == "cash_sti") return &s.cash_sti;
    if (column == "capex") return &s.capex;
    if (column == "debt_cl") return &s.debt_cl;
    if (column == "ltd_total") return &s.ltd_total;
    if (column == "acq") return &s.acquisitions;
    if (column == "wcap") return &s.working_capital;
    if (column == "dep_amort") return &s.dep_amort;
    if (column == "pref_div") return &s.pref_div;
    if (column == "ltd_issue") return &s.ltd_issue;
    if (column == "ltd_reduce") return &s.ltd_reduce;
    if (column == "div_ps") return &s.div_per_share;
    return nullptr;
}

void ingest_fundamentals(const csv::Table& t, const IngestConfig& config, StockPanel& panel) {
    FileCounts& counts = panel.diag.fundamentals;
    if (empty_table(t)) return;
    check_header(t, kFundHeader, "fundamentals.csv");
    for (const auto& row : t.rows) {
        ++counts.rows_read;
        auto q = try_quarter(row[1]);
        if (!q) {
            counts.exclude("malformed-quarter");
            continue;
        }
        StockQuarterRecord rec;
        rec.quarter = *q;
        bool bad = false;
        for (std::size_t c = 2; c < kFundHeader.size(); ++c) {
            try {
                *statement_field(rec.stmt, kFundHeader[c]) =
                    csv::parse_optional_double(row[c]);
            } catch (const std::exception&) {
                bad = true;
                break;
            }
        }
        if (bad) {
            counts.exclude("malformed-number");
            continue;
        }
        auto& recs = panel.stocks[row[0]].statements;
        bool dup = std::any_of(recs.begin(), recs.end(), [&](const StockQuarterRecord& x) {
            return x.quarter == *q;
        });
        if (dup) {
            counts.exclude("duplicate");
            continue;
        }
        recs.push_back(std::move(rec));
        ++counts.kept;
    }

    for (auto& [permno, data] : panel.stocks) {
        data.permno = permno;
        auto& recs = data.statements;
        std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
            return a.quarter < b.quarter;
        });
        // Flow fields arrive year-to-date; back out quarterly values. The
        // fiscal quarter is the calendar quarter (the schema carries none).
        for (const auto& field : config.ytd_fields) {
            std::vector<std::pair<int, std::optional<double>>> ytd;
            ytd.reserve(recs.size());
            for (auto& rec : recs)
                ytd.emplace_back(rec.quarter.q, *statement_field(rec.stmt, field));
            auto quarterly = ytd_to_quarterly(ytd);
            for (std::size_t i = 0; i < recs.size(); ++i)
                *statement_field(recs[i].stmt, field) = quarterly[i];
        }
        // Attach shares from the kept price rows (the Dividends spec needs
        // them to turn per-share dividends into aggregates).
        for (auto& rec : recs) {
            auto it = std::lower_bound(
                data.prices.begin(), data.prices.end(), rec.quarter,
                [](const PricePanelRow& r, Quarter q) { return r.quarter < q; });
            if (it != data.prices.end() && it->quarter == rec.quarter) rec.shares = it->shares;
        }
    }
}

void ingest_meta(const csv::Table& t, StockPanel& panel) {
    FileCounts& counts = panel.diag.meta;
    if (empty_table(t)) return;
    check_header(t, kMetaHeader, "meta.csv");
    for (const auto& row : t.rows) {
        ++counts.rows_read;
        auto& data = panel.stocks[row[0]];
        data.permno = row[0];
        if (data.meta) {
            counts.exclude("duplicate");
            continue;
        }
        data.meta = StockMeta{row[0], row[1], SectorTag{row[2], row[3], row[4], row[5]}};
        ++counts.kept;
    }
}

}  // namespace

StockPanel ingest_tables(const csv::Table& prices, const csv::Table& fundamentals,
                         const csv::Table& meta, const IngestConfig& config) {
    for (const auto& field : config.ytd_fields) {
        FinStatement probe;
        if (!statement_field(probe, field))
            throw std::invalid_argument("ingest: unknown YTD field '" + field + "'");
    }
    StockPanel panel;
    ingest_prices(prices, config, panel);
    ingest_fundamentals(fundamentals, config, panel);
    ingest_meta(meta, panel);
    return panel;
}

StockPanel ingest(const std::filesystem::path& prices_csv,
                  const std::filesystem::path& fundamentals_csv,
                  const std::filesystem::path& meta_csv, const IngestConfig& config) {
    return ingest_tables(csv::read_file(prices_csv), csv::read_file(fundamentals_csv),
                         csv::read_file(meta_csv), config);
}

}  // namespace bubbletk
