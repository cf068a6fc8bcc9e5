#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bubbletk/csv.hpp"
#include "bubbletk/fundamentals.hpp"
#include "bubbletk/quarter.hpp"

namespace bubbletk {

struct PricePanelRow {
    std::string permno;
    Quarter quarter;
    double price = 0.0;
    std::optional<double> shares;
    std::string exchange;
};

struct StockMeta {
    std::string permno;
    std::string name;
    SectorTag tag;
};

struct StockData {
    std::string permno;
    std::vector<PricePanelRow> prices;          // sorted, deduped, exchange-kept
    std::vector<StockQuarterRecord> statements;  // sorted, deduped, YTD unrolled
    std::optional<StockMeta> meta;

    std::optional<double> market_cap_at(Quarter q) const;  // USD millions
};

struct IngestConfig {
    std::set<std::string> exchange_keep = {"3"};
    std::vector<std::string> ytd_fields = {"capex", "acq", "ltd_issue", "ltd_reduce"};
};

// Per-file row accounting: every input row is either kept or counted under
// one exclusion reason.
struct FileCounts {
    long long rows_read = 0;
    long long kept = 0;
    std::map<std::string, long long> excluded;

    void exclude(const std::string& reason) {
        ++excluded[reason];
    }
};

struct IngestDiagnostics {
    FileCounts prices;
    FileCounts fundamentals;
    FileCounts meta;
};

struct StockPanel {
    std::map<std::string, StockData> stocks;
    IngestDiagnostics diag;
};

// Column sets are pinned; a file whose header differs is rejected (an
// entirely empty file passes as an empty panel). Exchange filtering is
// row-level: quarters listed on other exchanges drop out and later surface
// as series gaps.
StockPanel ingest_tables(const csv::Table& prices, const csv::Table& fundamentals,
                         const csv::Table& meta, const IngestConfig& config);

StockPanel ingest(const std::filesystem::path& prices_csv,
                  const std::filesystem::path& fundamentals_csv,
                  const std::filesystem::path& meta_csv, const IngestConfig& config);

}  // namespace bubbletk
