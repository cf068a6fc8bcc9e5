#include "bubbletk/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bubbletk::csv {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

Table parse(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool cell_started = false;  // row has content, so flush at line end

    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_row = [&] {
        end_cell();
        records.push_back(std::move(row));
        row.clear();
    };

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                if (!cell.empty())
                    throw std::invalid_argument("csv: quote inside unquoted field");
                quoted = true;
                cell_started = true;
                ++i;
                break;
            case ',':
                end_cell();
                cell_started = true;  // a separator implies a following cell
                ++i;
                break;
            case '\r':
                if (i + 1 < n && text[i + 1] == '\n') ++i;
                [[fallthrough]];
            case '\n':
                end_row();
                ++i;
                break;
            default:
                cell += c;
                cell_started = true;
                ++i;
                break;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
    if (!row.empty() || !cell.empty() || cell_started) end_row();

    Table t;
    if (records.empty()) return t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() == 1 && records[r][0].empty()) continue;  // blank line
        if (records[r].size() != t.header.size())
            throw std::invalid_argument("csv: row " + std::to_string(r + 1) + " has " +
                                        std::to_string(records[r].size()) + " cells, header has " +
                                        std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string escape(const std::string& cell) {
    bool needs_quotes = cell.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, std::span<const std::string> cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << escape(cells[i]);
    }
    out << '\n';
}

std::optional<double> parse_optional_double(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("csv: '" + cell + "' is not a number");
    return v;
}

}  // namespace bubbletk::csv
