#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace bubbletk::csv {

// Shortest representation that parses back to exactly the same double.
std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

// RFC 4180 subset: quoted fields with doubled-quote escapes, LF or CRLF
// line ends, embedded separators/newlines inside quotes. Every row must
// have as many cells as the header.
Table parse(const std::string& text);
Table read_file(const std::filesystem::path& path);

std::string escape(const std::string& cell);
void write_row(std::ostream& out, std::span<const std::string> cells);

// Empty cell = missing. Non-empty cells must parse fully as a double.
std::optional<double> parse_optional_double(const std::string& cell);

}  // namespace bubbletk::csv
