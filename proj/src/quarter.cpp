#include "bubbletk/quarter.hpp"

#include <cctype>
#include <charconv>

namespace bubbletk {

Quarter Quarter::from_index(int idx) {
    int year = idx >= 0 ? idx / 4 : -((-idx + 3) / 4);
    int rem = idx - year * 4;
    return Quarter{year, rem + 1};
}

std::string Quarter::str() const {
    return std::to_string(year) + "Q" + std::to_string(q);
}

std::optional<Quarter> Quarter::parse(std::string_view s) {
    auto pos = s.find('Q');
    if (pos == std::string_view::npos) pos = s.find('q');
    if (pos == std::string_view::npos || pos == 0 || pos + 2 != s.size()) return std::nullopt;
    int year = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + pos, year);
    if (ec != std::errc{} || ptr != s.data() + pos) return std::nullopt;
    char qc = s[pos + 1];
    if (qc < '1' || qc > '4') return std::nullopt;
    return Quarter{year, qc - '0'};
}

}  // namespace bubbletk
