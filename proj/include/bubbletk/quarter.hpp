#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace bubbletk {

// Calendar quarter. Totally ordered; arithmetic is in whole quarters.
struct Quarter {
    int year = 0;
    int q = 1;  // 1..4

    // Serial index on the quarter lattice (year*4 + q-1); negative years work.
    int index() const { return year * 4 + (q - 1); }
    static Quarter from_index(int idx);

    Quarter next() const { return from_index(index() + 1); }
    Quarter prev() const { return from_index(index() - 1); }
    Quarter plus(int n) const { return from_index(index() + n); }

    std::string str() const;  // "1999Q4"
    static std::optional<Quarter> parse(std::string_view s);

    friend bool operator==(const Quarter& a, const Quarter& b) {
        return a.year == b.year && a.q == b.q;
    }
    friend std::strong_ordering operator<=>(const Quarter& a, const Quarter& b) {
        return a.index() <=> b.index();
    }
    // Distance in quarters.
    friend int operator-(const Quarter& a, const Quarter& b) {
        return a.index() - b.index();
    }
};

}  // namespace bubbletk
