#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bubbletk/rng.hpp"
#include "bubbletk/series.hpp"

using namespace bubbletk;

namespace {

std::vector<std::pair<Quarter, double>> obs_run(Quarter start, std::vector<double> vals) {
    std::vector<std::pair<Quarter, double>> out;
    for (std::size_t i = 0; i < vals.size(); ++i)
        out.emplace_back(start.plus(static_cast<int>(i)), vals[i]);
    return out;
}

}  // namespace

TEST_CASE("quarter arithmetic and round trips") {
    Quarter q{1999, 4};
    CHECK(q.str() == "1999Q4");
    CHECK(q.next().str() == "2000Q1");
    CHECK(q.next().prev() == q);
    CHECK(q.plus(5) == Quarter{2001, 1});
    CHECK(Quarter{2001, 1} - q == 5);
    CHECK(Quarter::parse("1999Q4") == q);
    CHECK(Quarter::parse("1999q4") == q);
    CHECK_FALSE(Quarter::parse("1999Q5").has_value());
    CHECK_FALSE(Quarter::parse("19x9Q1").has_value());
    CHECK_FALSE(Quarter::parse("").has_value());
    for (int idx = -9; idx <= 9; ++idx) CHECK(Quarter::from_index(idx).index() == idx);
    CHECK(Quarter{1990, 1} < Quarter{1990, 2});
    CHECK(Quarter{1989, 4} < Quarter{1990, 1});
}

TEST_CASE("split_on_gaps partitions observations exactly") {
    // 12 quarters, gap, 9 quarters, gap, 3 quarters (dropped as too short).
    std::vector<std::pair<Quarter, double>> obs;
    auto append = [&](Quarter start, int n, double base) {
        for (int i = 0; i < n; ++i) obs.emplace_back(start.plus(i), base + i);
    };
    append(Quarter{1990, 1}, 12, 0.0);
    append(Quarter{1994, 2}, 9, 100.0);
    append(Quarter{2000, 1}, 3, 200.0);

    auto segs = split_on_gaps("X", obs);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].start == Quarter{1990, 1});
    CHECK(segs[0].length() == 12);
    CHECK(segs[0].series_id == "X:1990Q1");
    CHECK(segs[0].stock_id == "X");
    CHECK(segs[1].start == Quarter{1994, 2});
    CHECK(segs[1].length() == 9);
    CHECK(segs[1].series_id == "X:1994Q2");

    // Concatenating the kept segments recovers the original values in order.
    std::vector<double> flat;
    for (const auto& s : segs) flat.insert(flat.end(), s.values.begin(), s.values.end());
    std::vector<double> expect;
    for (int i = 0; i < 12; ++i) expect.push_back(i);
    for (int i = 0; i < 9; ++i) expect.push_back(100.0 + i);
    CHECK(flat == expect);
}

TEST_CASE("split_on_gaps property: segments partition, no segment spans a gap") {
    Rng rng(301);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<Quarter, double>> obs;
        Quarter q{1980, 1};
        int total = 20 + static_cast<int>(rng.uniform() * 60);
        for (int i = 0; i < total; ++i) {
            obs.emplace_back(q, rng.gaussian());
            int step = rng.uniform() < 0.1 ? 2 + static_cast<int>(rng.uniform() * 3) : 1;
            q = q.plus(step);
        }
        auto segs = split_on_gaps("S", obs, 5);
        int covered = 0;
        for (const auto& s : segs) {
            CHECK(s.length() >= 5);
            // Every (quarter, value) in the segment appears in the input run.
            for (int i = 0; i < s.length(); ++i) {
                auto it = std::find_if(obs.begin(), obs.end(), [&](const auto& o) {
                    return o.first == s.quarter_at(i);
                });
                REQUIRE(it != obs.end());
                CHECK(it->second == s.values[i]);
            }
            covered += s.length();
        }
        CHECK(covered <= total);
    }
}

TEST_CASE("split_on_gaps rejects disorder") {
    auto sorted = obs_run(Quarter{1990, 1}, {1, 2, 3});
    auto unsorted = sorted;
    std::swap(unsorted[0], unsorted[2]);
    CHECK_THROWS_AS(split_on_gaps("X", unsorted, 2), std::invalid_argument);
    auto dup = sorted;
    dup.push_back(dup.back());
    CHECK_THROWS_AS(split_on_gaps("X", dup, 2), std::invalid_argument);
    auto nonfinite = sorted;
    nonfinite[1].second = std::nan("");
    CHECK_THROWS_AS(split_on_gaps("X", nonfinite, 2), std::invalid_argument);
}

TEST_CASE("shift_positive lands the minimum exactly on 1 and preserves differences") {
    QuarterlySeries s;
    s.start = Quarter{1990, 1};
    s.values = {-3.5, 0.0, 2.0, -1.0};
    auto [shifted, rec] = shift_positive(s);
    CHECK(rec.c == 4.5);
    CHECK(*std::min_element(shifted.values.begin(), shifted.values.end()) == 1.0);
    // Half-integer fixture: every sum and difference is exact in binary.
    for (std::size_t i = 1; i < s.values.size(); ++i)
        CHECK(shifted.values[i] - shifted.values[i - 1] == s.values[i] - s.values[i - 1]);

    // Idempotent: already-positive series pass through untouched.
    auto [again, rec2] = shift_positive(shifted);
    CHECK(rec2.c == 0.0);
    CHECK(again.values == shifted.values);

    // A zero minimum still triggers the shift.
    QuarterlySeries z;
    z.values = {0.0, 5.0};
    auto [zs, zrec] = shift_positive(z);
    CHECK(zrec.c == 1.0);
    CHECK(zs.values[0] == 1.0);
}

TEST_CASE("log_transform composes with shift_positive on arbitrary data") {
    Rng rng(7);
    QuarterlySeries s;
    s.start = Quarter{1990, 1};
    for (int i = 0; i < 40; ++i) s.values.push_back(rng.gaussian() * 50.0);
    auto [shifted, rec] = shift_positive(s);
    auto logged = log_transform(shifted);
    for (double v : logged.values) CHECK(std::isfinite(v));
    CHECK(rec.c > 0.0);

    QuarterlySeries bad;
    bad.values = {1.0, 0.0, 2.0};
    CHECK_THROWS_AS(log_transform(bad), std::invalid_argument);
}

TEST_CASE("market_cap converts to millions and rejects negatives") {
    CHECK(market_cap(25.0, 4'000'000.0) == doctest::Approx(100.0));
    CHECK(market_cap(0.0, 1000.0) == 0.0);
    CHECK_THROWS_AS(market_cap(-1.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(market_cap(1.0, -100.0), std::invalid_argument);
}

TEST_CASE("ytd_to_quarterly unrolls the documented fixture") {
    using P = std::pair<int, std::optional<double>>;
    std::vector<P> ytd = {{1, 2.0}, {2, 5.0}, {3, 9.0}, {4, 14.0}};
    auto q = ytd_to_quarterly(ytd);
    REQUIRE(q.size() == 4);
    CHECK(q[0] == 2.0);
    CHECK(q[1] == 3.0);
    CHECK(q[2] == 4.0);
    CHECK(q[3] == 5.0);
}

TEST_CASE("ytd_to_quarterly: missing middles poison only adjacent differences") {
    using P = std::pair<int, std::optional<double>>;
    std::vector<P> ytd = {{1, 2.0}, {2, std::nullopt}, {3, 9.0}, {4, 14.0}};
    auto q = ytd_to_quarterly(ytd);
    REQUIRE(q.size() == 4);
    CHECK(q[0] == 2.0);
    CHECK_FALSE(q[1].has_value());  // its own YTD is missing
    CHECK_FALSE(q[2].has_value());  // predecessor YTD unknown
    CHECK(q[3] == 5.0);
}

TEST_CASE("ytd_to_quarterly: fiscal year rollover and skipped quarters") {
    using P = std::pair<int, std::optional<double>>;
    // Two fiscal years; Q3 of the first year is absent from the statements.
    std::vector<P> ytd = {{1, 10.0}, {2, 25.0}, {4, 60.0}, {1, 7.0}, {2, 9.0}};
    auto q = ytd_to_quarterly(ytd);
    REQUIRE(q.size() == 5);
    CHECK(q[0] == 10.0);
    CHECK(q[1] == 15.0);
    CHECK_FALSE(q[2].has_value());  // Q4 YTD minus unknown Q3 YTD
    CHECK(q[3] == 7.0);             // index drop 4 -> 1 starts a new year
    CHECK(q[4] == 2.0);

    // A repeated index across a data gap also reads as a rollover.
    std::vector<P> rep = {{2, 8.0}, {2, 6.0}};
    auto r = ytd_to_quarterly(rep);
    REQUIRE(r.size() == 2);
    CHECK_FALSE(r[0].has_value());  // first year starts mid-year at Q2
    CHECK_FALSE(r[1].has_value());  // new year also starts at Q2
}

TEST_CASE("ytd_to_quarterly round-trips a cumulative sum") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> flows;
        std::vector<std::pair<int, std::optional<double>>> ytd;
        double acc = 0.0;
        int years = 3;
        for (int y = 0; y < years; ++y) {
            acc = 0.0;
            for (int fq = 1; fq <= 4; ++fq) {
                double f = rng.gaussian();
                flows.push_back(f);
                acc += f;
                ytd.emplace_back(fq, acc);
            }
        }
        auto q = ytd_to_quarterly(ytd);
        REQUIRE(q.size() == flows.size());
        for (std::size_t i = 0; i < flows.size(); ++i) {
            REQUIRE(q[i].has_value());
            CHECK(*q[i] == doctest::Approx(flows[i]).epsilon(1e-12));
        }
    }
}
