#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bubbletk/critical_values.hpp"
#include "bubbletk/rng.hpp"

using namespace bubbletk;
namespace fs = std::filesystem;

TEST_CASE("quantile_type7 matches hand-computed values") {
    std::vector<double> s = {4.0, 1.0, 3.0, 2.0};  // sorted: 1 2 3 4
    CHECK(quantile_type7(s, 0.0) == 1.0);
    CHECK(quantile_type7(s, 1.0) == 4.0);
    CHECK(quantile_type7(s, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_type7(s, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_type7({7.0}, 0.9) == 7.0);

    // NaNs are dropped before ranking.
    std::vector<double> with_nan = {1.0, std::nan(""), 3.0};
    CHECK(quantile_type7(with_nan, 0.5) == doctest::Approx(2.0));
    CHECK_THROWS_AS(quantile_type7({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile_type7({std::nan("")}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile_type7({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("simulated tables are deterministic and worker-independent") {
    NullSpec spec{.T = 40, .r0 = 0.3, .reps = 120, .seed = 77};
    CvTable a = simulate_null_cv(spec, LagPolicy::fixed(0));
    CvTable b = simulate_null_cv(spec, LagPolicy::fixed(0), kDefaultCvLevels, 4);
    CHECK(a.sadf_cv == b.sadf_cv);
    CHECK(a.gsadf_cv == b.gsadf_cv);
    CHECK(a.bsadf_cv == b.bsadf_cv);
    CHECK(a.endpoints == b.endpoints);

    // A different seed moves the quantiles.
    NullSpec other = spec;
    other.seed = 78;
    CvTable c = simulate_null_cv(other, LagPolicy::fixed(0));
    CHECK(a.gsadf_cv != c.gsadf_cv);
}

TEST_CASE("simulated quantiles are ordered in level and statistic") {
    NullSpec spec{.T = 50, .r0 = 0.25, .reps = 200, .seed = 5};
    CvTable t = simulate_null_cv(spec, LagPolicy::fixed(1));
    REQUIRE(t.levels.size() == 3);
    for (std::size_t i = 1; i < t.levels.size(); ++i) {
        CHECK(t.sadf_cv[i] >= t.sadf_cv[i - 1]);
        CHECK(t.gsadf_cv[i] >= t.gsadf_cv[i - 1]);
    }
    // GSADF dominates SADF at every level: its sup runs over a superset.
    for (std::size_t i = 0; i < t.levels.size(); ++i) CHECK(t.gsadf_cv[i] >= t.sadf_cv[i]);

    // Endpoint grid spans w0..T.
    CHECK(t.endpoints.front() == min_window(50, WindowRule::explicit_r0(0.25),
                                            LagPolicy::fixed(1)));
    CHECK(t.endpoints.back() == 50);
    for (const auto& row : t.bsadf_cv) CHECK(row.size() == t.endpoints.size());
}

TEST_CASE("cv table serialization round-trips exactly") {
    NullSpec spec{.T = 30, .r0 = 0.35, .reps = 100, .seed = 12};
    CvTable t = simulate_null_cv(spec, LagPolicy::schwert());
    fs::path dir = fs::temp_directory_path() / "bubbletk_cv_test";
    fs::create_directories(dir);
    fs::path file = dir / "t.json";
    t.save(file);
    CvTable back = CvTable::load(file);
    CHECK(back.levels == t.levels);
    CHECK(back.sadf_cv == t.sadf_cv);
    CHECK(back.gsadf_cv == t.gsadf_cv);
    CHECK(back.endpoints == t.endpoints);
    CHECK(back.bsadf_cv == t.bsadf_cv);
    CHECK(back.lags == t.lags);
    CHECK(back.provenance.T == spec.T);
    CHECK(back.provenance.seed == spec.seed);

    // Saving the reloaded table reproduces the file byte for byte.
    fs::path file2 = dir / "t2.json";
    back.save(file2);
    std::ifstream f1(file, std::ios::binary), f2(file2, std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    fs::remove_all(dir);
}

TEST_CASE("cv table lookup contracts") {
    NullSpec spec{.T = 30, .r0 = 0.35, .reps = 100, .seed = 1};
    CvTable t = simulate_null_cv(spec, LagPolicy::fixed(0));
    CHECK(t.gsadf_at(0.95) == t.gsadf_cv[1]);
    CHECK(t.sadf_at(0.9) == t.sadf_cv[0]);
    StatSequence seq = t.bsadf_at(0.99);
    CHECK(seq.endpoints == t.endpoints);
    CHECK(seq.stats == t.bsadf_cv[2]);
    CHECK_THROWS_AS(t.gsadf_at(0.5), std::invalid_argument);
}

TEST_CASE("corrupt cv json is rejected") {
    NullSpec spec{.T = 30, .r0 = 0.35, .reps = 100, .seed = 1};
    CvTable t = simulate_null_cv(spec, LagPolicy::fixed(0));
    nlohmann::json j = t.to_json();
    nlohmann::json bad = j;
    bad["bsadf_cv"][0].erase(0);  // row length no longer matches endpoints
    CHECK_THROWS(CvTable::from_json(bad));
    nlohmann::json bad2 = j;
    bad2.erase("gsadf_cv");
    CHECK_THROWS(CvTable::from_json(bad2));
}

TEST_CASE("null spec validation") {
    CHECK_THROWS_AS(simulate_null_cv(NullSpec{.T = 5, .r0 = 0.3, .reps = 100, .seed = 1},
                                     LagPolicy::fixed(0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_null_cv(NullSpec{.T = 50, .r0 = 0.0, .reps = 100, .seed = 1},
                                     LagPolicy::fixed(0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_null_cv(NullSpec{.T = 50, .r0 = 0.3, .reps = 50, .seed = 1},
                                     LagPolicy::fixed(0)),
                    std::invalid_argument);
}

TEST_CASE("wild bootstrap is deterministic and worker-independent") {
    Rng rng(404);
    std::vector<double> y(60);
    double level = 100.0;
    for (int t = 0; t < 60; ++t) {
        // Mild variance regime change to give the bootstrap something to keep.
        level += rng.gaussian() * (t < 30 ? 1.0 : 3.0);
        y[t] = level;
    }
    WildBootstrapCv a = wild_bootstrap_cv(y, WindowRule::auto_rule(), LagPolicy::fixed(1), 80, 9);
    WildBootstrapCv b =
        wild_bootstrap_cv(y, WindowRule::auto_rule(), LagPolicy::fixed(1), 80, 9, 0.95, 4);
    CHECK(a.gsadf_cv == b.gsadf_cv);
    CHECK(a.bsadf_cv.stats == b.bsadf_cv.stats);
    CHECK(a.bsadf_cv.endpoints == b.bsadf_cv.endpoints);
    CHECK(a.reps == 80);
    CHECK(a.level == 0.95);

    WildBootstrapCv c = wild_bootstrap_cv(y, WindowRule::auto_rule(), LagPolicy::fixed(1), 80, 10);
    CHECK(a.gsadf_cv != c.gsadf_cv);

    // The endpoint grid matches what a sweep of this series would use.
    CHECK(a.bsadf_cv.endpoints.front() ==
          min_window(60, WindowRule::auto_rule(), LagPolicy::fixed(1)));
    CHECK(a.bsadf_cv.endpoints.back() == 60);
}

TEST_CASE("wild bootstrap tolerates endpoints that are degenerate in every path") {
    // Flat, hump, flat: sector-aggregate shape. The null-regression residuals
    // vanish on the flat stretches, so every bootstrap path is flat early and
    // the first endpoints have no null distribution at all.
    std::vector<double> y(40, 1.0);
    Rng hump(12);
    for (int t = 20; t < 28; ++t) y[t] = 100.0 + 40.0 * hump.uniform() * (t - 19);
    WildBootstrapCv cv =
        wild_bootstrap_cv(y, WindowRule::auto_rule(), LagPolicy::fixed(1), 50, 3);
    CHECK(std::isfinite(cv.gsadf_cv));
    CHECK(std::isnan(cv.bsadf_cv.stats.front()));
    bool any_finite = false;
    for (double s : cv.bsadf_cv.stats) any_finite = any_finite || std::isfinite(s);
    CHECK(any_finite);
}

TEST_CASE("wild bootstrap validation") {
    std::vector<double> y(60, 1.0);
    // Constant series: the null regression residuals are all zero, the sweep
    // of every bootstrap path is degenerate, so quantiles cannot be formed.
    CHECK_THROWS(wild_bootstrap_cv(y, WindowRule::auto_rule(), LagPolicy::fixed(0), 50, 1));
    std::vector<double> tiny(5, 1.0);
    CHECK_THROWS_AS(
        wild_bootstrap_cv(tiny, WindowRule::auto_rule(), LagPolicy::fixed(0), 50, 1),
        std::invalid_argument);
    std::vector<double> ok(20, 0.0);
    CHECK_THROWS_AS(wild_bootstrap_cv(ok, WindowRule::auto_rule(), LagPolicy::fixed(0), 0, 1),
                    std::invalid_argument);
}
