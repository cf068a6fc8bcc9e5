#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bubbletk/critical_values.hpp"
#include "bubbletk/series.hpp"

namespace bubbletk {

// y_t = y_{t-1} + sigma * e_t
struct RandomWalkSpec {
    int T = 0;
    double sigma = 1.0;
    double y0 = 100.0;
};

// Random walk except y_t = beta * y_{t-1} + sigma * e_t for
// t in [start, start + length).
struct ExplosiveEpisodeSpec {
    int T = 0;
    double beta = 1.05;
    int start = 1;
    int length = 0;
    double sigma = 1.0;
    double y0 = 100.0;
};

// Periodically collapsing multiplicative bubble on top of a random-walk
// fundamental: below threshold b the bubble compounds at (1+r); above b it
// collapses to base zeta with probability pi each period, or keeps growing
// scaled up to preserve the (1+r) conditional mean. u is lognormal with
// mean one (log s.d. tau). Price = fundamental + scale * bubble.
struct EvansBubbleSpec {
    int T = 0;
    double r = 0.05;
    double pi = 0.15;
    double b = 1.0;
    double zeta = 0.5;
    double sigma = 1.0;
    double tau = 0.05;
    double b0 = 0.5;
    double scale = 20.0;
    double f0 = 100.0;
};

struct DgpSpec {
    std::variant<RandomWalkSpec, ExplosiveEpisodeSpec, EvansBubbleSpec> variant;
    std::uint64_t seed = 0;

    void validate() const;
    int length() const;
    std::string name() const;  // "random-walk", "explosive-episode", "evans-bubble"
};

QuarterlySeries generate(const DgpSpec& spec);
std::vector<double> generate_values(const DgpSpec& spec);

// Evans path with its components exposed, for tests that count collapses.
struct EvansPath {
    std::vector<double> price;
    std::vector<double> bubble;
    std::vector<double> fundamental;
    int collapses = 0;
};

EvansPath evans_path(const EvansBubbleSpec& spec, std::uint64_t seed);

enum class TestKind { Sadf, Gsadf };

std::string test_kind_name(TestKind kind);

struct PowerReport {
    std::string test;
    double rejection_rate = 0.0;
    int reps = 0;
    double cv_used = 0.0;  // the 95% critical value applied
    NullSpec cv_provenance;
    std::string cv_lags;
};

// Fraction of replications of the DGP whose statistic exceeds the table's
// 95% critical value. Replication j re-seeds the DGP from (spec.seed, j).
// The lag policy and window rule are taken from the table so statistic and
// critical value always agree; a table simulated for a different T is
// rejected.
PowerReport power_study(const DgpSpec& spec, TestKind test, const CvTable& cv, int reps,
                        int workers = 1);

struct PowerPair {
    PowerReport sadf;
    PowerReport gsadf;
};

// Both tests from one sweep per replication.
PowerPair power_study_pair(const DgpSpec& spec, const CvTable& cv, int reps, int workers = 1);

}  // namespace bubbletk
