#include "bubbletk/dgp.hpp"

#include <cmath>
#include <stdexcept>

#include "bubbletk/parallel.hpp"
#include "bubbletk/rng.hpp"

namespace bubbletk {

namespace {

void validate_rw(const RandomWalkSpec& s) {
    if (s.T < 1) throw std::invalid_argument("RandomWalkSpec: T must be >= 1");
    if (s.sigma < 0.0) throw std::invalid_argument("RandomWalkSpec: sigma must be >= 0");
}

void validate_episode(const ExplosiveEpisodeSpec& s) {
    if (s.T < 1) throw std::invalid_argument("ExplosiveEpisodeSpec: T must be >= 1");
    if (!(s.beta > 1.0)) throw std::invalid_argument("ExplosiveEpisodeSpec: beta must be > 1");
    if (s.sigma < 0.0) throw std::invalid_argument("ExplosiveEpisodeSpec: sigma must be >= 0");
    if (s.start < 1 || s.length < 1 || s.start + s.length > s.T)
        throw std::invalid_argument(
            "ExplosiveEpisodeSpec: need 1 <= start < start + length <= T");
}

void validate_evans(const EvansBubbleSpec& s) {
    if (s.T < 1) throw std::invalid_argument("EvansBubbleSpec: T must be >= 1");
    if (!(s.pi > 0.0) || s.pi > 1.0)
        throw std::invalid_argument("EvansBubbleSpec: pi must lie in (0, 1]");
    if (!(s.r > 0.0)) throw std::invalid_argument("EvansBubbleSpec: r must be > 0");
    if (!(s.b > 0.0) || !(s.zeta > 0.0) || s.zeta > s.b)
        throw std::invalid_argument("EvansBubbleSpec: need 0 < zeta <= b");
    if (!(s.b0 > 0.0)) throw std::invalid_argument("EvansBubbleSpec: b0 must be > 0");
    if (s.sigma < 0.0 || s.tau < 0.0 || s.scale < 0.0)
        throw std::invalid_argument("EvansBubbleSpec: sigma, tau, scale must be >= 0");
}

std::vector<double> gen_rw(const RandomWalkSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(s.T);
    y[0] = s.y0;
    for (int t = 1; t < s.T; ++t) y[t] = y[t - 1] + s.sigma * rng.gaussian();
    return y;
}

std::vector<double> gen_episode(const ExplosiveEpisodeSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(s.T);
    y[0] = s.y0;
    for (int t = 1; t < s.T; ++t) {
        bool explosive = t >= s.start && t < s.start + s.length;
        y[t] = (explosive ? s.beta : 1.0) * y[t - 1] + s.sigma * rng.gaussian();
    }
    return y;
}

}  // namespace

EvansPath evans_path(const EvansBubbleSpec& s, std::uint64_t seed) {
    validate_evans(s);
    Rng rng(seed);
    EvansPath path;
    path.bubble.resize(s.T);
    path.fundamental.resize(s.T);
    path.price.resize(s.T);
    path.bubble[0] = s.b0;
    path.fundamental[0] = s.f0;
    path.price[0] = s.f0 + s.scale * s.b0;
    const double gross = 1.0 + s.r;
    for (int t = 1; t < s.T; ++t) {
        path.fundamental[t] = path.fundamental[t - 1] + s.sigma * rng.gaussian();
        const double u = std::exp(s.tau * rng.gaussian() - 0.5 * s.tau * s.tau);
        const double prev = path.bubble[t - 1];
        if (prev <= s.b) {
            path.bubble[t] = gross * prev * u;
        } else if (s.pi >= 1.0 || rng.uniform() < s.pi) {
            path.bubble[t] = s.zeta * u;
            ++path.collapses;
        } else {
            path.bubble[t] = (s.zeta + gross / (1.0 - s.pi) * (prev - s.zeta / gross)) * u;
        }
        path.price[t] = path.fundamental[t] + s.scale * path.bubble[t];
    }
    return path;
}

void DgpSpec::validate() const {
    std::visit([](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, RandomWalkSpec>) validate_rw(s);
        else if constexpr (std::is_same_v<S, ExplosiveEpisodeSpec>) validate_episode(s);
        else validate_evans(s);
    }, variant);
}

int DgpSpec::length() const {
    return std::visit([](const auto& s) { return s.T; }, variant);
}

std::string DgpSpec::name() const {
    struct Namer {
        std::string operator()(const RandomWalkSpec&) const { return "random-walk"; }
        std::string operator()(const ExplosiveEpisodeSpec&) const { return "explosive-episode"; }
        std::string operator()(const EvansBubbleSpec&) const { return "evans-bubble"; }
    };
    return std::visit(Namer{}, variant);
}

std::vector<double> generate_values(const DgpSpec& spec) {
    spec.validate();
    if (const auto* rw = std::get_if<RandomWalkSpec>(&spec.variant)) return gen_rw(*rw, spec.seed);
    if (const auto* ep = std::get_if<ExplosiveEpisodeSpec>(&spec.variant))
        return gen_episode(*ep, spec.seed);
    return evans_path(std::get<EvansBubbleSpec>(spec.variant), spec.seed).price;
}

QuarterlySeries generate(const DgpSpec& spec) {
    QuarterlySeries series;
    series.stock_id = spec.name();
    series.series_id = spec.name() + ":" + std::to_string(spec.seed);
    series.start = Quarter{1990, 1};
    series.values = generate_values(spec);
    return series;
}

std::string test_kind_name(TestKind kind) {
    return kind == TestKind::Sadf ? "sadf" : "gsadf";
}

namespace {

PowerReport make_report(TestKind kind, const CvTable& cv, int reps, int rejections) {
    PowerReport rep;
    rep.test = test_kind_name(kind);
    rep.reps = reps;
    rep.rejection_rate = static_cast<double>(rejections) / reps;
    rep.cv_used = kind == TestKind::Sadf ? cv.sadf_at(0.95) : cv.gsadf_at(0.95);
    rep.cv_provenance = cv.provenance;
    rep.cv_lags = cv.lags;
    return rep;
}

struct PairCounts {
    int sadf = 0;
    int gsadf = 0;
};

PairCounts run_replications(const DgpSpec& spec, const CvTable& cv, int reps, int workers) {
    if (reps < 1) throw std::invalid_argument("power_study: reps must be >= 1");
    if (cv.provenance.T != spec.length())
        throw std::invalid_argument("power_study: critical-value table simulated for T = " +
                                    std::to_string(cv.provenance.T) + ", DGP has T = " +
                                    std::to_string(spec.length()));
    spec.validate();
    const WindowRule rule = WindowRule::explicit_r0(cv.provenance.r0);
    const LagPolicy lags = LagPolicy::parse(cv.lags);
    const double sadf_cv = cv.sadf_at(0.95);
    const double gsadf_cv = cv.gsadf_at(0.95);

    std::vector<unsigned char> sadf_rej(reps, 0);
    std::vector<unsigned char> gsadf_rej(reps, 0);
    parallel_for(reps, workers, [&](int i) {
        DgpSpec rep_spec = spec;
        rep_spec.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
        std::vector<double> y = generate_values(rep_spec);
        SweepResult sweep = run_sweep(y, rule, lags, 1);
        sadf_rej[i] = sweep.sadf_stat > sadf_cv ? 1 : 0;
        gsadf_rej[i] = sweep.gsadf_stat > gsadf_cv ? 1 : 0;
    });

    PairCounts counts;
    for (int i = 0; i < reps; ++i) {
        counts.sadf += sadf_rej[i];
        counts.gsadf += gsadf_rej[i];
    }
    return counts;
}

}  // namespace

PowerReport power_study(const DgpSpec& spec, TestKind test, const CvTable& cv, int reps,
                        int workers) {
    PairCounts counts = run_replications(spec, cv, reps, workers);
    return make_report(test, cv, reps,
                       test == TestKind::Sadf ? counts.sadf : counts.gsadf);
}

PowerPair power_study_pair(const DgpSpec& spec, const CvTable& cv, int reps, int workers) {
    PairCounts counts = run_replications(spec, cv, reps, workers);
    return PowerPair{make_report(TestKind::Sadf, cv, reps, counts.sadf),
                     make_report(TestKind::Gsadf, cv, reps, counts.gsadf)};
}

}  // namespace bubbletk
