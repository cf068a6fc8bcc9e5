#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace bubbletk {

// How the lag order k of the ADF regression is chosen.
struct LagPolicy {
    enum class Kind { Fixed, Schwert, Aic, Bic };
    Kind kind = Kind::Fixed;
    int k = 0;      // Fixed
    int k_max = 0;  // Aic / Bic search bound

    static LagPolicy fixed(int k);
    static LagPolicy schwert();
    static LagPolicy aic(int k_max);
    static LagPolicy bic(int k_max);

    // Search policies re-select per window; Fixed and Schwert resolve once.
    bool per_window() const { return kind == Kind::Aic || kind == Kind::Bic; }

    // Stable textual form used in cache keys and run manifests,
    // e.g. "fixed:1", "schwert", "aic:4".
    std::string str() const;
    static LagPolicy parse(const std::string& s);
};

// Fit of  dy_t = alpha + gamma*y_{t-1} + sum_i delta_i*dy_{t-i} + e_t
// on one window. stat is the OLS t-ratio on gamma (so beta = 1 + gamma).
struct AdfResult {
    double stat = 0.0;   // +/-infinity when perfect_fit, taking the sign of gamma
    double gamma = 0.0;  // coefficient on y_{t-1}; beta = 1 + gamma
    int k_used = 0;
    int n_used = 0;  // effective observations = window length - k_used - 1
    // Zero residual variance with positive degrees of freedom: the window is
    // an exact AR recursion. The sentinel stat is +inf when gamma > 0 (an
    // exact explosive recursion, dominating any supremum) and -inf when
    // gamma < 0; an exact fit with gamma == 0 identifies nothing and is
    // reported as DegenerateFit instead.
    bool perfect_fit = false;
};

// A window whose regression cannot be estimated: collinear design (constant
// window) or too few degrees of freedom to estimate the residual variance.
struct DegenerateFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// floor(4 * (T/100)^(1/4)).
int schwert_lag(int window_length);

// Resolve the lag order for a window of the given length. The span overload
// is required for Aic/Bic, which search on the data. Throws
// std::invalid_argument when the resolved k leaves fewer than 3 effective
// observations.
int select_lags(const LagPolicy& policy, int window_length);
int select_lags(const LagPolicy& policy, std::span<const double> window);

AdfResult fit_adf(std::span<const double> window, int k);

// Fits the window under the given policy (resolving lags per the policy on
// this window) and returns the result. For Fixed/Schwert this equals
// fit_adf(window, select_lags(policy, length)).
AdfResult fit_adf_policy(std::span<const double> window, const LagPolicy& policy);

}  // namespace bubbletk
