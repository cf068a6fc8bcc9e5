#include "bubbletk/adf.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace bubbletk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative residual threshold below which a window counts as an exact fit.
constexpr double kPerfectFitRelTol = 1e-20;

struct Design {
    Eigen::MatrixXd x;  // [1, y_{t-1}, dy_{t-1}, ..., dy_{t-k}]
    Eigen::VectorXd z;  // dy_t
};

// Rows t = first_row .. len-1 of the ADF regression on the window.
// first_row >= k + 1 so every lagged difference exists.
Design build_design(std::span<const double> y, int k, int first_row) {
    const int len = static_cast<int>(y.size());
    const int n = len - first_row;
    const int p = k + 2;
    Design d;
    d.x.resize(n, p);
    d.z.resize(n);
    for (int t = first_row; t < len; ++t) {
        const int r = t - first_row;
        d.z(r) = y[t] - y[t - 1];
        d.x(r, 0) = 1.0;
        d.x(r, 1) = y[t - 1];
        for (int i = 1; i <= k; ++i) d.x(r, 1 + i) = y[t - i] - y[t - i - 1];
    }
    return d;
}

struct OlsFit {
    Eigen::VectorXd coef;
    double rss = 0.0;
    double zss = 0.0;
    int n = 0;
    bool singular = false;
    double se_second = 0.0;  // se of the y_{t-1} coefficient; 0 when unusable
    int dof = 0;
};

OlsFit ols(const Design& d) {
    OlsFit f;
    f.n = static_cast<int>(d.x.rows());
    const int p = static_cast<int>(d.x.cols());
    f.dof = f.n - p;
    if (f.n < p) {
        f.singular = true;
        return f;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
    if (qr.rank() < p) {
        f.singular = true;
        return f;
    }
    f.coef = qr.solve(d.z);
    Eigen::VectorXd resid = d.z - d.x * f.coef;
    f.rss = resid.squaredNorm();
    f.zss = d.z.squaredNorm();
    if (f.dof >= 1) {
        double sigma2 = f.rss / f.dof;
        // [(X'X)^{-1}]_{11} via the triangular factor: X P = Q R.
        Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
        u(1) = 1.0;
        u = qr.colsPermutation().transpose() * u;
        Eigen::MatrixXd r_fac =
            qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
        Eigen::VectorXd w = r_fac.transpose().triangularView<Eigen::Lower>().solve(u);
        f.se_second = std::sqrt(sigma2 * w.squaredNorm());
    }
    return f;
}

double perfect_fit_tol(double zss) {
    return kPerfectFitRelTol * std::max(zss, std::numeric_limits<double>::min());
}

bool perfect_fit(const OlsFit& f) { return f.rss <= perfect_fit_tol(f.zss); }

// Least-squares RSS of the restricted regression that omits the y_{t-1}
// column. When this is itself an exact fit, the window's differences are
// fully explained with no autoregressive term, so gamma is unidentified.
double restricted_rss(const Design& d) {
    const int p = static_cast<int>(d.x.cols());
    Eigen::MatrixXd xr(d.x.rows(), p - 1);
    xr.col(0) = d.x.col(0);
    if (p > 2) xr.rightCols(p - 2) = d.x.rightCols(p - 2);
    Eigen::VectorXd coef = xr.colPivHouseholderQr().solve(d.z);
    return (d.z - xr * coef).squaredNorm();
}

double info_criterion(LagPolicy::Kind kind, double rss, int n, int p) {
    double sigma2 = rss / n;
    double ll = sigma2 > 0.0 ? std::log(sigma2) : -kInf;
    double penalty = (kind == LagPolicy::Kind::Aic) ? 2.0 * p / n : std::log(double(n)) * p / n;
    return ll + penalty;
}

// Smallest-k-wins argmin of AIC/BIC over k = 0..k_cap on the common sample
// that conditions on k_cap initial observations. Returns -1 when no
// candidate regression is estimable.
int search_lags(std::span<const double> y, LagPolicy::Kind kind, int k_cap) {
    const int first_row = k_cap + 1;
    int best_k = -1;
    double best_crit = kInf;
    for (int k = 0; k <= k_cap; ++k) {
        OlsFit f = ols(build_design(y, k, first_row));
        if (f.singular) continue;
        double crit = f.rss > 0.0 ? info_criterion(kind, f.rss, f.n, k + 2) : -kInf;
        if (crit < best_crit) {
            best_crit = crit;
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace

LagPolicy LagPolicy::fixed(int k) {
    if (k < 0) throw std::invalid_argument("LagPolicy: k must be >= 0");
    return LagPolicy{Kind::Fixed, k, 0};
}
LagPolicy LagPolicy::schwert() { return LagPolicy{Kind::Schwert, 0, 0}; }
LagPolicy LagPolicy::aic(int k_max) {
    if (k_max < 0) throw std::invalid_argument("LagPolicy: k_max must be >= 0");
    return LagPolicy{Kind::Aic, 0, k_max};
}
LagPolicy LagPolicy::bic(int k_max) {
    if (k_max < 0) throw std::invalid_argument("LagPolicy: k_max must be >= 0");
    return LagPolicy{Kind::Bic, 0, k_max};
}

std::string LagPolicy::str() const {
    switch (kind) {
        case Kind::Fixed: return "fixed:" + std::to_string(k);
        case Kind::Schwert: return "schwert";
        case Kind::Aic: return "aic:" + std::to_string(k_max);
        case Kind::Bic: return "bic:" + std::to_string(k_max);
    }
    return "?";
}

LagPolicy LagPolicy::parse(const std::string& s) {
    if (s == "schwert") return schwert();
    auto colon = s.find(':');
    std::string head = s.substr(0, colon);
    int arg = 0;
    if (colon != std::string::npos) {
        try {
            arg = std::stoi(s.substr(colon + 1));
        } catch (...) {
            throw std::invalid_argument("LagPolicy: bad argument in '" + s + "'");
        }
    }
    if (head == "fixed") return fixed(arg);
    if (head == "aic") return aic(arg);
    if (head == "bic") return bic(arg);
    throw std::invalid_argument("LagPolicy: unknown policy '" + s + "'");
}

int schwert_lag(int window_length) {
    if (window_length < 1) throw std::invalid_argument("schwert_lag: length must be >= 1");
    return static_cast<int>(std::floor(4.0 * std::pow(window_length / 100.0, 0.25) + 1e-9));
}

namespace {
void check_effective(int k, int window_length) {
    if (window_length - k - 1 < 3)
        throw std::invalid_argument(
            "select_lags: k = " + std::to_string(k) + " leaves fewer than 3 effective "
            "observations in a window of length " + std::to_string(window_length));
}
}  // namespace

int select_lags(const LagPolicy& policy, int window_length) {
    if (window_length < 4) throw std::invalid_argument("select_lags: window too short");
    switch (policy.kind) {
        case LagPolicy::Kind::Fixed:
            check_effective(policy.k, window_length);
            return policy.k;
        case LagPolicy::Kind::Schwert: {
            int k = schwert_lag(window_length);
            check_effective(k, window_length);
            return k;
        }
        default:
            throw std::invalid_argument("select_lags: AIC/BIC selection needs the window data");
    }
}

int select_lags(const LagPolicy& policy, std::span<const double> window) {
    const int len = static_cast<int>(window.size());
    if (!policy.per_window()) return select_lags(policy, len);
    int k_cap = std::min(policy.k_max, (len - 4) / 2);
    if (len < 4 || k_cap < 0) throw DegenerateFit("lag search: window too short");
    int k = search_lags(window, policy.kind, k_cap);
    if (k < 0) throw DegenerateFit("lag search: no estimable candidate regression");
    return k;
}

AdfResult fit_adf(std::span<const double> window, int k) {
    const int len = static_cast<int>(window.size());
    if (k < 0) throw std::invalid_argument("fit_adf: k must be >= 0");
    if (len < k + 3)
        throw std::invalid_argument("fit_adf: window length " + std::to_string(len) +
                                    " < k + 3 with k = " + std::to_string(k));
    for (double v : window)
        if (!std::isfinite(v)) throw std::invalid_argument("fit_adf: non-finite value in window");

    Design d = build_design(window, k, k + 1);
    OlsFit f = ols(d);
    if (f.singular) throw DegenerateFit("fit_adf: singular design matrix");

    AdfResult res;
    res.k_used = k;
    res.n_used = f.n;
    res.gamma = f.coef(1);
    if (f.dof < 1) throw DegenerateFit("fit_adf: zero degrees of freedom");
    if (perfect_fit(f)) {
        // An exact fit drives se to zero, so the statistic diverges with the
        // sign of gamma -- unless the fit is exact even without y_{t-1}
        // (flat tails, pure linear ramps), in which case gamma identifies
        // nothing and the window is degenerate.
        if (restricted_rss(d) <= perfect_fit_tol(f.zss))
            throw DegenerateFit("fit_adf: exact fit without an autoregressive signal");
        res.stat = f.coef(1) > 0.0 ? kInf : -kInf;
        res.perfect_fit = true;
        return res;
    }
    res.stat = f.coef(1) / f.se_second;
    return res;
}

AdfResult fit_adf_policy(std::span<const double> window, const LagPolicy& policy) {
    return fit_adf(window, select_lags(policy, window));
}

}  // namespace bubbletk
