#pragma once

// Neyman-Pearson layer for H0: alpha = alpha0 vs H1: alpha = alpha1.
//
// The statistic psi is the squared L2(mu) norm of the observed path and the
// likelihood ratio is the monotone map
//   bridge: phi = exp((alpha0-alpha1)(psi + ln(1-T))/2)
//   ou:     phi = exp((alpha0-alpha1)(psi - T)/2),
// so every phi-probability reduces to a psi-probability. Under either
// hypothesis psi is a weighted chi-square form whose weights come from the
// spectral module (H1 swaps the roles of alpha0/alpha1: mu is symmetric in
// them while the kernel becomes R^{(alpha1)}). The bridge boundary case
// alpha0 + alpha1 = 1 has a degenerate density and psi = X_T^2/(1-T), giving
// the closed Gaussian form evaluated through erf.

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "bridgelrt/process.hpp"
#include "bridgelrt/smirnov.hpp"
#include "bridgelrt/spectrum.hpp"

namespace bridgelrt {

enum class Hypothesis { H0, H1 };

struct TestReport {
    double psi = 0.0;
    double phi = 0.0;
    double critical_value = 0.0;
    double p_value = 0.0;
    bool reject = false;
    double level_q = 0.0;
    std::optional<double> power;  // derived-H1 basis when present
};

inline double psi_statistic(const ProcessParams& params, const Trajectory& traj) {
    validate_params(params);
    validate_trajectory(traj);
    if (std::abs(traj.times.back() - params.horizon) > 1e-9)
        throw std::invalid_argument(
            "psi_statistic: trajectory must reach the horizon T");
    const double x_T = traj.values.back();
    if (params.kind == ProcessKind::bridge) {
        const double integral = detail::trapezoid(
            traj.times, traj.values,
            [](double s, double x) { return x * x / ((1.0 - s) * (1.0 - s)); });
        return x_T * x_T / (1.0 - params.horizon) +
               (params.alpha0 + params.alpha1 - 1.0) * integral;
    }
    const double integral = detail::trapezoid(
        traj.times, traj.values, [](double, double x) { return x * x; });
    return x_T * x_T + (params.alpha0 + params.alpha1) * integral;
}

inline double likelihood_ratio(const ProcessParams& params, double psi) {
    if (!(psi >= 0.0)) throw std::invalid_argument("likelihood_ratio: psi must be >= 0");
    const double half_diff = 0.5 * (params.alpha0 - params.alpha1);
    if (params.kind == ProcessKind::bridge)
        return std::exp(half_diff * (psi + std::log1p(-params.horizon)));
    return std::exp(half_diff * (psi - params.horizon));
}

// extreme attainable value of phi, reached at psi = 0:
// (1-T)^{(alpha0-alpha1)/2} for the bridge, e^{-(alpha0-alpha1)T/2} for OU;
// an upper bound when alpha0 < alpha1, a lower bound otherwise
inline double phi_support_bound(const ProcessParams& params) {
    return likelihood_ratio(params, 0.0);
}

// psi value mapped to by phi = x under the monotone likelihood-ratio map
inline double psi_threshold(const ProcessParams& params, double x) {
    const double base = 2.0 * std::log(x) / (params.alpha0 - params.alpha1);
    if (params.kind == ProcessKind::bridge)
        return base - std::log1p(-params.horizon);
    return base + params.horizon;
}

// Exact law of the likelihood ratio under either hypothesis. Holds lazily
// built spectra, so repeated evaluations (quantile searches, Monte Carlo
// validation) do not recompute eigenvalues.
class LikelihoodRatioDist {
  public:
    explicit LikelihoodRatioDist(const ProcessParams& params, std::size_t n_eigs = 200)
        : params_(params), n_eigs_(n_eigs) {
        validate_test_params(params);
        closed_form_ = params.kind == ProcessKind::bridge &&
                       params.alpha0 + params.alpha1 == 1.0;
    }

    const ProcessParams& params() const { return params_; }
    bool closed_form() const { return closed_form_; }

    // P_h(psi <= y)
    double psi_cdf(double y, Hypothesis h, double tol) const {
        if (y <= 0.0) return 0.0;
        if (closed_form_)
            return std::erf(std::sqrt(y / (2.0 * chi_scale(h))));
        return qf(h).cdf(y, tol);
    }

    double psi_quantile(double p, Hypothesis h, double tol) const {
        if (!(p > 0.0) || !(p < 1.0))
            throw std::invalid_argument("psi_quantile: p must lie in (0,1)");
        if (!closed_form_) return qf(h).quantile(p, tol);
        const double scale = chi_scale(h);
        double lo = 0.0;
        double hi = scale * (1.0 + 40.0 * std::sqrt(2.0));
        for (int iter = 0; iter < 300; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double c = psi_cdf(mid, h, tol);
            if (std::abs(c - p) < tol) return mid;
            (c < p ? lo : hi) = mid;
        }
        throw std::runtime_error("psi_quantile: bisection failed to reach tolerance");
    }

    double cdf(double x, double tol) const { return cdf(x, Hypothesis::H0, tol); }

    // P_h(phi <= x); x beyond the attainable range returns exact 0 or 1
    double cdf(double x, Hypothesis h, double tol) const {
        if (x <= 0.0) return 0.0;
        const double bound = phi_support_bound(params_);
        const bool decreasing = params_.alpha0 < params_.alpha1;  // phi vs psi
        if (decreasing && x >= bound) return 1.0;
        if (!decreasing && x <= bound) return 0.0;
        const double y = psi_threshold(params_, x);
        const double c = psi_cdf(y, h, tol);
        return decreasing ? 1.0 - c : c;
    }

    // c with P_{H0}(phi > c) = q (+/- tol in probability)
    double critical_value(double q, double tol) const {
        if (!(q > 0.0) || !(q < 1.0))
            throw std::invalid_argument("critical_value: q must lie in (0,1)");
        const bool decreasing = params_.alpha0 < params_.alpha1;
        const double p = decreasing ? q : 1.0 - q;
        return likelihood_ratio(params_, psi_quantile(p, Hypothesis::H0, tol));
    }

    // upper-tail p-value P_{H0}(phi > observed)
    double p_value(double phi_observed, double tol) const {
        return 1.0 - cdf(phi_observed, Hypothesis::H0, tol);
    }

    // P_{H1}(phi > c(q)), the power of the level-q test
    double power(double q, double tol) const {
        if (!(q > 0.0) || !(q < 1.0))
            throw std::invalid_argument("power: q must lie in (0,1)");
        const bool decreasing = params_.alpha0 < params_.alpha1;
        const double psi_c =
            psi_quantile(decreasing ? q : 1.0 - q, Hypothesis::H0, tol);
        const double c1 = psi_cdf(psi_c, Hypothesis::H1, tol);
        return decreasing ? c1 : 1.0 - c1;
    }

  private:
    // scale of the chi-square(1) law of psi in the closed-form branch
    double chi_scale(Hypothesis h) const {
        const double alpha = h == Hypothesis::H0 ? params_.alpha0 : params_.alpha1;
        return covariance(params_.kind, alpha, params_.horizon, params_.horizon) /
               (1.0 - params_.horizon);
    }

    const QuadraticFormDist& qf(Hypothesis h) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = h == Hypothesis::H0 ? qf0_ : qf1_;
        if (!slot) {
            const ProcessParams p =
                h == Hypothesis::H0 ? params_ : swapped(params_);
            slot = std::make_unique<QuadraticFormDist>(compute_spectrum(p, n_eigs_));
        }
        return *slot;
    }

    ProcessParams params_;
    std::size_t n_eigs_;
    bool closed_form_ = false;
    mutable std::unique_ptr<QuadraticFormDist> qf0_, qf1_;
    mutable std::mutex mutex_;
};

inline double lr_cdf(const ProcessParams& params, double x, Hypothesis h, double tol) {
    return LikelihoodRatioDist(params).cdf(x, h, tol);
}

inline double critical_value(const ProcessParams& params, double q, double tol) {
    return LikelihoodRatioDist(params).critical_value(q, tol);
}

inline double power(const ProcessParams& params, double q, double tol) {
    return LikelihoodRatioDist(params).power(q, tol);
}

inline TestReport run_test(const ProcessParams& params, const Trajectory& traj,
                           double q, double tol = 1e-8, bool with_power = false) {
    if (!(q > 0.0) || !(q < 1.0))
        throw std::invalid_argument("run_test: q must lie in (0,1)");
    validate_test_params(params);
    LikelihoodRatioDist dist(params);
    TestReport report;
    report.level_q = q;
    report.psi = psi_statistic(params, traj);
    report.phi = likelihood_ratio(params, report.psi);
    report.critical_value = dist.critical_value(q, tol);
    report.p_value = dist.p_value(report.phi, tol);
    report.reject = report.phi > report.critical_value;
    if (with_power) report.power = dist.power(q, tol);
    return report;
}

}  // namespace bridgelrt
