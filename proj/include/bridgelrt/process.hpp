#pragma once

// Gaussian process layer: covariance kernels of the alpha-Brownian bridge
// (dX = dW - alpha X/(1-t) dt on [0,1)) and the Ornstein-Uhlenbeck process
// (dX = dW - alpha X dt), conditional expectations, exact-transition path
// sampling, the maximum-likelihood estimator of alpha, and the self-similar
// rescaling of bridges observed on [0,S].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelrt/rng.hpp"

namespace bridgelrt {

enum class ProcessKind { bridge, ou };

inline const char* to_string(ProcessKind kind) {
    return kind == ProcessKind::bridge ? "bridge" : "ou";
}

struct ProcessParams {
    ProcessKind kind = ProcessKind::bridge;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double horizon = 0.0;  // T
};

inline void validate_params(const ProcessParams& p) {
    if (!(p.alpha0 >= 0.0) || !(p.alpha1 >= 0.0))
        throw std::invalid_argument("process params: alpha0 and alpha1 must be >= 0");
    if (!std::isfinite(p.horizon) || !(p.horizon > 0.0))
        throw std::invalid_argument("process params: horizon T must be positive and finite");
    if (p.kind == ProcessKind::bridge) {
        if (p.horizon >= 1.0) {
            if (p.horizon == 1.0)
                throw std::invalid_argument(
                    "process params: T = 1 rejected; with the full bridge path the "
                    "hypotheses can be told apart without error, so there is no "
                    "likelihood-ratio distribution to compute");
            throw std::invalid_argument("process params: bridge requires T < 1");
        }
        if (p.alpha0 + p.alpha1 < 1.0)
            throw std::invalid_argument(
                "process params: bridge requires alpha0 + alpha1 >= 1");
    } else {
        if (!(p.alpha0 + p.alpha1 > 0.0))
            throw std::invalid_argument("process params: ou requires alpha0 + alpha1 > 0");
    }
}

// true iff the spectral (Karhunen-Loeve) machinery applies; the bridge case
// alpha0 + alpha1 = 1 is handled by the closed-form decision branch instead
inline bool has_spectral_path(const ProcessParams& p) {
    return p.kind == ProcessKind::ou || p.alpha0 + p.alpha1 > 1.0;
}

// the testing problem itself additionally needs distinct hypotheses
// (alpha0 = alpha1 makes the likelihood ratio identically 1); the spectral
// layer stays meaningful at equal alphas
inline void validate_test_params(const ProcessParams& p) {
    validate_params(p);
    if (p.alpha0 == p.alpha1)
        throw std::invalid_argument(
            "test params: alpha0 and alpha1 must differ, otherwise the likelihood "
            "ratio is identically 1");
}

inline ProcessParams swapped(const ProcessParams& p) {
    return ProcessParams{p.kind, p.alpha1, p.alpha0, p.horizon};
}

// Covariance R^{(alpha)}(s,t).
//
// Bridge: ((1-s)(1-t))^alpha (1-(1-s^t)^{1-2alpha})/(1-2alpha), with the
// logarithmic limit -((1-s)(1-t))^alpha ln(1-s^t) inside |alpha-1/2| < 1e-9
// where the (1-2alpha) denominator cancels. OU: (e^{-a|s-t|}-e^{-a(s+t)})/(2a),
// evaluated through expm1 so alpha -> 0 degrades gracefully to s^t.
inline double covariance(ProcessKind kind, double alpha, double s, double t) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("covariance: alpha must be >= 0");
    if (kind == ProcessKind::bridge) {
        if (!(s >= 0.0) || !(t >= 0.0) || s > 1.0 || t > 1.0)
            throw std::invalid_argument("covariance: bridge domain is [0,1]");
        const double m = std::min(s, t);
        if (m >= 1.0) return alpha == 0.0 ? 1.0 : 0.0;  // s = t = 1
        if (m == 0.0) return 0.0;
        const double outer = std::pow((1.0 - s) * (1.0 - t), alpha);
        if (std::abs(alpha - 0.5) < 1e-9)
            return outer * (-std::log1p(-m));
        const double w = 1.0 - 2.0 * alpha;
        return outer * (-std::expm1(w * std::log1p(-m)) / w);
    }
    if (!(s >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("covariance: ou domain is [0,inf)");
    const double d = std::abs(s - t);
    const double span = s + t - d;  // 2 min(s,t)
    if (alpha == 0.0) return 0.5 * span;
    return std::exp(-alpha * d) * (-std::expm1(-alpha * span)) / (2.0 * alpha);
}

// E[X_t | F_s] given X_s = x: the mean-reversion factor applied to x.
inline double expected_future(ProcessKind kind, double alpha, double s, double t,
                              double x) {
    if (!(alpha >= 0.0))
        throw std::invalid_argument("expected_future: alpha must be >= 0");
    if (!(s >= 0.0) || !(t >= s))
        throw std::invalid_argument("expected_future: need 0 <= s <= t");
    if (kind == ProcessKind::bridge) {
        if (t > 1.0) throw std::invalid_argument("expected_future: bridge needs t <= 1");
        if (alpha == 0.0) return x;                       // martingale case
        if (t >= 1.0) return 0.0;                         // bridge pins to 0
        return std::pow((1.0 - t) / (1.0 - s), alpha) * x;
    }
    return std::exp(-alpha * (t - s)) * x;
}

struct Trajectory {
    std::vector<double> times;   // strictly increasing, times[0] = 0
    std::vector<double> values;  // values[0] = 0
};

inline void validate_trajectory(const Trajectory& traj) {
    if (traj.times.empty() || traj.times.size() != traj.values.size())
        throw std::invalid_argument("trajectory: times/values must be non-empty and equal length");
    if (traj.times.front() != 0.0 || traj.values.front() != 0.0)
        throw std::invalid_argument("trajectory: must start at (t,x) = (0,0)");
    for (std::size_t i = 1; i < traj.times.size(); ++i)
        if (!(traj.times[i] > traj.times[i - 1]))
            throw std::invalid_argument("trajectory: times must be strictly increasing");
}

namespace detail {

// one-step Gaussian transition u -> v, exact in distribution
struct Transition {
    double factor;
    double stddev;
};

inline Transition make_transition(ProcessKind kind, double alpha, double u, double v) {
    Transition tr;
    tr.factor = expected_future(kind, alpha, u, v, 1.0);
    const double var = covariance(kind, alpha, v, v) -
                       tr.factor * tr.factor * covariance(kind, alpha, u, u);
    tr.stddev = std::sqrt(std::max(var, 0.0));
    return tr;
}

// trapezoid of f(t_i, x_i) over the trajectory grid
template <typename F>
double trapezoid(const std::vector<double>& times, const std::vector<double>& values,
                 F&& f) {
    double sum = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double fa = f(times[i - 1], values[i - 1]);
        const double fb = f(times[i], values[i]);
        sum += 0.5 * (fa + fb) * (times[i] - times[i - 1]);
    }
    return sum;
}

}  // namespace detail

inline Trajectory sample_path(ProcessKind kind, double alpha,
                              const std::vector<double>& grid, Rng& rng) {
    if (grid.empty() || grid.front() != 0.0)
        throw std::invalid_argument("sample_path: grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("sample_path: grid must be strictly increasing");
    if (kind == ProcessKind::bridge && grid.back() >= 1.0)
        throw std::invalid_argument("sample_path: bridge grid times must be < 1");

    Trajectory traj;
    traj.times = grid;
    traj.values.resize(grid.size(), 0.0);
    double x = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto tr = detail::make_transition(kind, alpha, grid[i - 1], grid[i]);
        x = tr.factor * x + tr.stddev * rng.next_gaussian();
        traj.values[i] = x;
    }
    return traj;
}

inline Trajectory sample_path(ProcessKind kind, double alpha,
                              const std::vector<double>& grid, std::uint64_t seed) {
    Rng rng(seed);
    return sample_path(kind, alpha, grid, rng);
}

// Maximum-likelihood estimate of the bridge scaling parameter from a
// discretely observed path:
//   alpha_hat = (-X_T^2/(1-T) + I - ln(1-T)) / (2 I),  I = int X^2/(1-s)^2 ds,
// with I by trapezoid on the trajectory's own grid.
inline double mle_alpha(const Trajectory& traj) {
    validate_trajectory(traj);
    if (traj.times.size() < 2)
        throw std::invalid_argument("mle_alpha: need at least 2 points");
    const double T = traj.times.back();
    if (T >= 1.0) throw std::invalid_argument("mle_alpha: bridge domain requires T < 1");
    const double integral = detail::trapezoid(
        traj.times, traj.values,
        [](double s, double x) { return x * x / ((1.0 - s) * (1.0 - s)); });
    if (integral == 0.0)
        throw std::invalid_argument(
            "mle_alpha: degenerate trajectory (identically zero path)");
    const double x_T = traj.values.back();
    return (-x_T * x_T / (1.0 - T) + integral - std::log1p(-T)) / (2.0 * integral);
}

// Self-similar rescaling of a path observed on [0,S] to the unit interval:
// times scale by 1/S, values by 1/sqrt(S).
inline Trajectory rescale_to_unit(const Trajectory& traj, double span) {
    if (!(span > 0.0)) throw std::invalid_argument("rescale_to_unit: S must be > 0");
    validate_trajectory(traj);
    if (traj.times.back() > span)
        throw std::invalid_argument("rescale_to_unit: trajectory exceeds [0,S]");
    Trajectory out;
    out.times.reserve(traj.times.size());
    out.values.reserve(traj.values.size());
    const double inv_sqrt = 1.0 / std::sqrt(span);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out.times.push_back(traj.times[i] / span);
        out.values.push_back(traj.values[i] * inv_sqrt);
    }
    return out;
}

}  // namespace bridgelrt
