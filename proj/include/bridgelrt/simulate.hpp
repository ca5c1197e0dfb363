#pragma once

// Monte Carlo validation harness: path ensembles with per-path substreams,
// empirical CDFs, Kolmogorov-Smirnov distances, and the end-to-end
// calibration experiment comparing simulated psi/phi laws against the
// spectral formulas. Results are independent of the worker count because
// every path draws from the substream (seed, path index) and aggregation
// happens in index order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bridgelrt/decision.hpp"
#include "bridgelrt/process.hpp"
#include "bridgelrt/rng.hpp"

namespace bridgelrt {

class EmpiricalCdf {
  public:
    explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
        if (sorted_.empty())
            throw std::invalid_argument("empirical cdf: need at least one sample");
        std::sort(sorted_.begin(), sorted_.end());
    }

    // right-continuous step function, O(log n) per query
    double operator()(double x) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) /
               static_cast<double>(sorted_.size());
    }

    const std::vector<double>& sorted_samples() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

  private:
    std::vector<double> sorted_;
};

// sup |a - b| over the probe set; callers include all sample jump locations
inline double ks_distance(const std::function<double(double)>& cdf_a,
                          const std::function<double(double)>& cdf_b,
                          std::span<const double> probes) {
    if (probes.size() < 100)
        throw std::invalid_argument("ks_distance: need at least 100 probe points");
    double sup = 0.0;
    for (double x : probes) sup = std::max(sup, std::abs(cdf_a(x) - cdf_b(x)));
    return sup;
}

// exact KS statistic of an empirical CDF against a continuous CDF, probing
// both sides of every jump
template <typename F>
double ks_vs_continuous(const EmpiricalCdf& empirical, F&& cdf) {
    const auto& xs = empirical.sorted_samples();
    const double n = static_cast<double>(xs.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        sup = std::max(sup, std::abs(f - static_cast<double>(i + 1) / n));
        sup = std::max(sup, std::abs(f - static_cast<double>(i) / n));
    }
    return sup;
}

inline unsigned simulation_threads() {
    if (const char* env = std::getenv("BRIDGE_LRT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// per-path functionals sufficient for psi under any (alpha0, alpha1) pair:
// the terminal value and the trapezoid of X^2/(1-s)^2 (bridge) or X^2 (ou)
struct PathFunctionals {
    double x_T = 0.0;
    double weighted_integral = 0.0;
};

inline std::vector<PathFunctionals> simulate_functionals(
    ProcessKind kind, double alpha_true, double horizon, double grid_step,
    std::size_t n_paths, std::uint64_t seed) {
    if (!(grid_step > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("simulate_functionals: bad grid");
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / grid_step - 1e-12));
    std::vector<double> times(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        times[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
    times.back() = horizon;

    std::vector<detail::Transition> trans(steps);
    std::vector<double> wgt(steps + 1);  // integrand weight at each node
    for (std::size_t i = 0; i < steps; ++i)
        trans[i] = detail::make_transition(kind, alpha_true, times[i], times[i + 1]);
    for (std::size_t i = 0; i <= steps; ++i)
        wgt[i] = kind == ProcessKind::bridge
                     ? 1.0 / ((1.0 - times[i]) * (1.0 - times[i]))
                     : 1.0;

    std::vector<PathFunctionals> out(n_paths);
    const auto run_block = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            Rng rng(seed, p);
            double x = 0.0;
            double integral = 0.0;
            double prev_g = 0.0;
            for (std::size_t i = 0; i < steps; ++i) {
                x = trans[i].factor * x + trans[i].stddev * rng.next_gaussian();
                const double g = x * x * wgt[i + 1];
                integral += 0.5 * (prev_g + g) * (times[i + 1] - times[i]);
                prev_g = g;
            }
            out[p] = {x, integral};
        }
    };

    const unsigned workers =
        std::min<unsigned>(simulation_threads(),
                           static_cast<unsigned>(std::max<std::size_t>(n_paths / 256, 1)));
    if (workers <= 1) {
        run_block(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_paths + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t b = std::min<std::size_t>(w * chunk, n_paths);
            const std::size_t e = std::min<std::size_t>(b + chunk, n_paths);
            if (b < e) pool.emplace_back(run_block, b, e);
        }
        for (auto& t : pool) t.join();
    }
    return out;
}

inline double psi_from_functionals(const ProcessParams& params,
                                   const PathFunctionals& f) {
    if (params.kind == ProcessKind::bridge)
        return f.x_T * f.x_T / (1.0 - params.horizon) +
               (params.alpha0 + params.alpha1 - 1.0) * f.weighted_integral;
    return f.x_T * f.x_T + (params.alpha0 + params.alpha1) * f.weighted_integral;
}

struct ValidationReport {
    ProcessParams params;
    std::size_t n_paths = 0;
    double grid_step = 0.0;
    double level_q = 0.0;
    double ks_psi = 0.0;
    double ks_phi = 0.0;
    double rejection_rate = 0.0;
    std::uint64_t seed = 0;
};

// End-to-end distributional check: simulate H0 paths, compare the empirical
// psi and phi laws against the spectral formulas, and run the level-q test.
inline ValidationReport validate(const ProcessParams& params, std::size_t n_paths,
                                 double grid_step, double q, std::uint64_t seed,
                                 double tol = 1e-8,
                                 std::vector<std::pair<double, double>>* psi_phi_dump = nullptr) {
    validate_test_params(params);
    if (n_paths < 1000)
        throw std::invalid_argument("validate: need at least 1000 paths");
    if (!(grid_step > 0.0) || grid_step > 0.01 * params.horizon)
        throw std::invalid_argument("validate: grid_step must be in (0, T/100]");
    if (!(q > 0.0) || !(q < 1.0))
        throw std::invalid_argument("validate: q must lie in (0,1)");

    const auto funcs = simulate_functionals(params.kind, params.alpha0,
                                            params.horizon, grid_step, n_paths, seed);
    std::vector<double> psi(n_paths), phi(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        psi[i] = psi_from_functionals(params, funcs[i]);
        phi[i] = likelihood_ratio(params, psi[i]);
    }
    if (psi_phi_dump) {
        psi_phi_dump->clear();
        psi_phi_dump->reserve(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i)
            psi_phi_dump->emplace_back(psi[i], phi[i]);
    }

    LikelihoodRatioDist dist(params);
    const double c = dist.critical_value(q, tol);
    std::size_t rejections = 0;
    for (double v : phi)
        if (v > c) ++rejections;

    ValidationReport report;
    report.params = params;
    report.n_paths = n_paths;
    report.grid_step = grid_step;
    report.level_q = q;
    report.seed = seed;
    report.rejection_rate =
        static_cast<double>(rejections) / static_cast<double>(n_paths);
    report.ks_psi = ks_vs_continuous(EmpiricalCdf(std::move(psi)), [&](double y) {
        return dist.psi_cdf(y, Hypothesis::H0, tol);
    });
    report.ks_phi = ks_vs_continuous(EmpiricalCdf(std::move(phi)), [&](double x) {
        return dist.cdf(x, Hypothesis::H0, tol);
    });
    return report;
}

}  // namespace bridgelrt
