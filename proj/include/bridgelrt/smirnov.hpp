#pragma once

// Distribution of Q = sum_k lambda_k N_k^2 for a strictly decreasing positive
// sequence, via the alternating series of singular integrals
//   P(Q <= x) = 1 - (1/pi) sum_k (-1)^{k+1}
//               int_{1/l_{2k-1}}^{1/l_{2k}} e^{-xu/2} / (u sqrt|F(u)|) du,
//   F(u) = prod_l (1 - lambda_l u).
//
// The inverse-square-root endpoint singularities are removed by the
// substitution u = mid + half*sin(theta) before Gauss-Legendre quadrature.
// The infinite product is evaluated in log space over the explicit
// eigenvalues with an analytic correction for the l > K tail based on
// lambda_l ~ c/l^2. Spectra with tail constant 0 are treated as complete:
// an odd count then ends with an exact semi-infinite integral (u = a + v^2).
//
// Quadrature rules per interval are x-independent and cached, so repeated
// CDF evaluations cost one exp per node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "bridgelrt/quadrature.hpp"
#include "bridgelrt/rng.hpp"
#include "bridgelrt/spectrum.hpp"

namespace bridgelrt {

namespace detail {

// Euler-Maclaurin tails of sum_{l >= m} l^{-s}
inline double zeta_tail_2(double m) {
    const double m2 = m * m;
    return 1.0 / m + 1.0 / (2.0 * m2) + 1.0 / (6.0 * m2 * m) - 1.0 / (30.0 * m2 * m2 * m);
}
inline double zeta_tail_4(double m) {
    const double m3 = m * m * m;
    return 1.0 / (3.0 * m3) + 1.0 / (2.0 * m3 * m) + 1.0 / (3.0 * m3 * m * m);
}
inline double zeta_tail_6(double m) {
    const double m5 = m * m * m * m * m;
    return 1.0 / (5.0 * m5) + 1.0 / (2.0 * m5 * m) + 1.0 / (2.0 * m5 * m * m);
}

}  // namespace detail

class QuadraticFormDist {
  public:
    // Tail model for the eigenvalues beyond the explicit list:
    //   lambda_m ~ constant / (m^2 + shift) for branch numbers m >= start.
    // The plain Smirnov setting is {c, 0, K+1}; spectra constructed from the
    // transcendental equations continue their exact branch asymptote instead.
    struct TailModel {
        double constant = 0.0;
        double shift = 0.0;
        std::size_t start = 0;  // 0: first index past the explicit list
    };

    QuadraticFormDist(std::vector<double> lambdas, double tail_constant,
                      int product_tail_order = 3)
        : QuadraticFormDist(std::move(lambdas),
                            TailModel{tail_constant, 0.0, 0},
                            product_tail_order) {}

    QuadraticFormDist(std::vector<double> lambdas, const TailModel& tail,
                      int product_tail_order = 3)
        : lambdas_(std::move(lambdas)),
          tail_c_(tail.constant),
          tail_shift_(tail.shift),
          tail_order_(product_tail_order) {
        if (lambdas_.empty())
            throw std::invalid_argument("quadratic form: need at least one eigenvalue");
        if (!(tail_c_ >= 0.0) || !(tail_shift_ >= 0.0))
            throw std::invalid_argument("quadratic form: bad tail model");
        if (tail_order_ < 1 || tail_order_ > 3)
            throw std::invalid_argument("quadratic form: product_tail_order in {1,2,3}");
        for (std::size_t i = 0; i < lambdas_.size(); ++i) {
            if (!(lambdas_[i] > 0.0))
                throw std::invalid_argument("quadratic form: eigenvalues must be > 0");
            if (i > 0 && lambdas_[i - 1] - lambdas_[i] < 1e-10 * lambdas_[i - 1])
                throw std::runtime_error(
                    "quadratic form: eigenvalue tie (relative gap < 1e-10); "
                    "the series formula requires strictly decreasing eigenvalues");
        }
        tail_start_ = tail.start > 0 ? static_cast<double>(tail.start)
                                     : static_cast<double>(lambdas_.size()) + 1.0;
        tail_mean_ = tail_c_ * tail_sum_inv_quad(tail_start_);
        tail_sq_ = tail_c_ * tail_c_ * tail_sum_inv_quart(tail_start_);
        double sum = 0.0, sum_sq = 0.0;
        for (double l : lambdas_) {
            sum += l;
            sum_sq += l * l;
        }
        mean_ = sum + tail_mean_;
        sum_sq_ = sum_sq + tail_sq_;
    }

    explicit QuadraticFormDist(const Spectrum& sp)
        : QuadraticFormDist(sp.lambdas(), spectrum_tail_model(sp)) {}

    static TailModel spectrum_tail_model(const Spectrum& sp) {
        const bool bridge = sp.params.kind == ProcessKind::bridge;
        const double period =
            bridge ? -std::log1p(-sp.params.horizon) : sp.params.horizon;
        const double a2 = bridge
                              ? (sp.params.alpha0 - 0.5) * (sp.params.alpha0 - 0.5)
                              : sp.params.alpha0 * sp.params.alpha0;
        int last_branch = 0;
        for (const auto& e : sp.entries)
            last_branch = std::max(last_branch, branch_index(sp, e));
        TailModel tail;
        tail.constant = sp.tail_constant;
        tail.shift = a2 * period * period / (M_PI * M_PI);
        tail.start = static_cast<std::size_t>(last_branch) + 1;
        return tail;
    }

    double cdf(double x, double tol) const {
        check_tol(tol);
        if (x <= 0.0) return 0.0;
        const double l1 = lambdas_.front();
        // P(Q <= x) <= P(l1 N^2 <= x): deep left tail short-circuits to 0
        if (std::erf(std::sqrt(x / (2.0 * l1))) < tol) return 0.0;
        // Chernoff at s = 1/(4 l1): deep right tail short-circuits to 1
        {
            const double s = 0.25 / l1;
            double log_mgf = 0.0;
            for (double l : lambdas_) log_mgf -= 0.5 * std::log1p(-2.0 * s * l);
            if (tail_c_ > 0.0) log_mgf -= 0.5 * tail_log_correction(2.0 * s * tail_c_);
            if (log_mgf - s * x < std::log(tol)) return 1.0;
        }

        const std::size_t count = lambdas_.size();
        double total = 0.0;
        double sign = 1.0;
        for (std::size_t k = 1;; ++k) {
            const std::size_t i1 = 2 * k - 2;
            const std::size_t i2 = 2 * k - 1;
            if (i1 >= count) {
                if (tail_c_ == 0.0) break;  // complete even spectrum: series ended
                throw std::runtime_error(
                    "quadratic form cdf: tolerance unachievable, series needs more "
                    "eigenvalue pairs than available");
            }
            const double term_tol = tol / (10.0 * static_cast<double>(k) * static_cast<double>(k));
            if (i2 >= count) {
                if (tail_c_ == 0.0) {
                    total += sign * semi_infinite_term(x, lambdas_[i1], term_tol);
                    break;  // exact final branch cut of a complete odd spectrum
                }
                throw std::runtime_error(
                    "quadratic form cdf: tolerance unachievable, series needs more "
                    "eigenvalue pairs than available (even truncation exhausted)");
            }
            const double term = term_value(k, x, term_tol);
            total += sign * term;
            sign = -sign;
            if (term < 0.1 * tol) break;
        }
        return std::min(1.0, std::max(0.0, 1.0 - total / M_PI));
    }

    double quantile(double p, double tol) const {
        check_tol(tol);
        if (!(p > 0.0) || !(p < 1.0))
            throw std::invalid_argument("quantile: p must lie in (0,1)");
        const double inner = std::max(0.25 * tol, 1.000001e-12);
        double lo = 0.0;
        double hi = mean_ + 40.0 * std::sqrt(2.0 * sum_sq_);
        if (cdf(hi, inner) < p)
            throw std::runtime_error(
                "quantile: bracket failure, cdf(upper bound) below target probability");
        for (int iter = 0; iter < 300; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double c = cdf(mid, inner);
            if (std::abs(c - p) < tol) return mid;
            (c < p ? lo : hi) = mid;
        }
        throw std::runtime_error("quantile: bisection failed to reach tolerance");
    }

    // n draws; the l > K tail is folded in through its first two moments
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const {
        if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
        std::vector<double> out(n);
        Rng rng(seed);
        const double tail_sd = std::sqrt(2.0 * tail_sq_);
        for (std::size_t i = 0; i < n; ++i) {
            double q = 0.0;
            for (double l : lambdas_) {
                const double g = rng.next_gaussian();
                q += l * g * g;
            }
            if (tail_c_ > 0.0) q += tail_mean_ + tail_sd * rng.next_gaussian();
            out[i] = q;
        }
        return out;
    }

    double mean() const { return mean_; }
    double sum_of_squares() const { return sum_sq_; }
    std::size_t truncation_k() const { return lambdas_.size(); }
    const std::vector<double>& lambdas() const { return lambdas_; }
    double tail_constant() const { return tail_c_; }

  private:
    struct Interval {
        double a = 0.0, b = 0.0;
        // rule at level i has 64 * 2^i theta-nodes; logw absorbs everything
        // except the exp(-x u / 2) factor
        std::vector<std::vector<double>> u_levels;
        std::vector<std::vector<double>> logw_levels;
    };

    static void check_tol(double tol) {
        if (!(tol > 1e-12) || !(tol <= 1e-2))
            throw std::invalid_argument("tolerance must lie in (1e-12, 1e-2]");
    }

    double log_abs_f(double u) const {
        double s = 0.0;
        for (double l : lambdas_) s += std::log(std::abs(1.0 - l * u));
        if (tail_c_ > 0.0) s += tail_log_correction(tail_c_ * u);
        return s;
    }

    // sum_{m >= start} 1/(m^2 + shift), expanded in the shift once the
    // explicit range is passed
    double tail_sum_inv_quad(double m) const {
        return detail::zeta_tail_2(m) - tail_shift_ * detail::zeta_tail_4(m) +
               tail_shift_ * tail_shift_ * detail::zeta_tail_6(m);
    }
    double tail_sum_inv_quart(double m) const {
        return detail::zeta_tail_4(m) - 2.0 * tail_shift_ * detail::zeta_tail_6(m);
    }

    // sum_{m >= start} log(1 - z2/(m^2 + shift)) under the tail model
    double tail_log_correction(double z2) const {
        if (z2 <= 0.0) return 0.0;
        double m = tail_start_;
        if (z2 >= m * m + tail_shift_)
            throw std::runtime_error(
                "quadratic form: tail model factor would change sign; more explicit "
                "eigenvalues are required at this argument");
        double s = 0.0;
        while (z2 > 1e-3 * (m * m + tail_shift_)) {
            s += std::log1p(-z2 / (m * m + tail_shift_));
            m += 1.0;
        }
        s -= z2 * tail_sum_inv_quad(m);
        if (tail_order_ >= 2) s -= 0.5 * z2 * z2 * tail_sum_inv_quart(m);
        if (tail_order_ >= 3) s -= (z2 * z2 * z2 / 3.0) * detail::zeta_tail_6(m);
        return s;
    }

    int negative_factor_count(double u) const {
        int n = 0;
        for (double l : lambdas_)
            if (l * u > 1.0) ++n;
        return n;
    }

    // requires mutex_ held
    const Interval& interval_at(std::size_t k, int min_levels) const {
        while (intervals_.size() < k) {
            const std::size_t idx = intervals_.size();  // pair (2idx+1, 2idx+2), 1-based
            Interval iv;
            iv.a = 1.0 / lambdas_[2 * idx];
            iv.b = 1.0 / lambdas_[2 * idx + 1];
            if (tail_c_ > 0.0 &&
                tail_c_ * iv.b >= 0.9 * (tail_start_ * tail_start_ + tail_shift_))
                throw std::runtime_error(
                    "quadratic form: tolerance unachievable, integration interval "
                    "reaches into the modeled eigenvalue tail");
            // simple-zero sign structure: exactly 2k-1 negative factors inside
            const int neg = negative_factor_count(0.5 * (iv.a + iv.b));
            if (neg != static_cast<int>(2 * idx + 1))
                throw std::runtime_error(
                    "quadratic form: F(u) sign structure violated on interval " +
                    std::to_string(idx + 1));
            intervals_.push_back(std::move(iv));
        }
        Interval& iv = intervals_[k - 1];
        while (static_cast<int>(iv.u_levels.size()) < min_levels) {
            const int level = static_cast<int>(iv.u_levels.size());
            const int order = 64 << level;
            const QuadRule& gl = gauss_legendre(order);
            const double mid = 0.5 * (iv.a + iv.b);
            const double half = 0.5 * (iv.b - iv.a);
            std::vector<double> u(order), logw(order);
            for (int j = 0; j < order; ++j) {
                const double theta = 0.5 * M_PI * gl.nodes[j];
                u[j] = mid + half * std::sin(theta);
                logw[j] = std::log(0.5 * M_PI * gl.weights[j] * half * std::cos(theta)) -
                          std::log(u[j]) - 0.5 * log_abs_f(u[j]);
            }
            iv.u_levels.push_back(std::move(u));
            iv.logw_levels.push_back(std::move(logw));
        }
        return iv;
    }

    static double eval_rule(const std::vector<double>& u, const std::vector<double>& logw,
                            double x) {
        double s = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j)
            s += std::exp(logw[j] - 0.5 * x * u[j]);
        return s;
    }

    // k-th series term (1-based) by node doubling until the change is below
    // term_tol; the prepared-rule cache serializes on mutex_
    double term_value(std::size_t k, double x, double term_tol) const {
        constexpr int max_levels = 6;  // up to 2048 nodes
        std::lock_guard<std::mutex> lock(mutex_);
        for (int levels = 2; levels <= max_levels; ++levels) {
            const Interval& iv = interval_at(k, levels);
            const double coarse = eval_rule(iv.u_levels[levels - 2],
                                            iv.logw_levels[levels - 2], x);
            const double fine = eval_rule(iv.u_levels[levels - 1],
                                          iv.logw_levels[levels - 1], x);
            if (std::abs(fine - coarse) <= term_tol) return fine;
        }
        throw std::runtime_error(
            "quadratic form cdf: quadrature failed to converge on series term " +
            std::to_string(k));
    }

    // exact final term of a complete odd spectrum: int_a^inf via u = a + v^2,
    // which turns the 1/sqrt(u-a) endpoint singularity into the constant
    // 1/sqrt(lambda_last) because |1 - lambda_last u| = lambda_last v^2
    double semi_infinite_term(double x, double lambda_last, double term_tol) const {
        const double a = 1.0 / lambda_last;
        const double vmax = std::sqrt(184.0 / x);  // e^{-x v^2/2} < 1e-40 beyond
        const std::size_t last = lambdas_.size() - 1;
        const auto g = [&](double v) {
            const double u = a + v * v;
            double log_rest = 0.0;  // log|F| without the (1 - lambda_last u) factor
            for (std::size_t l = 0; l < last; ++l)
                log_rest += std::log(std::abs(1.0 - lambdas_[l] * u));
            return 2.0 * std::exp(-0.5 * x * u - std::log(u) -
                                  0.5 * (log_rest + std::log(lambda_last)));
        };
        double prev = 0.0;
        for (int order = 128; order <= 4096; order *= 2) {
            const double val = gl_integrate(g, 0.0, vmax, order);
            if (order > 128 && std::abs(val - prev) <= term_tol) return val;
            prev = val;
        }
        throw std::runtime_error(
            "quadratic form cdf: semi-infinite tail integral failed to converge");
    }

    std::vector<double> lambdas_;
    double tail_c_ = 0.0;
    double tail_shift_ = 0.0;
    double tail_start_ = 0.0;
    int tail_order_ = 3;
    double mean_ = 0.0, sum_sq_ = 0.0;
    double tail_mean_ = 0.0, tail_sq_ = 0.0;
    mutable std::vector<Interval> intervals_;
    mutable std::mutex mutex_;
};

inline double qf_cdf(const Spectrum& sp, double x, double tol) {
    return QuadraticFormDist(sp).cdf(x, tol);
}

inline double qf_quantile(const Spectrum& sp, double p, double tol) {
    return QuadraticFormDist(sp).quantile(p, tol);
}

inline std::vector<double> sample_qf(const Spectrum& sp, std::size_t n,
                                     std::uint64_t seed) {
    return QuadraticFormDist(sp).sample(n, seed);
}

}  // namespace bridgelrt
