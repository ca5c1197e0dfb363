#pragma once

// Gauss-Legendre rules (Newton on the Legendre recurrence, cached per order)
// and a recursive adaptive integrator for smooth integrands.

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace bridgelrt {

struct QuadRule {
    std::vector<double> nodes;    // on (-1,1), ascending
    std::vector<double> weights;  // sum to 2
};

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1].
inline const QuadRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::mutex mutex;
    static std::map<int, QuadRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi-type initial guess, then Newton
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return cache.emplace(n, std::move(rule)).first->second;
}

template <typename F>
double gl_integrate(F&& f, double a, double b, int order) {
    const QuadRule& rule = gauss_legendre(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
        sum += rule.weights[j] * f(mid + half * rule.nodes[j]);
    return half * sum;
}

namespace detail {

template <typename F>
double adaptive_rec(F& f, double a, double b, double whole, double eps,
                    int depth) {
    const double mid = 0.5 * (a + b);
    const double left = gl_integrate(f, a, mid, 15);
    const double right = gl_integrate(f, mid, b, 15);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= eps) return left + right;
    return adaptive_rec(f, a, mid, left, 0.5 * eps, depth - 1) +
           adaptive_rec(f, mid, b, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

// Adaptive integration to a relative tolerance (with a small absolute floor
// so integrals near zero terminate).
template <typename F>
double adaptive_integrate(F&& f, double a, double b, double rel_tol,
                          double abs_floor = 1e-300) {
    if (a == b) return 0.0;
    const double coarse = gl_integrate(f, a, b, 15);
    const double scale = std::max(std::abs(coarse), abs_floor);
    return detail::adaptive_rec(f, a, b, coarse, rel_tol * scale, 48);
}

}  // namespace bridgelrt
