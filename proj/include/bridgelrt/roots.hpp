#pragma once

// Sign-change bisection driven to floating-point exhaustion, plus a uniform
// bracket scanner for transcendental eigenvalue equations.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace bridgelrt {

// Bisect f on [a,b] with f(a)*f(b) <= 0 until the interval cannot shrink.
template <typename F>
double bisect(F&& f, double a, double b) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0.0) == (fb < 0.0))
        throw std::runtime_error("bisect: no sign change on the given bracket");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

// Scan (lo_start, +inf) in uniform steps, bisecting every sign change, until
// `count` roots are found or beta exceeds `beta_cap`.
template <typename F>
std::vector<double> scan_roots(F&& f, double lo_start, double step,
                               std::size_t count, double beta_cap) {
    std::vector<double> roots;
    double lo = lo_start;
    double flo = f(lo);
    for (double hi = step; roots.size() < count && lo < beta_cap; hi += step) {
        const double fhi = f(hi);
        if (flo == 0.0) {
            roots.push_back(lo);
        } else if (fhi != 0.0 && (flo < 0.0) != (fhi < 0.0)) {
            roots.push_back(bisect(f, lo, hi));
        }
        lo = hi;
        flo = fhi;
    }
    return roots;
}

}  // namespace bridgelrt
