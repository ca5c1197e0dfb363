#pragma once

// Closed-form Karhunen-Loeve spectra of the bridge/OU covariance operators
// under the measure mu_{alpha0,alpha1,T}.
//
// Bridge eigenvalues come from the boundary condition
//   0 = lambda*sigma((1-T)^sigma + (1-T)^{-sigma})
//       + (1 + lambda/2 - lambda*alpha0)((1-T)^sigma - (1-T)^{-sigma}).
// With sigma = i*beta this is solved in the pole-free sin/cos form
//   g(beta) = (1 + lambda(beta)(1/2-alpha0)) sin(beta L) + lambda(beta) beta cos(beta L),
//   lambda(beta) = (alpha0+alpha1-1)/(beta^2 + (alpha0-1/2)^2),  L = ln(1-T),
// which is equivalent to the tan-form characteristic function away from its
// poles. Real sigma produces at most one extra eigenvalue lambda0 (present iff
// min(alpha0,alpha1) falls below the threshold c), and the degenerate sigma=0
// resonance contributes lambda_star. The OU analog replaces L by T and
// (alpha0-1/2)^2 by alpha0^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelrt/measure.hpp"
#include "bridgelrt/process.hpp"
#include "bridgelrt/roots.hpp"

namespace bridgelrt {

enum class EigenKind { regular, lambda0, lambda_star };

inline const char* to_string(EigenKind kind) {
    switch (kind) {
        case EigenKind::regular: return "regular";
        case EigenKind::lambda0: return "lambda0";
        default: return "lambda_star";
    }
}

struct SpectrumEntry {
    double lambda = 0.0;
    EigenKind kind = EigenKind::regular;
    // beta for regular entries, sigma0 for lambda0, unused (0) for lambda_star
    double shape_param = 0.0;
};

struct Spectrum {
    ProcessParams params;
    std::vector<SpectrumEntry> entries;  // lambda strictly decreasing
    double tail_constant = 0.0;          // k^2 lambda_k -> c along tan branches

    std::vector<double> lambdas() const {
        std::vector<double> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.lambda);
        return out;
    }
};

namespace detail {

inline void sort_and_check_ties(std::vector<SpectrumEntry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const SpectrumEntry& a, const SpectrumEntry& b) {
                  return a.lambda > b.lambda;
              });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const double a = entries[i - 1].lambda;
        const double b = entries[i].lambda;
        if (a - b < 1e-10 * a)
            throw std::runtime_error(
                "spectrum: eigenvalue tie (relative gap < 1e-10) between " +
                std::to_string(a) + " and " + std::to_string(b) +
                "; the series formula requires strictly decreasing eigenvalues");
    }
}

// threshold c from Theorem 3.2; below it the G equation has a root
inline double exceptional_threshold(double alpha_max, double log_gap) {
    const double w = 0.5 - alpha_max;
    return w / (w * log_gap + 1.0) + 0.5;
}

inline double g_function(double sigma, double alpha0, double alpha1, double two_log) {
    return (sigma + alpha0 - 0.5) * (sigma + alpha1 - 0.5) -
           std::exp(two_log * sigma) * (sigma - alpha0 + 0.5) * (sigma - alpha1 + 0.5);
}

}  // namespace detail

// value of alpha1 at which the sigma = 0 resonance (case iii) occurs for a
// given kernel parameter alpha0; NaN when no finite resonance exists
inline double resonance_alpha1(double alpha0, double horizon) {
    const double log_gap = std::log1p(-horizon);
    const double u = 1.0 - 2.0 * alpha0;
    const double den = 2.0 * u * log_gap + 4.0;
    if (std::abs(den) < 1e-12) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 - alpha0 - u * u * log_gap / den;
}

inline Spectrum bridge_spectrum(const ProcessParams& params, std::size_t n_eigs,
                                double tol = 1e-14) {
    (void)tol;  // roots are driven to floating-point exhaustion
    validate_params(params);
    if (params.kind != ProcessKind::bridge)
        throw std::invalid_argument("bridge_spectrum: params.kind must be bridge");
    if (!(params.alpha0 + params.alpha1 > 1.0))
        throw std::invalid_argument("bridge_spectrum: requires alpha0 + alpha1 > 1");
    if (n_eigs < 1) throw std::invalid_argument("bridge_spectrum: n_eigs must be >= 1");

    const double a0 = params.alpha0;
    const double a1 = params.alpha1;
    const double S = a0 + a1 - 1.0;
    const double L = std::log1p(-params.horizon);  // < 0
    const double absL = -L;
    const double A2 = (a0 - 0.5) * (a0 - 0.5);

    // pole-free characteristic function, scaled by (beta^2 + A2) > 0
    const auto h = [&](double beta) {
        return (beta * beta + A2 + S * (0.5 - a0)) * std::sin(beta * L) +
               S * beta * std::cos(beta * L);
    };
    const double step = M_PI / (8.0 * absL);
    const double cap = (static_cast<double>(n_eigs) + 64.0) * M_PI / absL;
    const auto roots = scan_roots(h, step * 1e-3, step, n_eigs, cap);
    if (roots.size() < n_eigs)
        throw std::runtime_error(
            "bridge_spectrum: bracket scan found only " + std::to_string(roots.size()) +
            " of " + std::to_string(n_eigs) + " requested eigenvalues");

    std::vector<SpectrumEntry> entries;
    entries.reserve(n_eigs + 2);
    for (double beta : roots)
        entries.push_back({S / (beta * beta + A2), EigenKind::regular, beta});

    // case (ii): extra eigenvalue from a real-sigma solution
    const double mn = std::min(a0, a1);
    const double mx = std::max(a0, a1);
    if (mn < 0.5 && mn < detail::exceptional_threshold(mx, L)) {
        const double hi = 0.5 - mn;
        const auto G = [&](double sigma) {
            return detail::g_function(sigma, a0, a1, 2.0 * L);
        };
        // G(0) = 0 analytically; the root exists iff G dips negative just
        // above 0 (G'(0) < 0), which can fail to within roundoff exactly on
        // the case-(iii) resonance locus -- then there is no extra entry
        if (G(1e-12) < 0.0) {
            const double sigma0 = bisect(G, 1e-12, hi);
            const double lam0 = S / (A2 - sigma0 * sigma0);
            entries.push_back({lam0, EigenKind::lambda0, sigma0});
        }
    }

    // case (iii): sigma = 0 resonance
    const double a1_res = resonance_alpha1(a0, params.horizon);
    if (std::isfinite(a1_res) && std::abs(a1 - a1_res) < 1e-12 && A2 > 0.0)
        entries.push_back({S / A2, EigenKind::lambda_star, 0.0});

    detail::sort_and_check_ties(entries);
    entries.resize(n_eigs);

    Spectrum sp;
    sp.params = params;
    sp.entries = std::move(entries);
    sp.tail_constant = S * L * L / (M_PI * M_PI);
    return sp;
}

inline Spectrum ou_spectrum(const ProcessParams& params, std::size_t n_eigs,
                            double tol = 1e-14) {
    (void)tol;
    validate_params(params);
    if (params.kind != ProcessKind::ou)
        throw std::invalid_argument("ou_spectrum: params.kind must be ou");
    if (n_eigs < 1) throw std::invalid_argument("ou_spectrum: n_eigs must be >= 1");

    const double a0 = params.alpha0;
    const double P = params.alpha0 + params.alpha1;
    const double T = params.horizon;

    // (1 - lambda a0) sin(beta T) - lambda beta cos(beta T), scaled by
    // (beta^2 + a0^2)
    const auto h = [&](double beta) {
        return (beta * beta + a0 * a0 - P * a0) * std::sin(beta * T) -
               P * beta * std::cos(beta * T);
    };
    const double step = M_PI / (8.0 * T);
    const double cap = (static_cast<double>(n_eigs) + 64.0) * M_PI / T;
    const auto roots = scan_roots(h, step * 1e-3, step, n_eigs, cap);
    if (roots.size() < n_eigs)
        throw std::runtime_error(
            "ou_spectrum: bracket scan found only " + std::to_string(roots.size()) +
            " of " + std::to_string(n_eigs) + " requested eigenvalues");

    std::vector<SpectrumEntry> entries;
    entries.reserve(n_eigs);
    for (double beta : roots)
        entries.push_back({P / (beta * beta + a0 * a0), EigenKind::regular, beta});
    detail::sort_and_check_ties(entries);

    Spectrum sp;
    sp.params = params;
    sp.entries = std::move(entries);
    sp.tail_constant = P * T * T / (M_PI * M_PI);
    return sp;
}

inline Spectrum compute_spectrum(const ProcessParams& params, std::size_t n_eigs,
                                 double tol = 1e-14) {
    return params.kind == ProcessKind::bridge ? bridge_spectrum(params, n_eigs, tol)
                                              : ou_spectrum(params, n_eigs, tol);
}

// tan-branch number of a regular entry; the tail law k^2 lambda_k -> c counts
// eigenvalues by this index (an extra low-branch root or exceptional entry
// shifts list positions but not branch numbers)
inline int branch_index(const Spectrum& sp, const SpectrumEntry& entry) {
    if (entry.kind != EigenKind::regular) return -1;
    const double period = sp.params.kind == ProcessKind::bridge
                              ? -std::log1p(-sp.params.horizon)
                              : sp.params.horizon;
    return static_cast<int>(std::lround(entry.shape_param * period / M_PI));
}

// Sum of all eigenvalues: the computed entries plus the analytic continuation
// of the regular branch sequence lambda_m ~ S/(A^2 + m^2 pi^2 / period^2)
// beyond the last computed branch. Matches trace_integral to the accuracy of
// the branch asymptotics (relative error well below 1e-5 from ~100 entries).
inline double spectrum_trace_estimate(const Spectrum& sp) {
    double sum = 0.0;
    int last_branch = 0;
    for (const auto& e : sp.entries) {
        sum += e.lambda;
        last_branch = std::max(last_branch, branch_index(sp, e));
    }
    const bool bridge = sp.params.kind == ProcessKind::bridge;
    const double period = bridge ? -std::log1p(-sp.params.horizon) : sp.params.horizon;
    const double strength = bridge ? sp.params.alpha0 + sp.params.alpha1 - 1.0
                                   : sp.params.alpha0 + sp.params.alpha1;
    const double a2 = bridge ? (sp.params.alpha0 - 0.5) * (sp.params.alpha0 - 0.5)
                             : sp.params.alpha0 * sp.params.alpha0;
    const double b = M_PI * M_PI / (period * period);
    // sum_{m > last_branch} strength/(a2 + b m^2) via the cotangent identity
    const double ratio = a2 / b;
    double full;
    if (ratio > 1e-24) {
        const double a = std::sqrt(ratio);
        full = (M_PI * a / std::tanh(M_PI * a) - 1.0) / (2.0 * ratio);
    } else {
        full = M_PI * M_PI / 6.0;
    }
    double head = 0.0;
    for (int m = 1; m <= last_branch; ++m)
        head += 1.0 / (static_cast<double>(m) * static_cast<double>(m) + ratio);
    return sum + (strength / b) * (full - head);
}

namespace detail {

// squared L2(mu) norm of the un-normalized eigenfunction shape
inline double eigenfunction_norm_sq(const SpectrumEntry& entry,
                                    const ProcessParams& params) {
    if (params.kind == ProcessKind::bridge) {
        const double S = params.alpha0 + params.alpha1 - 1.0;
        const double L = std::log1p(-params.horizon);
        const double absL = -L;
        switch (entry.kind) {
            case EigenKind::regular: {
                const double beta = entry.shape_param;
                const double s = std::sin(beta * L);
                return s * s + S * (0.5 * absL - std::sin(2.0 * beta * absL) / (4.0 * beta));
            }
            case EigenKind::lambda0: {
                const double sig = entry.shape_param;
                const double sh = std::sinh(sig * absL);
                return 4.0 * sh * sh + S * (std::sinh(2.0 * sig * absL) / sig - 2.0 * absL);
            }
            default:  // lambda_star
                return L * L + S * absL * absL * absL / 3.0;
        }
    }
    const double P = params.alpha0 + params.alpha1;
    const double T = params.horizon;
    const double beta = entry.shape_param;
    const double s = std::sin(beta * T);
    return s * s + P * (0.5 * T - std::sin(2.0 * beta * T) / (4.0 * beta));
}

inline double eigenfunction_shape(const SpectrumEntry& entry,
                                  const ProcessParams& params, double t) {
    if (params.kind == ProcessKind::bridge) {
        const double root = std::sqrt(1.0 - t);
        const double lg = std::log1p(-t);
        switch (entry.kind) {
            case EigenKind::regular:
                return root * std::sin(entry.shape_param * lg);
            case EigenKind::lambda0: {
                const double sig = entry.shape_param;
                return root * (std::exp(sig * lg) - std::exp(-sig * lg));
            }
            default:
                return root * lg;
        }
    }
    return std::sin(entry.shape_param * t);
}

}  // namespace detail

// normalized eigenfunction value e_k(t); the L2(mu) normalization constant is
// evaluated in closed form (the defining integrals are elementary)
inline double eigenfunction(const SpectrumEntry& entry, const ProcessParams& params,
                            double t) {
    if (!(t >= 0.0) || t > params.horizon)
        throw std::invalid_argument("eigenfunction: t must lie in [0, T]");
    const double norm_sq = detail::eigenfunction_norm_sq(entry, params);
    return detail::eigenfunction_shape(entry, params, t) / std::sqrt(norm_sq);
}

}  // namespace bridgelrt
