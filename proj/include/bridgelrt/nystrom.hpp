#pragma once

// Discretized-operator oracle: the integral operator
//   (A e)(t) = int R(t,s) e(s) mu(ds)
// is discretized by composite Gauss-Legendre nodes on [0,T] for the density
// part plus one node for the atom, and symmetrized to W^{1/2} K W^{1/2}. Its
// eigenvalues approximate the operator spectrum and serve as the independent
// check for the closed-form spectra. The kernels accepted are exactly the two
// process covariances.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bridgelrt/measure.hpp"
#include "bridgelrt/process.hpp"
#include "bridgelrt/quadrature.hpp"
#include "bridgelrt/rng.hpp"

namespace bridgelrt {

struct NystromRule {
    std::vector<double> nodes;    // ascending; last node is the atom at T
    std::vector<double> weights;  // quadrature weight x density, atom weight last
};

inline NystromRule nystrom_rule(const SpectralMeasure& mu, std::size_t grid_n) {
    if (grid_n < 16) throw std::invalid_argument("nystrom: grid_n must be >= 16");
    const std::size_t panels = (grid_n + 15) / 16;
    const QuadRule& gl = gauss_legendre(16);
    NystromRule rule;
    rule.nodes.reserve(16 * panels + 1);
    rule.weights.reserve(16 * panels + 1);
    const double width = mu.support_end / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = width * static_cast<double>(p);
        const double mid = a + 0.5 * width;
        for (int j = 0; j < 16; ++j) {
            const double x = mid + 0.5 * width * gl.nodes[j];
            rule.nodes.push_back(x);
            rule.weights.push_back(0.5 * width * gl.weights[j] * mu.density(x));
        }
    }
    rule.nodes.push_back(mu.atom_location);
    rule.weights.push_back(mu.atom_weight);
    return rule;
}

namespace detail {

// symmetrized matrix for an arbitrary kernel (reference path; the process
// kernels below use structure-exploiting fills)
template <typename Kernel>
Eigen::MatrixXd nystrom_matrix_generic(Kernel&& kernel, const NystromRule& rule) {
    const auto n = static_cast<Eigen::Index>(rule.nodes.size());
    Eigen::MatrixXd B(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = kernel(rule.nodes[i], rule.nodes[j]) *
                             std::sqrt(rule.weights[i] * rule.weights[j]);
            B(i, j) = v;
            B(j, i) = v;
        }
    return B;
}

// dense symmetrized kernel matrix B = W^{1/2} K W^{1/2}
inline Eigen::MatrixXd nystrom_matrix(ProcessKind kind, double alpha,
                                      const NystromRule& rule) {
    const auto n = static_cast<Eigen::Index>(rule.nodes.size());
    Eigen::MatrixXd B(n, n);
    std::vector<double> sqw(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sqw[i] = std::sqrt(rule.weights[i]);

    if (kind == ProcessKind::bridge) {
        // K_ij = g_i g_j c_{min(i,j)} with g = (1-x)^alpha and c the
        // stabilized (1-(1-x)^{1-2alpha})/(1-2alpha) factor
        std::vector<double> g(rule.nodes.size()), c(rule.nodes.size());
        const bool log_branch = std::abs(alpha - 0.5) < 1e-9;
        const double w = 1.0 - 2.0 * alpha;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double lg = std::log1p(-rule.nodes[i]);
            g[i] = std::exp(alpha * lg);
            c[i] = log_branch ? -lg : -std::expm1(w * lg) / w;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double v = g[i] * g[j] * c[j] * sqw[i] * sqw[j];
                B(i, j) = v;
                B(j, i) = v;
            }
    } else {
        if (alpha == 0.0) {
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j <= i; ++j) {
                    const double v = rule.nodes[j] * sqw[i] * sqw[j];
                    B(i, j) = v;
                    B(j, i) = v;
                }
        } else {
            // K_ij = p_i (1/p_j - p_j)/(2 alpha) for x_j <= x_i, p = e^{-alpha x}
            std::vector<double> p(rule.nodes.size()), q(rule.nodes.size());
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                p[i] = std::exp(-alpha * rule.nodes[i]);
                q[i] = (1.0 / p[i] - p[i]) / (2.0 * alpha);
            }
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j <= i; ++j) {
                    const double v = p[i] * q[j] * sqw[i] * sqw[j];
                    B(i, j) = v;
                    B(j, i) = v;
                }
        }
    }
    return B;
}

// Top-k eigenvalues of a symmetric PSD matrix by Lanczos with full
// reorthogonalization; deterministic start vector.
inline std::vector<double> lanczos_top_eigs(const Eigen::MatrixXd& B, std::size_t k,
                                            int max_steps = 400) {
    const Eigen::Index n = B.rows();
    const int m_cap = static_cast<int>(std::min<Eigen::Index>(max_steps, n));
    Eigen::MatrixXd V(n, m_cap);
    std::vector<double> diag, offdiag;

    Rng rng(0x5eed);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.next_gaussian();
    v.normalize();
    V.col(0) = v;

    const auto ritz_values = [&](std::size_t want) {
        const auto m = static_cast<Eigen::Index>(diag.size());
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), m);
        Eigen::VectorXd e(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i + 1 < m; ++i) e(i) = offdiag[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
        std::vector<double> out(es.eigenvalues().data(),
                                es.eigenvalues().data() + m);
        std::sort(out.begin(), out.end(), std::greater<double>());
        if (out.size() > want) out.resize(want);
        return out;
    };

    std::vector<double> prev;
    Eigen::VectorXd w(n);
    for (int j = 0; j < m_cap; ++j) {
        w.noalias() = B * V.col(j);
        const double a = V.col(j).dot(w);
        diag.push_back(a);
        w -= a * V.col(j);
        if (j > 0) w -= offdiag.back() * V.col(j - 1);
        for (int pass = 0; pass < 2; ++pass)  // full reorthogonalization
            w.noalias() -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        const double b = w.norm();
        const bool exhausted = b < 1e-13 || j + 1 == m_cap;

        if ((diag.size() >= k + 8 && diag.size() % 8 == 0) || exhausted) {
            std::vector<double> ritz = ritz_values(k);
            if (exhausted) return ritz;
            if (prev.size() == ritz.size() && ritz.size() == k) {
                double rel = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                    rel = std::max(rel, std::abs(ritz[i] - prev[i]) /
                                            std::max(std::abs(ritz[i]), 1e-300));
                if (rel < 1e-12) return ritz;
            }
            prev = std::move(ritz);
        }
        offdiag.push_back(b);
        V.col(j + 1) = w / b;
    }
    return ritz_values(k);
}

}  // namespace detail

// Eigenvalues of the discretized operator, sorted decreasing. top_k = 0
// returns the full set (dense solve); top_k > 0 returns the leading block via
// Lanczos, which is what large grids need.
inline std::vector<double> nystrom_spectrum(ProcessKind kind, const ProcessParams& params,
                                            std::size_t grid_n, std::size_t top_k = 0) {
    if (kind != params.kind)
        throw std::invalid_argument("nystrom_spectrum: kind disagrees with params");
    const SpectralMeasure mu = build_measure(params);
    const NystromRule rule = nystrom_rule(mu, grid_n);
    const Eigen::MatrixXd B = detail::nystrom_matrix(kind, params.alpha0, rule);
    if (top_k > 0) return detail::lanczos_top_eigs(B, top_k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    std::vector<double> eigs(es.eigenvalues().data(),
                             es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(eigs.begin(), eigs.end(), std::greater<double>());
    return eigs;
}

// int R(s,s) mu(ds): the trace of the covariance operator and the mean of the
// psi statistic. Atom term in closed form, density part by adaptive
// quadrature to relative 1e-10.
inline double trace_integral(ProcessKind kind, const ProcessParams& params) {
    if (kind != params.kind)
        throw std::invalid_argument("trace_integral: kind disagrees with params");
    const SpectralMeasure mu = build_measure(params);
    const double T = params.horizon;
    const double atom = covariance(kind, params.alpha0, T, T) * mu.atom_weight;
    const double density_part = adaptive_integrate(
        [&](double s) { return covariance(kind, params.alpha0, s, s) * mu.density(s); },
        0.0, T, 1e-10);
    return atom + density_part;
}

}  // namespace bridgelrt
