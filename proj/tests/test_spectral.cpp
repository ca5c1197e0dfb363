#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bridgelrt/measure.hpp"
#include "bridgelrt/nystrom.hpp"
#include "bridgelrt/quadrature.hpp"
#include "bridgelrt/rng.hpp"
#include "bridgelrt/spectrum.hpp"

using namespace bridgelrt;
using Catch::Approx;

namespace {

ProcessParams bridge_params(double a0, double a1, double T) {
    return ProcessParams{ProcessKind::bridge, a0, a1, T};
}
ProcessParams ou_params(double a0, double a1, double T) {
    return ProcessParams{ProcessKind::ou, a0, a1, T};
}

// mu-integral of f over [0,T] plus the atom, by adaptive quadrature split at
// `split` (for kernel kinks); independent of the closed-form normalizations
template <typename F>
double mu_integral(const SpectralMeasure& mu, F&& f, double split, double tol) {
    double v = mu.atom_weight * f(mu.atom_location);
    const auto weighted = [&](double s) { return f(s) * mu.density(s); };
    if (split > 0.0 && split < mu.support_end) {
        v += adaptive_integrate(weighted, 0.0, split, tol);
        v += adaptive_integrate(weighted, split, mu.support_end, tol);
    } else {
        v += adaptive_integrate(weighted, 0.0, mu.support_end, tol);
    }
    return v;
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("build_measure: printed weights", "[spectral]") {
    const SpectralMeasure mu = build_measure(bridge_params(1.0, 1.0, 0.5));
    REQUIRE(mu.atom_weight == Approx(2.0));
    REQUIRE(mu.density_coeff == Approx(1.0));
    REQUIRE(mu.atom_location == 0.5);
    REQUIRE(mu.density(0.0) == Approx(1.0));
    REQUIRE(mu.density(0.5) == Approx(4.0));
    REQUIRE(std::isfinite(mu.total_mass()));

    // degenerate density coefficient is rejected here (closed-form branch
    // handles the boundary); equal alphas are rejected outright
    REQUIRE_THROWS_AS(build_measure(bridge_params(0.5, 0.5, 0.3)),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(build_measure(bridge_params(0.3, 0.7, 0.3)),
                      std::invalid_argument);

    const SpectralMeasure ou = build_measure(ou_params(1.0, 2.0, 3.0));
    REQUIRE(ou.atom_weight == Approx(1.0));
    REQUIRE(ou.atom_location == 3.0);
    REQUIRE(ou.density_coeff == Approx(3.0));
    REQUIRE(ou.density(1.7) == Approx(3.0));
    REQUIRE(ou.total_mass() == Approx(1.0 + 9.0));
}

TEST_CASE("bridge_spectrum: regular case matches the discretized operator",
          "[spectral][oracle]") {
    const auto params = bridge_params(1.0, 1.0, 0.5);
    const Spectrum sp = bridge_spectrum(params, 10);
    const auto ny = nystrom_spectrum(ProcessKind::bridge, params, 1600, 12);
    REQUIRE(ny.size() >= 10);
    for (int k = 0; k < 10; ++k)
        REQUIRE(rel_err(sp.entries[k].lambda, ny[k]) < 1e-3);
    for (const auto& e : sp.entries) REQUIRE(e.kind == EigenKind::regular);
}

TEST_CASE("bridge_spectrum: pole-free characteristic residual", "[spectral]") {
    const auto params = bridge_params(2.0, 3.0, 0.9);
    const Spectrum sp = bridge_spectrum(params, 10);
    const double S = 4.0;
    const double L = std::log1p(-0.9);
    for (const auto& e : sp.entries) {
        const double beta = e.shape_param;
        const double lam = e.lambda;
        const double residual = (1.0 + lam * (0.5 - params.alpha0)) * std::sin(beta * L) +
                                lam * beta * std::cos(beta * L);
        REQUIRE(std::abs(residual) < 1e-12);
        REQUIRE(lam == Approx(S / (beta * beta + 2.25)).epsilon(1e-14));
    }
}

TEST_CASE("bridge_spectrum: strict decrease and tail law by branch index",
          "[spectral]") {
    const auto params = bridge_params(1.0, 1.0, 0.5);
    const Spectrum sp = bridge_spectrum(params, 60);
    for (std::size_t i = 1; i < sp.entries.size(); ++i)
        REQUIRE(sp.entries[i].lambda < sp.entries[i - 1].lambda);

    // position-indexed 10% band for k >= 30
    for (std::size_t k = 30; k <= 60; ++k) {
        const double ratio =
            static_cast<double>(k) * static_cast<double>(k) * sp.entries[k - 1].lambda /
            sp.tail_constant;
        REQUIRE(std::abs(ratio - 1.0) < 0.10);
    }
    // branch-indexed 1% law at branch 50
    bool found = false;
    for (const auto& e : sp.entries) {
        if (branch_index(sp, e) == 50) {
            REQUIRE(std::abs(2500.0 * e.lambda / sp.tail_constant - 1.0) < 1e-2);
            found = true;
        }
    }
    REQUIRE(found);
}

TEST_CASE("bridge_spectrum: exceptional-entry gate follows the threshold",
          "[spectral][oracle]") {
    // (0.1, 1.2, 0.5): min(alpha) above the threshold c, so no extra entry
    {
        const auto params = bridge_params(0.1, 1.2, 0.5);
        const Spectrum sp = bridge_spectrum(params, 6);
        for (const auto& e : sp.entries) REQUIRE(e.kind == EigenKind::regular);
        const auto ny = nystrom_spectrum(ProcessKind::bridge, params, 1600, 8);
        for (int k = 0; k < 6; ++k)
            REQUIRE(rel_err(sp.entries[k].lambda, ny[k]) < 1e-3);
    }
    // (0.1, 1.2, 0.9): below the threshold, lambda0 appears and leads
    {
        const auto params = bridge_params(0.1, 1.2, 0.9);
        const Spectrum sp = bridge_spectrum(params, 6);
        REQUIRE(sp.entries[0].kind == EigenKind::lambda0);
        REQUIRE(sp.entries[1].kind == EigenKind::regular);
        const double sigma0 = sp.entries[0].shape_param;
        REQUIRE(sigma0 > 0.0);
        REQUIRE(sigma0 < 0.5 - 0.1);
        const auto ny = nystrom_spectrum(ProcessKind::bridge, params, 1600, 8);
        for (int k = 0; k < 6; ++k)
            REQUIRE(rel_err(sp.entries[k].lambda, ny[k]) < 1e-3);
    }
    // swapped hypotheses, kernel parameter above 1/2: same sigma0, different
    // lambda0; the discretized operator arbitrates the formula
    {
        const auto params = bridge_params(1.2, 0.1, 0.9);
        const Spectrum sp = bridge_spectrum(params, 6);
        REQUIRE(sp.entries[0].kind == EigenKind::lambda0);
        const auto ny = nystrom_spectrum(ProcessKind::bridge, params, 1600, 8);
        for (int k = 0; k < 6; ++k)
            REQUIRE(rel_err(sp.entries[k].lambda, ny[k]) < 1e-3);
    }
}

TEST_CASE("bridge_spectrum: constructed resonance inserts lambda_star",
          "[spectral][oracle]") {
    const double a0 = 0.3, T = 0.5;
    const double a1 = resonance_alpha1(a0, T);
    REQUIRE(std::isfinite(a1));
    const auto params = bridge_params(a0, a1, T);
    const Spectrum sp = bridge_spectrum(params, 6);
    REQUIRE(sp.entries[0].kind == EigenKind::lambda_star);
    const double S = a0 + a1 - 1.0;
    REQUIRE(sp.entries[0].lambda == Approx(S / ((a0 - 0.5) * (a0 - 0.5))).epsilon(1e-12));
    // the resonance locus is the boundary of the lambda0 gate, so no lambda0
    for (std::size_t i = 1; i < sp.entries.size(); ++i)
        REQUIRE(sp.entries[i].kind == EigenKind::regular);
    const auto ny = nystrom_spectrum(ProcessKind::bridge, params, 1600, 8);
    for (int k = 0; k < 6; ++k)
        REQUIRE(rel_err(sp.entries[k].lambda, ny[k]) < 1e-3);
    // count agreement near the top: perturbing away from resonance by much
    // more than the detection window drops the extra entry
    const Spectrum off = bridge_spectrum(bridge_params(a0, a1 + 1e-6, T), 6);
    REQUIRE(off.entries[0].kind == EigenKind::regular);
}

TEST_CASE("ou_spectrum: matches the discretized operator", "[spectral][oracle]") {
    for (const auto& params :
         {ou_params(0.0, 1.0, 1.0), ou_params(1.0, 1.0, 1.0), ou_params(1.0, 2.0, 1.0)}) {
        const Spectrum sp = ou_spectrum(params, 10);
        const auto ny = nystrom_spectrum(ProcessKind::ou, params, 1600, 12);
        for (int k = 0; k < 10; ++k)
            REQUIRE(rel_err(sp.entries[k].lambda, ny[k]) < 1e-3);
    }
}

TEST_CASE("ou_spectrum: tail law by branch index", "[spectral]") {
    const auto params = ou_params(1.0, 2.0, 1.0);
    const Spectrum sp = ou_spectrum(params, 60);
    bool found = false;
    for (const auto& e : sp.entries) {
        if (branch_index(sp, e) == 50) {
            REQUIRE(std::abs(2500.0 * e.lambda / sp.tail_constant - 1.0) < 1e-2);
            found = true;
        }
    }
    REQUIRE(found);
}

TEST_CASE("eigenfunction: normalization, orthogonality, boundary value",
          "[spectral]") {
    for (const auto& params :
         {bridge_params(1.0, 1.0, 0.5), bridge_params(0.1, 1.2, 0.9),
          ou_params(1.0, 2.0, 1.0)}) {
        const Spectrum sp = compute_spectrum(params, 10);
        const SpectralMeasure mu = build_measure(params);
        for (int k = 0; k < 10; ++k) {
            const auto& e = sp.entries[k];
            REQUIRE(eigenfunction(e, params, 0.0) == 0.0);
            const double norm = mu_integral(
                mu,
                [&](double s) {
                    const double v = eigenfunction(e, params, s);
                    return v * v;
                },
                0.0, 1e-11);
            REQUIRE(norm == Approx(1.0).margin(1e-8));
        }
        for (int j = 0; j < 6; ++j) {
            for (int k = j + 1; k < 6; ++k) {
                const double inner = mu_integral(
                    mu,
                    [&](double s) {
                        return eigenfunction(sp.entries[j], params, s) *
                               eigenfunction(sp.entries[k], params, s);
                    },
                    0.0, 1e-11);
                REQUIRE(std::abs(inner) < 1e-7);
            }
        }
    }
}

TEST_CASE("eigenpairs solve the integral equation", "[spectral][oracle]") {
    Rng rng(31);
    for (const auto& params :
         {bridge_params(1.0, 1.0, 0.5), ou_params(1.0, 2.0, 1.0)}) {
        const Spectrum sp = compute_spectrum(params, 4);
        const SpectralMeasure mu = build_measure(params);
        for (const auto& e : sp.entries) {
            for (int rep = 0; rep < 5; ++rep) {
                const double t = rng.next_uniform() * params.horizon;
                const double applied = mu_integral(
                    mu,
                    [&](double s) {
                        return covariance(params.kind, params.alpha0, t, s) *
                               eigenfunction(e, params, s);
                    },
                    t, 1e-9);
                REQUIRE(std::abs(e.lambda * eigenfunction(e, params, t) - applied) <
                        1e-6);
            }
        }
    }
}

TEST_CASE("nystrom: rank-1 sanity and generic-vs-specialized fill",
          "[spectral]") {
    // constant kernel with a single atom of weight w: one eigenvalue w
    NystromRule atom_only;
    atom_only.nodes = {0.2, 0.5, 0.7};
    atom_only.weights = {0.0, 0.0, 3.25};
    const Eigen::MatrixXd B = detail::nystrom_matrix_generic(
        [](double, double) { return 1.0; }, atom_only);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues().maxCoeff() == Approx(3.25).margin(1e-12));
    REQUIRE(std::abs(es.eigenvalues()(0)) < 1e-12);
    REQUIRE(std::abs(es.eigenvalues()(1)) < 1e-12);

    // the structured fills agree with the direct kernel evaluation
    for (const auto& params :
         {bridge_params(0.5, 0.7, 0.6), bridge_params(1.3, 0.2, 0.4),
          ou_params(0.0, 1.0, 2.0), ou_params(0.7, 0.9, 1.5)}) {
        const NystromRule rule = nystrom_rule(build_measure(params), 32);
        const Eigen::MatrixXd fast =
            detail::nystrom_matrix(params.kind, params.alpha0, rule);
        const Eigen::MatrixXd ref = detail::nystrom_matrix_generic(
            [&](double s, double t) {
                return covariance(params.kind, params.alpha0, s, t);
            },
            rule);
        REQUIRE((fast - ref).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("nystrom: grid refinement stability and trace identity",
          "[spectral][oracle]") {
    const auto params = bridge_params(1.0, 1.0, 0.5);
    const auto coarse = nystrom_spectrum(ProcessKind::bridge, params, 1000, 4);
    const auto fine = nystrom_spectrum(ProcessKind::bridge, params, 2000, 4);
    REQUIRE(std::abs(coarse[0] - fine[0]) < 1e-4);

    // full solve on a moderate grid: eigenvalue sum equals the trace of the
    // discretized operator, which matches int R(s,s) dmu
    const auto all = nystrom_spectrum(ProcessKind::bridge, params, 512);
    double sum = 0.0;
    for (double v : all) sum += v;
    const double trace = trace_integral(ProcessKind::bridge, params);
    REQUIRE(rel_err(sum, trace) < 1e-6);
    REQUIRE(trace == Approx(std::log(2.0)).epsilon(1e-9));  // closed form here

    REQUIRE_THROWS_AS(nystrom_spectrum(ProcessKind::bridge, params, 8),
                      std::invalid_argument);
}

TEST_CASE("trace identity: closed-form spectrum with branch tail", "[spectral]") {
    for (const auto& params :
         {bridge_params(1.0, 1.0, 0.5), ou_params(1.0, 1.0, 1.0)}) {
        const Spectrum sp = compute_spectrum(params, 160);
        const double trace = trace_integral(params.kind, params);
        REQUIRE(rel_err(spectrum_trace_estimate(sp), trace) < 1e-5);
    }
    // alpha0 = 0 kernel edge: R(s,s) = s makes the density part elementary
    const auto edge = bridge_params(0.0, 1.5, 0.5);
    const double expected = 1.0 + 0.5 * (1.0 - std::log(2.0));
    REQUIRE(trace_integral(ProcessKind::bridge, edge) == Approx(expected).epsilon(1e-10));
}
