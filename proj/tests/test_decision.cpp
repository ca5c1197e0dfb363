#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bridgelrt/decision.hpp"
#include "bridgelrt/nystrom.hpp"
#include "bridgelrt/simulate.hpp"

using namespace bridgelrt;
using Catch::Approx;

namespace {

ProcessParams bridge_params(double a0, double a1, double T) {
    return ProcessParams{ProcessKind::bridge, a0, a1, T};
}
ProcessParams ou_params(double a0, double a1, double T) {
    return ProcessParams{ProcessKind::ou, a0, a1, T};
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// inverse standard normal by bisection; test-side oracle
double std_normal_quantile(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std_normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Trajectory zero_path(double T, int n = 50) {
    Trajectory traj;
    for (int i = 0; i <= n; ++i) {
        traj.times.push_back(T * i / n);
        traj.values.push_back(0.0);
    }
    return traj;
}

}  // namespace

TEST_CASE("psi_statistic: printed reductions and domain checks", "[decision]") {
    const auto params = bridge_params(1.0, 2.0, 0.5);
    REQUIRE(psi_statistic(params, zero_path(0.5)) == 0.0);

    // trajectory must reach T
    REQUIRE_THROWS_AS(psi_statistic(params, zero_path(0.4)), std::invalid_argument);

    // alpha0 + alpha1 = 1: the integral coefficient vanishes
    Trajectory traj;
    traj.times = {0.0, 0.1, 0.2, 0.3};
    traj.values = {0.0, 0.4, -0.2, 0.5};
    const auto boundary = bridge_params(0.0, 1.0, 0.3);
    REQUIRE(psi_statistic(boundary, traj) == Approx(0.25 / 0.7).epsilon(1e-15));

    // ou form
    const auto ou = ou_params(1.0, 2.0, 0.3);
    const double integral = 0.05 * (0.0 + 0.16) + 0.05 * (0.16 + 0.04) + 0.05 * (0.04 + 0.25);
    REQUIRE(psi_statistic(ou, traj) == Approx(0.25 + 3.0 * integral).epsilon(1e-14));
}

TEST_CASE("psi ensemble mean matches the operator trace", "[decision][statistical]") {
    const auto params = bridge_params(1.0, 1.0, 0.5);
    const std::size_t n = 100000;
    const auto funcs =
        simulate_functionals(ProcessKind::bridge, 1.0, 0.5, 5e-4, n, 71);
    double mean = 0.0;
    for (const auto& f : funcs) mean += psi_from_functionals(params, f);
    mean /= static_cast<double>(n);
    const double trace = trace_integral(ProcessKind::bridge, params);
    const Spectrum sp = bridge_spectrum(params, 50);
    double sum_sq = 0.0;
    for (const auto& e : sp.entries) sum_sq += e.lambda * e.lambda;
    const double se = std::sqrt(2.0 * sum_sq / static_cast<double>(n));
    REQUIRE(std::abs(mean - trace) < 4.0 * se + 1e-3);
}

TEST_CASE("likelihood_ratio: fixed points and support bound", "[decision]") {
    const auto params = bridge_params(1.0, 2.0, 0.5);
    REQUIRE(likelihood_ratio(params, -std::log1p(-0.5)) == Approx(1.0).epsilon(1e-14));
    REQUIRE(likelihood_ratio(params, 0.0) ==
            Approx(std::pow(0.5, -0.5)).epsilon(1e-14));
    REQUIRE(phi_support_bound(params) == Approx(std::sqrt(2.0)).epsilon(1e-14));

    const auto ou = ou_params(2.0, 1.0, 0.7);
    REQUIRE(likelihood_ratio(ou, 0.7) == Approx(1.0).epsilon(1e-14));
    REQUIRE_THROWS_AS(likelihood_ratio(ou, -0.1), std::invalid_argument);
}

TEST_CASE("lr_cdf: closed-form branch matches the printed Gaussian display",
          "[decision][oracle]") {
    const auto params = bridge_params(0.0, 1.0, 0.3);
    const LikelihoodRatioDist dist(params);
    REQUIRE(dist.closed_form());
    const double bound = 1.0 / std::sqrt(0.7);
    for (double x : {0.05, 0.3, 0.7, 1.0, 1.15, bound}) {
        const double printed =
            2.0 - 2.0 * std_normal_cdf(std::sqrt(
                          0.7 * (-2.0 * std::log(x) - std::log1p(-0.3)) / 0.3));
        REQUIRE(dist.cdf(x, 1e-10) == Approx(printed).margin(1e-12));
    }
    REQUIRE(dist.cdf(bound + 1e-9, 1e-10) == 1.0);
    REQUIRE(dist.cdf(1e-12, 1e-10) == Approx(0.0).margin(1e-12));
    REQUIRE(dist.cdf(-1.0, 1e-10) == 0.0);
}

TEST_CASE("lr_cdf: orientation identity between swapped hypothesis orders",
          "[decision]") {
    // phi_{a1,a0} = 1/phi_{a0,a1} pathwise, so evaluating under the same
    // process measure links the two orientations of the main theorem
    const auto fwd = bridge_params(1.0, 2.0, 0.5);   // alpha0 < alpha1
    const auto rev = bridge_params(2.0, 1.0, 0.5);   // alpha0 > alpha1
    const LikelihoodRatioDist dist_fwd(fwd);
    const LikelihoodRatioDist dist_rev(rev);
    for (double x : {0.3, 0.8, 1.2, 2.0}) {
        const double lhs = dist_rev.cdf(x, 1e-9);                       // under P^(2)
        const double rhs = 1.0 - dist_fwd.cdf(1.0 / x, Hypothesis::H1, 1e-9);
        REQUIRE(lhs == Approx(rhs).margin(1e-7));
    }
}

TEST_CASE("lr_cdf default-hypothesis overloads", "[decision]") {
    const auto params = ou_params(1.0, 2.0, 1.0);
    const double x = 1.1;
    REQUIRE(lr_cdf(params, x, Hypothesis::H0, 1e-8) ==
            Approx(LikelihoodRatioDist(params).cdf(x, 1e-8)).margin(1e-12));
}

TEST_CASE("critical_value: defining identity and closed-branch inverse",
          "[decision]") {
    for (const auto& params :
         {bridge_params(1.0, 2.0, 0.5), bridge_params(2.0, 1.0, 0.5),
          ou_params(1.0, 2.0, 1.0)}) {
        const LikelihoodRatioDist dist(params);
        for (double q : {0.05, 0.2}) {
            const double c = dist.critical_value(q, 1e-8);
            REQUIRE(dist.cdf(c, 1e-9) == Approx(1.0 - q).margin(1e-7));
        }
    }

    // (0, 1, 0.3), q = 0.05: algebraic inversion of the Gaussian display
    const auto closed = bridge_params(0.0, 1.0, 0.3);
    const double q = 0.05;
    const double z = std_normal_quantile((1.0 + q) / 2.0);
    const double psi_c = z * z * 0.3 / 0.7;
    const double expected = std::exp(-0.5 * (psi_c + std::log1p(-0.3)));
    REQUIRE(critical_value(closed, q, 1e-10) == Approx(expected).epsilon(1e-7));
}

TEST_CASE("critical_value: q -> 1 approaches the support edge", "[decision]") {
    const auto down = bridge_params(1.0, 2.0, 0.5);  // phi in (0, bound]
    const LikelihoodRatioDist d1(down);
    REQUIRE(d1.critical_value(0.999, 1e-6) < d1.critical_value(0.9, 1e-6));
    REQUIRE(d1.critical_value(0.9, 1e-6) < d1.critical_value(0.5, 1e-6));

    const auto up = bridge_params(2.0, 1.0, 0.5);    // phi in [bound, inf)
    const LikelihoodRatioDist d2(up);
    const double bound = phi_support_bound(up);
    const double nearer = d2.critical_value(0.9999, 1e-6);
    const double near = d2.critical_value(0.999, 1e-6);
    const double far = d2.critical_value(0.5, 1e-6);
    REQUIRE(near > bound);
    REQUIRE(nearer - bound < near - bound);
    REQUIRE(near - bound < 0.1 * (far - bound));
}

TEST_CASE("run_test: extreme statistic rejects, report fields consistent",
          "[decision]") {
    const auto params = bridge_params(1.0, 2.0, 0.5);
    const TestReport report = run_test(params, zero_path(0.5), 0.1, 1e-8, true);
    REQUIRE(report.psi == 0.0);
    REQUIRE(report.phi == Approx(phi_support_bound(params)));
    REQUIRE(report.reject);
    REQUIRE(report.phi > report.critical_value);
    REQUIRE(report.p_value == Approx(0.0).margin(1e-9));
    REQUIRE(report.level_q == 0.1);
    REQUIRE(report.power.has_value());
    REQUIRE(*report.power > 0.1);
    REQUIRE_THROWS_AS(run_test(params, zero_path(0.5), 1.5), std::invalid_argument);
}

TEST_CASE("power: indistinguishable hypotheses give power ~ q", "[decision]") {
    const auto params = bridge_params(1.0, 1.001, 0.5);
    REQUIRE(std::abs(power(params, 0.05, 1e-8) - 0.05) < 2e-2);
}

TEST_CASE("power: level comparison across parameter sets (recorded)",
          "[decision]") {
    // Neyman-Pearson unbiasedness is not asserted, only computed and logged
    for (const auto& params :
         {bridge_params(1.0, 2.0, 0.5), bridge_params(2.0, 1.0, 0.5),
          bridge_params(0.1, 1.2, 0.9), ou_params(1.0, 2.0, 1.0),
          ou_params(0.0, 1.0, 1.0)}) {
        const double p = power(params, 0.05, 1e-8);
        INFO("kind=" << to_string(params.kind) << " alpha0=" << params.alpha0
                     << " alpha1=" << params.alpha1 << " power(0.05)=" << p);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("phi support bound holds on simulated paths", "[decision][statistical]") {
    const auto params = bridge_params(1.0, 2.0, 0.5);
    const double bound = phi_support_bound(params);
    const auto funcs = simulate_functionals(ProcessKind::bridge, 1.0, 0.5, 1e-3, 2000, 5);
    for (const auto& f : funcs) {
        const double phi = likelihood_ratio(params, psi_from_functionals(params, f));
        REQUIRE(phi <= bound + 1e-12);
    }
}

TEST_CASE("p-values are uniform under H0", "[decision][statistical]") {
    const auto params = bridge_params(1.0, 2.0, 0.5);
    const LikelihoodRatioDist dist(params);
    const std::size_t n = 10000;
    const auto funcs = simulate_functionals(ProcessKind::bridge, 1.0, 0.5, 1e-3, n, 29);
    std::vector<double> pvals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = likelihood_ratio(params, psi_from_functionals(params, funcs[i]));
        pvals[i] = dist.p_value(phi, 1e-8);
    }
    const double ks = ks_vs_continuous(EmpiricalCdf(std::move(pvals)), [](double p) {
        return std::min(1.0, std::max(0.0, p));
    });
    REQUIRE(ks < 0.02);
}

TEST_CASE("closed-form branch is the limit of the spectral branch",
          "[decision][oracle]") {
    // alpha0 + alpha1 = 1 + 1e-4 through the full spectral machinery vs the
    // boundary closed form
    const auto general = bridge_params(0.45, 0.5501, 0.3);
    const auto boundary = bridge_params(0.45, 0.55, 0.3);
    const LikelihoodRatioDist spectral(general);
    const LikelihoodRatioDist closed(boundary);
    REQUIRE_FALSE(spectral.closed_form());
    REQUIRE(closed.closed_form());
    const double bound = phi_support_bound(boundary);
    for (double x : {0.2 * bound, 0.5 * bound, 0.8 * bound, 0.95 * bound, 0.999 * bound})
        REQUIRE(std::abs(spectral.cdf(x, 1e-7) - closed.cdf(x, 1e-7)) < 5e-3);
}
