// bridge-lrt: exact likelihood-ratio testing for the scaling parameter of
// alpha-Brownian bridges and Ornstein-Uhlenbeck processes. Subcommands cover
// spectra, distribution evaluation, critical values, test execution, power,
// path simulation and Monte Carlo validation; output is JSON or CSV plot
// data on stdout.
//
// Exit codes: 0 success, 1 numerical/domain failure, 2 usage error.

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bridgelrt/decision.hpp"
#include "bridgelrt/io.hpp"
#include "bridgelrt/nystrom.hpp"
#include "bridgelrt/process.hpp"
#include "bridgelrt/simulate.hpp"
#include "bridgelrt/smirnov.hpp"
#include "bridgelrt/spectrum.hpp"
#include "bridgelrt/version.hpp"

namespace {

using namespace bridgelrt;

struct ProcessOpts {
    std::string kind = "bridge";
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double horizon = 0.0;

    ProcessParams params() const {
        ProcessParams p;
        p.kind = kind == "ou" ? ProcessKind::ou : ProcessKind::bridge;
        p.alpha0 = alpha0;
        p.alpha1 = alpha1;
        p.horizon = horizon;
        validate_params(p);
        return p;
    }
};

void add_process_options(CLI::App* cmd, ProcessOpts& opts) {
    cmd->add_option("--kind", opts.kind, "process family")
        ->check(CLI::IsMember({"bridge", "ou"}))
        ->required();
    cmd->add_option("--alpha0", opts.alpha0, "null-hypothesis scaling parameter")
        ->required();
    cmd->add_option("--alpha1", opts.alpha1, "alternative scaling parameter")
        ->required();
    cmd->add_option("--T", opts.horizon, "observation horizon")->required();
}

Hypothesis parse_hypothesis(const std::string& s) {
    return s == "H1" ? Hypothesis::H1 : Hypothesis::H0;
}

std::string params_json_prefix(const ProcessParams& p) {
    std::string out = "{\"params\": {";
    out += "\"kind\": \"";
    out += to_string(p.kind);
    out += "\", \"alpha0\": " + format_double(p.alpha0) +
           ", \"alpha1\": " + format_double(p.alpha1) +
           ", \"T\": " + format_double(p.horizon) + "}";
    return out;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open output file '" + out_path + "'");
    os << text;
    if (!text.empty() && text.back() != '\n') os << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"likelihood-ratio tests for the scaling parameter of "
                 "alpha-Brownian bridges and Ornstein-Uhlenbeck processes"};
    app.set_config("--config", "", "config file (same keys as flags; flags win)");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(library_version));

    // spectrum
    auto* sp_cmd = app.add_subcommand(
        "spectrum", "eigenvalues of the covariance operator under the test measure");
    ProcessOpts sp_opts;
    add_process_options(sp_cmd, sp_opts);
    std::size_t sp_n = 10;
    std::string sp_format = "json", sp_out;
    sp_cmd->add_option("-n,--n-eigs", sp_n, "number of eigenvalues");
    sp_cmd->add_option("--format", sp_format)->check(CLI::IsMember({"json", "csv"}));
    sp_cmd->add_option("--out", sp_out, "output file (default stdout)");
    sp_cmd->callback([&] {
        const Spectrum sp = compute_spectrum(sp_opts.params(), sp_n);
        if (sp_format == "json") {
            emit(spectrum_to_json(sp), sp_out);
        } else {
            std::string csv = "lambda,kind,shape_param\n";
            for (const auto& e : sp.entries)
                csv += format_double(e.lambda) + "," + to_string(e.kind) + "," +
                       format_double(e.shape_param) + "\n";
            emit(csv, sp_out);
        }
    });

    // cdf
    auto* cdf_cmd = app.add_subcommand(
        "cdf", "distribution function of the likelihood ratio phi or of psi");
    ProcessOpts cdf_opts;
    add_process_options(cdf_cmd, cdf_opts);
    double cdf_x = 0.0, cdf_from = 0.0, cdf_to = 0.0, cdf_tol = 1e-8;
    std::size_t cdf_points = 0;
    std::string cdf_of = "phi", cdf_hyp = "H0", cdf_format = "json", cdf_out;
    auto* cdf_x_opt = cdf_cmd->add_option("--x", cdf_x, "evaluation point");
    cdf_cmd->add_option("--of", cdf_of)->check(CLI::IsMember({"phi", "psi"}));
    cdf_cmd->add_option("--hypothesis", cdf_hyp)->check(CLI::IsMember({"H0", "H1"}));
    cdf_cmd->add_option("--tol", cdf_tol, "probability tolerance");
    cdf_cmd->add_option("--from", cdf_from, "curve start (with --points)");
    cdf_cmd->add_option("--to", cdf_to, "curve end (with --points)");
    cdf_cmd->add_option("--points", cdf_points, "emit a CSV curve with this many points");
    cdf_cmd->add_option("--format", cdf_format)->check(CLI::IsMember({"json", "csv"}));
    cdf_cmd->add_option("--out", cdf_out, "output file (default stdout)");
    cdf_cmd->callback([&] {
        const ProcessParams params = cdf_opts.params();
        const LikelihoodRatioDist dist(params);
        const Hypothesis h = parse_hypothesis(cdf_hyp);
        const auto eval = [&](double x) {
            return cdf_of == "phi" ? dist.cdf(x, h, cdf_tol)
                                   : dist.psi_cdf(x, h, cdf_tol);
        };
        if (cdf_points > 0) {
            if (!(cdf_to > cdf_from))
                throw std::invalid_argument("cdf: need --from < --to for a curve");
            std::string csv = "x,cdf\n";
            for (std::size_t i = 0; i < cdf_points; ++i) {
                const double x =
                    cdf_from + (cdf_to - cdf_from) * static_cast<double>(i) /
                                   static_cast<double>(cdf_points - 1);
                csv += format_double(x) + "," + format_double(eval(x)) + "\n";
            }
            emit(csv, cdf_out);
            return;
        }
        if (cdf_x_opt->count() == 0)
            throw std::invalid_argument("cdf: --x is required without --points");
        const double value = eval(cdf_x);
        if (cdf_format == "json") {
            std::string out = params_json_prefix(params);
            out += ", \"of\": \"" + cdf_of + "\", \"hypothesis\": \"" + cdf_hyp +
                   "\", \"x\": " + format_double(cdf_x) +
                   ", \"cdf\": " + format_double(value) + "}";
            emit(out, cdf_out);
        } else {
            emit("x,cdf\n" + format_double(cdf_x) + "," + format_double(value) + "\n",
                 cdf_out);
        }
    });

    // quantile (of psi)
    auto* q_cmd = app.add_subcommand("quantile", "quantile of the psi statistic");
    ProcessOpts q_opts;
    add_process_options(q_cmd, q_opts);
    double q_p = 0.0, q_tol = 1e-8;
    std::string q_hyp = "H0", q_out;
    q_cmd->add_option("--p", q_p, "probability level")->required();
    q_cmd->add_option("--hypothesis", q_hyp)->check(CLI::IsMember({"H0", "H1"}));
    q_cmd->add_option("--tol", q_tol, "probability tolerance");
    q_cmd->add_option("--out", q_out, "output file (default stdout)");
    q_cmd->callback([&] {
        const ProcessParams params = q_opts.params();
        const LikelihoodRatioDist dist(params);
        const double value = dist.psi_quantile(q_p, parse_hypothesis(q_hyp), q_tol);
        std::string out = params_json_prefix(params);
        out += ", \"hypothesis\": \"" + q_hyp + "\", \"p\": " + format_double(q_p) +
               ", \"quantile\": " + format_double(value) + "}";
        emit(out, q_out);
    });

    // critical-value
    auto* cv_cmd = app.add_subcommand(
        "critical-value", "rejection threshold c with P_H0(phi > c) = q");
    ProcessOpts cv_opts;
    add_process_options(cv_cmd, cv_opts);
    double cv_q = 0.05, cv_tol = 1e-8;
    std::string cv_out;
    cv_cmd->add_option("--q", cv_q, "test level")->required();
    cv_cmd->add_option("--tol", cv_tol, "probability tolerance");
    cv_cmd->add_option("--out", cv_out, "output file (default stdout)");
    cv_cmd->callback([&] {
        const ProcessParams params = cv_opts.params();
        const double c = critical_value(params, cv_q, cv_tol);
        std::string out = params_json_prefix(params);
        out += ", \"q\": " + format_double(cv_q) +
               ", \"critical_value\": " + format_double(c) + "}";
        emit(out, cv_out);
    });

    // test
    auto* test_cmd = app.add_subcommand(
        "test", "run the Neyman-Pearson test on an observed trajectory");
    ProcessOpts test_opts;
    add_process_options(test_cmd, test_opts);
    std::string test_traj, test_out;
    double test_q = 0.05, test_tol = 1e-8;
    bool test_power = false;
    test_cmd->add_option("--traj", test_traj, "trajectory CSV (header t,x)")->required();
    test_cmd->add_option("--q", test_q, "test level");
    test_cmd->add_option("--tol", test_tol, "probability tolerance");
    test_cmd->add_flag("--power", test_power, "also report the test power");
    test_cmd->add_option("--out", test_out, "output file (default stdout)");
    test_cmd->callback([&] {
        const ProcessParams params = test_opts.params();
        const Trajectory traj = read_trajectory_file(test_traj);
        const TestReport report = run_test(params, traj, test_q, test_tol, test_power);
        emit(test_report_to_json(report, params), test_out);
    });

    // power
    auto* pw_cmd = app.add_subcommand(
        "power", "probability of rejecting H0 under the alternative");
    ProcessOpts pw_opts;
    add_process_options(pw_cmd, pw_opts);
    double pw_q = 0.05, pw_tol = 1e-8;
    std::string pw_out;
    pw_cmd->add_option("--q", pw_q, "test level")->required();
    pw_cmd->add_option("--tol", pw_tol, "probability tolerance");
    pw_cmd->add_option("--out", pw_out, "output file (default stdout)");
    pw_cmd->callback([&] {
        const ProcessParams params = pw_opts.params();
        const double value = power(params, pw_q, pw_tol);
        std::string out = params_json_prefix(params);
        out += ", \"q\": " + format_double(pw_q) +
               ", \"power\": " + format_double(value) +
               ", \"power_basis\": \"derived-H1\"}";
        emit(out, pw_out);
    });

    // simulate
    auto* sim_cmd = app.add_subcommand(
        "simulate", "sample one exact-transition trajectory as CSV");
    std::string sim_kind = "bridge", sim_out;
    double sim_alpha = 0.0, sim_T = 0.0, sim_step = 0.0;
    std::uint64_t sim_seed = 1;
    sim_cmd->add_option("--kind", sim_kind)->check(CLI::IsMember({"bridge", "ou"}))
        ->required();
    sim_cmd->add_option("--alpha", sim_alpha, "true scaling parameter")->required();
    sim_cmd->add_option("--T", sim_T, "horizon")->required();
    sim_cmd->add_option("--step", sim_step, "grid step (default T/1000)");
    sim_cmd->add_option("--seed", sim_seed, "rng seed");
    sim_cmd->add_option("--out", sim_out, "output file (default stdout)");
    sim_cmd->callback([&] {
        const ProcessKind kind = sim_kind == "ou" ? ProcessKind::ou : ProcessKind::bridge;
        if (!(sim_T > 0.0) || (kind == ProcessKind::bridge && sim_T >= 1.0))
            throw std::invalid_argument("simulate: need 0 < T (< 1 for bridge)");
        const double step = sim_step > 0.0 ? sim_step : sim_T / 1000.0;
        const auto n = static_cast<std::size_t>(std::ceil(sim_T / step - 1e-12));
        std::vector<double> grid(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            grid[i] = sim_T * static_cast<double>(i) / static_cast<double>(n);
        grid.back() = sim_T;
        const Trajectory traj = sample_path(kind, sim_alpha, grid, sim_seed);
        std::ostringstream os;
        write_trajectory_csv(os, traj);
        emit(os.str(), sim_out);
    });

    // validate
    auto* val_cmd = app.add_subcommand(
        "validate", "Monte Carlo validation of the spectral formulas");
    ProcessOpts val_opts;
    add_process_options(val_cmd, val_opts);
    std::size_t val_paths = 10000;
    double val_step = 0.0, val_q = 0.05, val_tol = 1e-8;
    std::uint64_t val_seed = 1;
    std::string val_dump, val_out;
    val_cmd->add_option("--n-paths", val_paths, "ensemble size (>= 1000)");
    val_cmd->add_option("--step", val_step, "grid step (default T/1000)");
    val_cmd->add_option("--q", val_q, "test level");
    val_cmd->add_option("--seed", val_seed, "rng seed");
    val_cmd->add_option("--tol", val_tol, "probability tolerance");
    val_cmd->add_option("--dump", val_dump, "write per-path psi,phi CSV here");
    val_cmd->add_option("--out", val_out, "output file (default stdout)");
    val_cmd->callback([&] {
        const ProcessParams params = val_opts.params();
        const double step = val_step > 0.0 ? val_step : params.horizon / 1000.0;
        std::vector<std::pair<double, double>> dump;
        const ValidationReport report =
            validate(params, val_paths, step, val_q, val_seed, val_tol,
                     val_dump.empty() ? nullptr : &dump);
        if (!val_dump.empty()) {
            std::ofstream os(val_dump);
            if (!os) throw std::runtime_error("cannot open dump file '" + val_dump + "'");
            os << "psi,phi\n";
            for (const auto& [psi, phi] : dump)
                os << format_double(psi) << ',' << format_double(phi) << '\n';
        }
        emit(validation_report_to_json(report), val_out);
    });

    // expected-future
    auto* ef_cmd = app.add_subcommand(
        "expected-future", "conditional mean curve t -> E[X_t | X_s = x] as CSV");
    std::string ef_kind = "bridge", ef_out;
    double ef_alpha = 0.0, ef_s = 0.0, ef_x = 1.0, ef_end = 0.0;
    std::size_t ef_grid = 100;
    ef_cmd->add_option("--kind", ef_kind)->check(CLI::IsMember({"bridge", "ou"}))
        ->required();
    ef_cmd->add_option("--alpha", ef_alpha, "scaling parameter")->required();
    ef_cmd->add_option("--s", ef_s, "conditioning time")->required();
    ef_cmd->add_option("--x", ef_x, "observed value at s");
    ef_cmd->add_option("--grid", ef_grid, "number of curve segments");
    ef_cmd->add_option("--T", ef_end, "curve end (default 1 for bridge)");
    ef_cmd->add_option("--out", ef_out, "output file (default stdout)");
    ef_cmd->callback([&] {
        const ProcessKind kind = ef_kind == "ou" ? ProcessKind::ou : ProcessKind::bridge;
        double end = ef_end;
        if (end <= 0.0) {
            if (kind == ProcessKind::ou)
                throw std::invalid_argument("expected-future: --T required for ou");
            end = 1.0;
        }
        if (!(ef_s >= 0.0) || !(end > ef_s))
            throw std::invalid_argument("expected-future: need 0 <= s < T");
        if (ef_grid < 1) throw std::invalid_argument("expected-future: --grid >= 1");
        std::string csv = "t,expected\n";
        for (std::size_t i = 0; i <= ef_grid; ++i) {
            const double t = ef_s + (end - ef_s) * static_cast<double>(i) /
                                        static_cast<double>(ef_grid);
            csv += format_double(t) + "," +
                   format_double(expected_future(kind, ef_alpha, ef_s, t, ef_x)) + "\n";
        }
        emit(csv, ef_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
