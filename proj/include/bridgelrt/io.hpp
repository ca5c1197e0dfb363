#pragma once

// Trajectory CSV (header `t,x`) and JSON serialization. Floats are written
// with 17 significant digits so every value round-trips losslessly.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bridgelrt/decision.hpp"
#include "bridgelrt/process.hpp"
#include "bridgelrt/simulate.hpp"
#include "bridgelrt/spectrum.hpp"
#include "bridgelrt/version.hpp"

namespace bridgelrt {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        os << format_double(traj.times[i]) << ',' << format_double(traj.values[i])
           << '\n';
}

namespace detail {

inline double parse_csv_field(const std::string& field, std::size_t line_no,
                              const char* what) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (end == begin || (end && *end != '\0'))
        throw std::invalid_argument("trajectory csv: line " + std::to_string(line_no) +
                                    ": cannot parse " + what + " value '" + field + "'");
    return v;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace detail

inline Trajectory read_trajectory(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || detail::strip_cr(line) != "t,x")
        throw std::invalid_argument("trajectory csv: line 1: expected header 't,x'");
    Trajectory traj;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("trajectory csv: line " +
                                        std::to_string(line_no) + ": expected 't,x' row");
        const double t = detail::parse_csv_field(line.substr(0, comma), line_no, "time");
        const double x = detail::parse_csv_field(line.substr(comma + 1), line_no, "x");
        if (!traj.times.empty() && !(t > traj.times.back()))
            throw std::invalid_argument("trajectory csv: line " + std::to_string(line_no) +
                                        ": times must be strictly increasing");
        traj.times.push_back(t);
        traj.values.push_back(x);
    }
    if (traj.times.empty())
        throw std::invalid_argument("trajectory csv: no data rows");
    if (traj.times.front() != 0.0 || traj.values.front() != 0.0)
        throw std::invalid_argument(
            "trajectory csv: line 2: trajectory must start at (t,x) = (0,0)");
    return traj;
}

inline Trajectory read_trajectory_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("trajectory csv: cannot open '" + path + "'");
    return read_trajectory(in);
}

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

inline void json_params(std::string& out, const ProcessParams& p) {
    out += "\"kind\": \"";
    out += to_string(p.kind);
    out += "\", \"alpha0\": " + format_double(p.alpha0) +
           ", \"alpha1\": " + format_double(p.alpha1) +
           ", \"T\": " + format_double(p.horizon);
}

}  // namespace detail

inline std::string spectrum_to_json(const Spectrum& sp) {
    std::string out = "{";
    detail::json_params(out, sp.params);
    out += ", \"eigenvalues\": [";
    for (std::size_t i = 0; i < sp.entries.size(); ++i) {
        const auto& e = sp.entries[i];
        if (i) out += ", ";
        out += "{\"lambda\": " + format_double(e.lambda) + ", \"kind\": \"" +
               to_string(e.kind) + "\", \"shape_param\": " + format_double(e.shape_param) +
               "}";
    }
    out += "], \"tail_constant\": " + format_double(sp.tail_constant) + "}";
    return out;
}

inline std::string test_report_to_json(const TestReport& report,
                                       const ProcessParams& params) {
    std::string out = "{\"params\": {";
    detail::json_params(out, params);
    out += "}, \"psi\": " + format_double(report.psi) +
           ", \"phi\": " + format_double(report.phi) +
           ", \"critical_value\": " + format_double(report.critical_value) +
           ", \"p_value\": " + format_double(report.p_value) +
           ", \"reject\": " + (report.reject ? std::string("true") : std::string("false")) +
           ", \"level_q\": " + format_double(report.level_q);
    if (report.power) {
        out += ", \"power\": " + format_double(*report.power) +
               ", \"power_basis\": \"derived-H1\"";
    } else {
        out += ", \"power\": null";
    }
    out += ", \"version\": \"" + std::string(library_version) + "\"}";
    return out;
}

inline std::string validation_report_to_json(const ValidationReport& r) {
    std::string out = "{\"params\": {";
    detail::json_params(out, r.params);
    out += "}, \"n_paths\": " + std::to_string(r.n_paths) +
           ", \"grid_step\": " + format_double(r.grid_step) +
           ", \"level_q\": " + format_double(r.level_q) +
           ", \"ks_psi\": " + format_double(r.ks_psi) +
           ", \"ks_phi\": " + format_double(r.ks_phi) +
           ", \"rejection_rate\": " + format_double(r.rejection_rate) +
           ", \"seed\": " + std::to_string(r.seed) +
           ", \"version\": \"" + std::string(library_version) + "\"}";
    return out;
}

}  // namespace bridgelrt
