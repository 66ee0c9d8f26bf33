#pragma once

// Command-line front end: argument / config-file parsing, the benchmark
// subcommands, the `rates` table helper and manifest re-runs.
//
//   scns cavity --re 100 --grid 31 --dt 0.005 --steady --out run1
//   scns rates run11/report.json run21/report.json
//   scns rerun run1/manifest.json

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scns/bench.hpp"
#include "scns/io.hpp"
#include "scns/ns.hpp"

namespace scns {

class UsageError : public Error {
public:
    using Error::Error;
};

struct CliOptions {
    std::string subcommand;     // burgers | cavity | double-cavity | rates | rerun
    ProblemConfig config;
    std::string out_dir = "out";
    int dump_every = 0;         // 0: final state only
    std::vector<std::string> report_files; // rates
    std::string manifest_path;             // rerun
    bool quiet = false;
};

/// Default pressure relaxation for a Reynolds number.
inline double default_lambda(double re)
{
    if (re <= 10.0) return 0.1;
    if (re <= 100.0) return 0.06;
    return 0.02;
}

/// Turn `key = value` lines into command-line tokens. `steady = true`
/// becomes the bare flag; `steady = false` is dropped.
inline std::vector<std::string> config_file_tokens(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read config file '" + path + "'");
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    std::vector<std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
        for (char& c : key)
            if (c == '_') c = '-';
        if (key == "steady") {
            if (value == "true" || value == "on" || value == "1") out.push_back("--steady");
            else if (!(value == "false" || value == "off" || value == "0"))
                throw UsageError(path + ":" + std::to_string(lineno) + ": bad value for steady");
            continue;
        }
        out.push_back("--" + key);
        out.push_back(value);
    }
    return out;
}

namespace detail {

struct RawFlags {
    double re = 0, dt = 0, t_end = 0, lambda = 0, ptol = 1e-3, sigma = 1.0, steady_tol = 1e-6;
    double lid_speed = 1.0;
    int grid = 0, kernel_radius = 1, dump_every = 0, max_piters = 1000;
    long max_steps = 10'000'000;
    bool steady = false, quiet = false;
    std::string filter = "on", out = "out", config;
};

inline void add_run_flags(CLI::App* sub, RawFlags& f)
{
    sub->add_option("--re", f.re, "Reynolds number")->check(CLI::PositiveNumber);
    sub->add_option("--grid", f.grid, "nodes per axis (cubic grid)")->check(CLI::Range(3, 100000));
    sub->add_option("--dt", f.dt, "time step")->check(CLI::PositiveNumber);
    auto* tend = sub->add_option("--t-end", f.t_end, "end time")->check(CLI::PositiveNumber);
    auto* steady = sub->add_flag("--steady", f.steady, "run to steady state");
    tend->excludes(steady);
    sub->add_option("--lambda", f.lambda, "pressure relaxation (default depends on Re)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--ptol", f.ptol, "divergence tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--filter", f.filter, "Gaussian pressure filter")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--kernel-radius", f.kernel_radius, "filter half width in nodes")
        ->check(CLI::Range(1, 64));
    sub->add_option("--sigma", f.sigma, "filter width in grid spacings")->check(CLI::PositiveNumber);
    sub->add_option("--steady-tol", f.steady_tol, "steady-state residual")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-steps", f.max_steps, "step cap")->check(CLI::PositiveNumber);
    sub->add_option("--max-pressure-iters", f.max_piters, "pressure corrections per step")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--lid-speed", f.lid_speed, "lid velocity");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--dump-every", f.dump_every, "also dump fields every n steps")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", f.quiet, "no progress output");
}

} // namespace detail

/// Parse argv (argv[0] is skipped). Throws UsageError on any error; the
/// message contains the usage text.
inline CliOptions parse_args(const std::vector<std::string>& argv)
{
    // The config file is spliced in front of the remaining flags so that
    // command-line values win (take-last policy).
    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string file;
        std::size_t width = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[i + 1];
            width = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            width = 1;
        } else {
            continue;
        }
        auto toks = config_file_tokens(file);
        for (const auto& t : toks)
            if (t == "--config") throw UsageError("config files cannot include other config files");
        args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i + width));
        std::size_t pos = 1; // right after the subcommand
        if (args.empty() || args[0].rfind("-", 0) == 0) pos = 0;
        args.insert(args.begin() + static_cast<long>(std::min(pos, args.size())), toks.begin(),
                    toks.end());
        break;
    }

    CLI::App app{"Super-compact finite-difference solver for 3D convection-diffusion and "
                 "incompressible Navier-Stokes benchmarks",
                 "scns"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    detail::RawFlags f;
    auto* burgers = app.add_subcommand("burgers", "3D Burgers convergence run");
    auto* cavity = app.add_subcommand("cavity", "single lid-driven cavity");
    auto* dcavity = app.add_subcommand("double-cavity", "double lid-driven cavity");
    for (auto* s : {burgers, cavity, dcavity}) detail::add_run_flags(s, f);

    CliOptions o;
    auto* rates = app.add_subcommand("rates", "convergence-rate table from report files");
    rates->add_option("reports", o.report_files, "report.json files, coarse to fine")
        ->required()
        ->expected(2, 1000)
        ->check(CLI::ExistingFile);
    auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
    rerun->add_option("manifest", o.manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
    rerun->add_option("--out", f.out, "output directory (default: the one in the manifest)");
    rerun->add_flag("--quiet", f.quiet, "no progress output");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help());
    } catch (const CLI::ParseError& e) {
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        throw UsageError(std::string(e.what()) + "\n\n" + sub->help());
    }

    o.subcommand = app.get_subcommands().front()->get_name();
    o.quiet = f.quiet;
    if (o.subcommand == "rates") return o;
    if (o.subcommand == "rerun") {
        o.out_dir = rerun->count("--out") > 0 ? f.out : std::string();
        return o;
    }
    auto* sub = app.get_subcommands().front();

    ProblemConfig& c = o.config;
    c.problem = problem_from_string(o.subcommand);
    const bool is_burgers = c.problem == ProblemKind::burgers;
    c.re = sub->count("--re") ? f.re : (is_burgers ? 10.0 : 100.0);
    const int n = sub->count("--grid") ? f.grid : (is_burgers ? 11 : 31);
    const double dt = sub->count("--dt") ? f.dt : (is_burgers ? 0.01 : 0.005);
    c.grid = GridSpec::cube(n, dt);
    c.steady = f.steady;
    c.t_end = c.steady ? 0.0 : (sub->count("--t-end") ? f.t_end : (is_burgers ? 1.0 : 15.0));
    c.steady_tol = f.steady_tol;
    c.max_steps = f.max_steps;
    c.lid_speed = f.lid_speed;
    c.pressure.lambda = sub->count("--lambda") ? f.lambda : default_lambda(c.re);
    c.pressure.tol = f.ptol;
    c.pressure.filter_enabled = f.filter == "on";
    c.pressure.kernel_radius = f.kernel_radius;
    c.pressure.kernel_sigma = f.sigma;
    c.pressure.max_pressure_iters = f.max_piters;
    c.burgers.re = c.re;
    o.out_dir = f.out;
    o.dump_every = f.dump_every;
    try {
        c.validate();
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    }
    return o;
}

inline CliOptions parse_args(int argc, const char* const* argv)
{
    return parse_args(std::vector<std::string>(argv, argv + argc));
}

// ----------------------------------------------------------------- outputs

inline void write_field_dump(const SimState& s, const std::string& path)
{
    write_vtk(path, {{"pressure", &s.pr}}, {{"velocity", &s.v}});
}

/// Profiles, fields and report for a finished (or aborted) run.
inline void write_run_outputs(const SimState& s, const ProblemConfig& cfg, const std::string& dir)
{
    namespace fs = std::filesystem;
    const fs::path d(dir);
    write_report(s.report, cfg, &s, (d / "report.json").string());
    if (cfg.problem == ProblemKind::burgers) return;
    const CenterlineProfiles prof = centerline_profiles(s.v);
    write_csv_profiles(prof.vertical, (d / "centerline_vertical.csv").string());
    write_csv_profiles(prof.horizontal, (d / "centerline_horizontal.csv").string());
    write_field_dump(s, (d / "fields.vtk").string());
}

/// Execute a run described by a manifest; returns the exit code.
inline int execute(const RunManifest& m, std::ostream& out, std::ostream& err, bool quiet)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(m.output_dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << m.output_dir << "': " << ec.message()
            << '\n';
        return 3;
    }
    const fs::path d(m.output_dir);
    write_json(manifest_to_json(m), (d / "manifest.json").string());

    const ProblemConfig& cfg = m.config;
    const long log_every = std::max(1L, std::lround(0.5 / cfg.grid.dt()));
    auto observer = [&](const SimState& s) {
        if (!quiet && s.step % log_every == 0)
            out << "step " << s.step << "  t=" << s.time
                << "  residual=" << s.report.residuals.back()
                << "  p-iters=" << s.report.pressure_iterations.back() << '\n';
        if (m.dump_every > 0 && s.step % m.dump_every == 0 && cfg.problem != ProblemKind::burgers)
            write_field_dump(s, (d / ("fields_" + std::to_string(s.step) + ".vtk")).string());
    };

    try {
        const SimState s = run(cfg, observer);
        write_run_outputs(s, cfg, m.output_dir);
        if (!quiet) {
            out << s.report.status << " after " << s.report.steps() << " steps ("
                << s.report.wall_time_s << " s)\n";
            if (s.report.error_norms)
                out << "e1=" << format_real(s.report.error_norms->e1)
                    << " e2=" << format_real(s.report.error_norms->e2)
                    << " e3=" << format_real(s.report.error_norms->e3) << '\n';
            if (s.report.vortex)
                out << "primary vortex (x, z) = (" << s.report.vortex->x << ", " << s.report.vortex->z
                    << ")\n";
        }
        return s.report.converged ? 0 : 2;
    } catch (const RunAborted& e) {
        write_run_outputs(e.partial(), cfg, m.output_dir);
        err << "error: run aborted: " << e.what() << '\n';
        return 2;
    }
}

/// Print a convergence table from report files ordered coarse to fine.
inline int print_rates(const std::vector<std::string>& files, std::ostream& out, std::ostream& err)
{
    struct Row {
        int n;
        ErrorNorms e;
    };
    std::vector<Row> rows;
    for (const auto& f : files) {
        const json j = read_json(f);
        if (!j.contains("error_norms")) {
            err << "error: '" << f << "' has no error norms (not a burgers report)\n";
            return 1;
        }
        const auto& e = j.at("error_norms");
        Row r;
        r.n = j.at("config").at("grid").at("nx").get<int>();
        auto num = [&](const char* key) {
            const auto& v = e.at(key);
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        r.e.e1 = num("e1");
        r.e.e2 = num("e2");
        r.e.e3 = num("e3");
        rows.push_back(r);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%6s  %12s %7s  %12s %7s  %12s %7s\n", "grid", "e1", "rate", "e2",
                  "rate", "e3", "rate");
    out << buf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        auto rate = [&](double ErrorNorms::*m) -> std::string {
            if (i == 0) return "-";
            if (std::isnan(rows[i - 1].e.*m) || std::isnan(r.e.*m)) return "n/a";
            try {
                char b[32];
                std::snprintf(b, sizeof b, "%.3f", convergence_rate(rows[i - 1].e.*m, r.e.*m));
                return b;
            } catch (const Error&) {
                return "n/a";
            }
        };
        const std::string g = std::to_string(r.n) + "^3";
        std::snprintf(buf, sizeof buf, "%6s  %12.4e %7s  %12.4e %7s  %12.4e %7s\n", g.c_str(), r.e.e1,
                      rate(&ErrorNorms::e1).c_str(), r.e.e2, rate(&ErrorNorms::e2).c_str(), r.e.e3,
                      rate(&ErrorNorms::e3).c_str());
        out << buf;
    }
    return 0;
}

/// Full CLI entry point. Exit codes: 0 converged, 1 usage / input error,
/// 2 run did not converge, 3 output error.
inline int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CliOptions o;
    try {
        o = parse_args(argv);
    } catch (const UsageError& e) {
        err << e.what() << '\n';
        return 1;
    }
    try {
        if (o.subcommand == "rates") return print_rates(o.report_files, out, err);
        RunManifest m;
        if (o.subcommand == "rerun") {
            m = manifest_from_json(read_json(o.manifest_path));
            if (!o.out_dir.empty()) m.output_dir = o.out_dir;
            m.config.validate();
        } else {
            m.subcommand = o.subcommand;
            m.config = o.config;
            m.output_dir = o.out_dir;
            m.dump_every = o.dump_every;
        }
        return execute(m, out, err, o.quiet);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace scns
