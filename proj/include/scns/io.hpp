#pragma once

// File output: centreline CSV, legacy ASCII VTK, JSON run report and run
// manifest. Every floating point value written as text uses 17 significant
// digits so that files round-trip bitwise.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scns/bench.hpp"
#include "scns/error.hpp"
#include "scns/field.hpp"
#include "scns/ns.hpp"

namespace scns {

inline constexpr const char* kVersion = "1.0.0";

class IoError : public Error {
public:
    using Error::Error;
};

inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_for_write(const std::string& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

inline void finish(std::ofstream& os, const std::string& path)
{
    os.flush();
    if (!os) throw IoError("write to '" + path + "' failed");
}

} // namespace detail

// ------------------------------------------------------------------- CSV

inline void write_csv_profiles(const std::vector<ProfileSample>& profile, const std::string& path)
{
    auto os = detail::open_for_write(path);
    os << "coord,u,v,w\n";
    for (const auto& s : profile)
        os << format_real(s.coord) << ',' << format_real(s.u) << ',' << format_real(s.v) << ','
           << format_real(s.w) << '\n';
    detail::finish(os, path);
}

inline std::vector<ProfileSample> read_csv_profiles(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line) || line != "coord,u,v,w")
        throw IoError("'" + path + "': unexpected CSV header");
    std::vector<ProfileSample> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ProfileSample s;
        char* end = nullptr;
        const char* p = line.c_str();
        double* dst[4] = {&s.coord, &s.u, &s.v, &s.w};
        for (int c = 0; c < 4; ++c) {
            *dst[c] = std::strtod(p, &end);
            if (end == p) throw IoError("'" + path + "': malformed CSV row");
            p = end;
            if (c < 3) {
                if (*p != ',') throw IoError("'" + path + "': malformed CSV row");
                ++p;
            }
        }
        out.push_back(s);
    }
    return out;
}

// ------------------------------------------------------------------- VTK

struct NamedScalar {
    std::string name;
    const ScalarField* field;
};

struct NamedVector {
    std::string name;
    const VectorField* field;
};

/// Legacy ASCII VTK, DATASET STRUCTURED_POINTS, one SCALARS / VECTORS
/// block per field. Point order is i fastest, then j, then k.
inline void write_vtk(const std::string& path, const std::vector<NamedScalar>& scalars,
                      const std::vector<NamedVector>& vectors, const std::string& title = "scns")
{
    const GridSpec* grid = nullptr;
    auto check = [&](const GridSpec& g) {
        if (grid == nullptr)
            grid = &g;
        else if (!grid->same_layout(g))
            throw GridMismatchError("write_vtk: fields on different grids");
    };
    for (const auto& s : scalars) check(s.field->grid());
    for (const auto& v : vectors) {
        check(v.field->u.grid());
        check(v.field->v.grid());
        check(v.field->w.grid());
    }
    if (grid == nullptr) throw PreconditionError("write_vtk: nothing to write");
    const GridSpec& g = *grid;

    auto os = detail::open_for_write(path);
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.nx() << ' ' << g.ny() << ' ' << g.nz() << '\n';
    os << "ORIGIN " << format_real(g.lower(Axis::x)) << ' ' << format_real(g.lower(Axis::y)) << ' '
       << format_real(g.lower(Axis::z)) << '\n';
    os << "SPACING " << format_real(g.hx()) << ' ' << format_real(g.hy()) << ' '
       << format_real(g.hz()) << '\n';
    os << "POINT_DATA " << g.size() << '\n';
    for (const auto& s : scalars) {
        os << "SCALARS " << s.name << " double 1\nLOOKUP_TABLE default\n";
        for (double x : s.field->data()) os << format_real(x) << '\n';
    }
    for (const auto& v : vectors) {
        os << "VECTORS " << v.name << " double\n";
        const auto& f = *v.field;
        for (std::size_t i = 0; i < g.size(); ++i)
            os << format_real(f.u.data()[i]) << ' ' << format_real(f.v.data()[i]) << ' '
               << format_real(f.w.data()[i]) << '\n';
    }
    detail::finish(os, path);
}

// ------------------------------------------------------------------ JSON

using json = nlohmann::ordered_json;

inline json config_to_json(const ProblemConfig& c)
{
    json j;
    j["problem"] = to_string(c.problem);
    j["re"] = c.re;
    j["lid_speed"] = c.lid_speed;
    j["grid"] = {{"nx", c.grid.nx()}, {"ny", c.grid.ny()}, {"nz", c.grid.nz()}};
    j["dt"] = c.grid.dt();
    j["t_end"] = c.t_end;
    j["steady"] = c.steady;
    j["steady_tol"] = c.steady_tol;
    j["max_steps"] = c.max_steps;
    j["pressure"] = {{"lambda", c.pressure.lambda},
                     {"tol", c.pressure.tol},
                     {"filter", c.pressure.filter_enabled},
                     {"kernel_radius", c.pressure.kernel_radius},
                     {"sigma", c.pressure.kernel_sigma},
                     {"max_pressure_iters", c.pressure.max_pressure_iters}};
    j["burgers"] = {{"c1", c.burgers.c1}, {"c2", c.burgers.c2}, {"nx", c.burgers.nx},
                    {"ny", c.burgers.ny}, {"nz", c.burgers.nz}};
    j["lin_tol"] = c.lin_tol;
    j["lin_max_iter"] = c.lin_max_iter;
    return j;
}

inline ProblemKind problem_from_string(const std::string& s)
{
    if (s == "burgers") return ProblemKind::burgers;
    if (s == "cavity") return ProblemKind::cavity;
    if (s == "double-cavity") return ProblemKind::double_cavity;
    throw PreconditionError("unknown problem '" + s + "'");
}

inline ProblemConfig config_from_json(const json& j)
{
    ProblemConfig c;
    c.problem = problem_from_string(j.at("problem").get<std::string>());
    c.re = j.at("re").get<double>();
    c.lid_speed = j.at("lid_speed").get<double>();
    const auto& g = j.at("grid");
    c.grid = GridSpec(g.at("nx").get<int>(), g.at("ny").get<int>(), g.at("nz").get<int>(),
                      j.at("dt").get<double>());
    c.t_end = j.at("t_end").get<double>();
    c.steady = j.at("steady").get<bool>();
    c.steady_tol = j.at("steady_tol").get<double>();
    c.max_steps = j.at("max_steps").get<long>();
    const auto& p = j.at("pressure");
    c.pressure.lambda = p.at("lambda").get<double>();
    c.pressure.tol = p.at("tol").get<double>();
    c.pressure.filter_enabled = p.at("filter").get<bool>();
    c.pressure.kernel_radius = p.at("kernel_radius").get<int>();
    c.pressure.kernel_sigma = p.at("sigma").get<double>();
    c.pressure.max_pressure_iters = p.at("max_pressure_iters").get<int>();
    const auto& b = j.at("burgers");
    c.burgers.re = c.re;
    c.burgers.c1 = b.at("c1").get<double>();
    c.burgers.c2 = b.at("c2").get<double>();
    c.burgers.nx = b.at("nx").get<double>();
    c.burgers.ny = b.at("ny").get<double>();
    c.burgers.nz = b.at("nz").get<double>();
    c.lin_tol = j.at("lin_tol").get<double>();
    c.lin_max_iter = j.at("lin_max_iter").get<int>();
    return c;
}

inline json vortex_to_json(const VortexLocation& v)
{
    return {{"x", v.x}, {"y", v.plane_y}, {"z", v.z}, {"vorticity", v.vorticity},
            {"streamfunction", v.streamfunction}};
}

inline json report_to_json(const RunReport& r, const ProblemConfig& cfg, const SimState* final_state)
{
    json j;
    j["config"] = config_to_json(cfg);
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["steps"] = r.steps();
    j["final_time"] = final_state ? final_state->time : 0.0;
    j["wall_time_s"] = r.wall_time_s;
    j["mean_pressure_iterations"] = r.mean_pressure_iterations();
    j["max_pressure_iters"] = cfg.pressure.max_pressure_iters;
    j["pressure_iterations"] = r.pressure_iterations;
    j["residuals"] = r.residuals;
    j["divergence"] = r.divergence;
    j["linear_iterations"] = r.linear_iterations;
    if (r.error_norms) {
        const auto& e = *r.error_norms;
        j["error_norms"] = {{"e1", e.e1},
                            {"e2", e.e2},
                            {"e3", e.e3},
                            {"e1_component", e.e1_component},
                            {"e3_component", e.e3_component}};
    }
    if (r.vortex) j["vortex"] = vortex_to_json(*r.vortex);
    if (!r.vortex_centers.empty()) {
        json arr = json::array();
        for (const auto& v : r.vortex_centers) arr.push_back(vortex_to_json(v));
        j["vortex_centers"] = arr;
    }
    if (final_state && cfg.problem != ProblemKind::burgers) {
        const auto& v = final_state->v;
        j["probe"] = {{"point", {0.75, 0.75, 0.75}},
                      {"u", sample(v.u, 0.75, 0.75, 0.75)},
                      {"v", sample(v.v, 0.75, 0.75, 0.75)},
                      {"w", sample(v.w, 0.75, 0.75, 0.75)}};
    }
    return j;
}

inline void write_json(const json& j, const std::string& path)
{
    auto os = detail::open_for_write(path);
    os << j.dump(2) << '\n';
    detail::finish(os, path);
}

inline void write_report(const RunReport& r, const ProblemConfig& cfg, const SimState* final_state,
                         const std::string& path)
{
    write_json(report_to_json(r, cfg, final_state), path);
}

inline json read_json(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("'" + path + "': " + e.what());
    }
}

/// Everything needed to reproduce a run.
struct RunManifest {
    std::string subcommand;
    ProblemConfig config;
    std::string output_dir;
    int dump_every = 0;
};

inline json manifest_to_json(const RunManifest& m)
{
    json j;
    j["subcommand"] = m.subcommand;
    j["config"] = config_to_json(m.config);
    j["output_dir"] = m.output_dir;
    j["dump_every"] = m.dump_every;
    j["version"] = kVersion;
    j["seed"] = "none (deterministic)";
    return j;
}

inline RunManifest manifest_from_json(const json& j)
{
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config = config_from_json(j.at("config"));
    m.output_dir = j.at("output_dir").get<std::string>();
    m.dump_every = j.value("dump_every", 0);
    return m;
}

} // namespace scns
