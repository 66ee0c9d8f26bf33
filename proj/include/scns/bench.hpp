#pragma once

// Analytic reference solutions and flow diagnostics: Burgers exact solution,
// error norms, convergence rates, vortex centres and centreline profiles.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "scns/error.hpp"
#include "scns/field.hpp"

namespace scns {

// ---------------------------------------------------------------- Burgers

/// Parameters of the Cole-Hopf type exact solution of the 3D Burgers system.
struct BurgersParams {
    double re = 10.0;
    double c1 = 6.0;
    double c2 = 2.0;
    double nx = 3.0, ny = 3.0, nz = 3.0;

    BurgersParams() = default;
    BurgersParams(double re_, double c1_, double c2_, double nx_, double ny_, double nz_)
        : re(re_), c1(c1_), c2(c2_), nx(nx_), ny(ny_), nz(nz_)
    {
        validate();
    }

    /// |c1| > |c2| keeps the denominator away from zero for every x and t >= 0.
    void validate() const
    {
        if (!(re > 0.0)) throw PreconditionError("BurgersParams: Re must be positive");
        if (!(std::abs(c1) - std::abs(c2) > 1e-12))
            throw PreconditionError("BurgersParams: need |c1| > |c2| for a regular solution");
    }

    double lambda() const noexcept
    {
        return std::numbers::pi * std::numbers::pi * (nx * nx + ny * ny + nz * nz);
    }
};

/// Exact (u, v, w). All three components carry the prefactor nx*pi, which
/// is immaterial for the equal-wavenumber case used in practice.
inline std::array<double, 3> burgers_exact(const BurgersParams& bp, double x, double y, double z,
                                           double t)
{
    if (t < 0.0) throw PreconditionError("burgers_exact: t must be >= 0");
    constexpr double pi = std::numbers::pi;
    const double decay = bp.c2 * std::exp(-bp.lambda() * (t / bp.re));
    const double sx = std::sin(bp.nx * pi * x), sy = std::sin(bp.ny * pi * y),
                 sz = std::sin(bp.nz * pi * z);
    const double denom = bp.c1 + decay * sx * sy * sz;
    if (std::abs(denom) < 1e-12) throw PreconditionError("burgers_exact: singular parameters");
    const double d0 = 1.0 / denom;
    const double pre = -2.0 * d0 / bp.re * decay * bp.nx * pi;
    return {pre * std::cos(bp.nx * pi * x) * sy * sz, pre * std::cos(bp.ny * pi * y) * sx * sz,
            pre * std::cos(bp.nz * pi * z) * sx * sy};
}

inline VectorField burgers_field(const BurgersParams& bp, const GridSpec& g, double t)
{
    VectorField v(g);
    for (int k = 0; k < g.nz(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const auto [x, y, z] = g.coords({i, j, k});
                const auto e = burgers_exact(bp, x, y, z, t);
                v.u(i, j, k) = e[0];
                v.v(i, j, k) = e[1];
                v.w(i, j, k) = e[2];
            }
    return v;
}

// ------------------------------------------------------------ error norms

/// e1: mean |dU|, e2: mean |dU|/|U_ana| over nodes with |U_ana| > 1e-14,
/// e3: RMS(|dU|)/RMS(|U_ana|). |.| is the velocity magnitude. The per-
/// component arrays hold the same three norms for u, v, w separately.
struct ErrorNorms {
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    std::array<double, 3> e1_component{};
    std::array<double, 3> e3_component{};
};

inline ErrorNorms error_norms(const VectorField& num, const VectorField& ana)
{
    if (!num.grid().same_layout(ana.grid()))
        throw GridMismatchError("error_norms: fields on different grids");
    constexpr double kMask = 1e-14;
    const std::size_t count = num.grid().size();

    double sum_abs = 0.0, sum_rel = 0.0, sum_d2 = 0.0, sum_a2 = 0.0;
    std::size_t rel_nodes = 0;
    std::array<double, 3> comp_abs{}, comp_d2{}, comp_a2{};
    for (std::size_t idx = 0; idx < count; ++idx) {
        double d2 = 0.0, a2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Axis ax = kAxes[static_cast<std::size_t>(c)];
            const double a = ana.component(ax).data()[idx];
            const double d = a - num.component(ax).data()[idx];
            d2 += d * d;
            a2 += a * a;
            comp_abs[static_cast<std::size_t>(c)] += std::abs(d);
            comp_d2[static_cast<std::size_t>(c)] += d * d;
            comp_a2[static_cast<std::size_t>(c)] += a * a;
        }
        const double dm = std::sqrt(d2), am = std::sqrt(a2);
        sum_abs += dm;
        sum_d2 += d2;
        sum_a2 += a2;
        if (am > kMask) {
            sum_rel += dm / am;
            ++rel_nodes;
        }
    }
    if (sum_a2 == 0.0)
        throw PreconditionError("error_norms: analytical field is identically zero");

    ErrorNorms e;
    const double n = static_cast<double>(count);
    e.e1 = sum_abs / n;
    // Every node below the mask: the relative error is undefined.
    e.e2 = rel_nodes > 0 ? sum_rel / static_cast<double>(rel_nodes)
                         : std::numeric_limits<double>::quiet_NaN();
    e.e3 = std::sqrt(sum_d2 / sum_a2);
    for (std::size_t c = 0; c < 3; ++c) {
        e.e1_component[c] = comp_abs[c] / n;
        e.e3_component[c] = comp_a2[c] > 0.0 ? std::sqrt(comp_d2[c] / comp_a2[c]) : 0.0;
    }
    return e;
}

/// Observed order between two grids whose spacing differs by a factor 2.
inline double convergence_rate(double err_coarse, double err_fine)
{
    if (!(err_coarse > 0.0) || !(err_fine > 0.0))
        throw PreconditionError("convergence_rate: errors must be positive");
    return std::log2(err_coarse / err_fine);
}

// ------------------------------------------------------------ interpolation

namespace detail {

// Four-point Lagrange weights around coordinate s (in cell units), window
// start chosen so the window stays inside [0, n-1].
inline void lagrange4(double s, int n, int& start, std::array<double, 4>& w)
{
    int base = static_cast<int>(std::floor(s));
    base = std::clamp(base, 0, n - 2);
    start = std::clamp(base - 1, 0, std::max(0, n - 4));
    const int m = std::min(4, n);
    for (int a = 0; a < 4; ++a) w[static_cast<std::size_t>(a)] = 0.0;
    for (int a = 0; a < m; ++a) {
        double l = 1.0;
        for (int b = 0; b < m; ++b)
            if (b != a) l *= (s - (start + b)) / static_cast<double>(a - b);
        w[static_cast<std::size_t>(a)] = l;
    }
}

} // namespace detail

/// Tricubic Lagrange interpolation of `f` at a physical point; exact at
/// grid nodes and for cubic polynomials.
inline double sample(const ScalarField& f, double x, double y, double z)
{
    const GridSpec& g = f.grid();
    const double sx = (x - g.lower(Axis::x)) / g.hx();
    const double sy = (y - g.lower(Axis::y)) / g.hy();
    const double sz = (z - g.lower(Axis::z)) / g.hz();
    constexpr double eps = 1e-9;
    if (sx < -eps || sy < -eps || sz < -eps || sx > g.nx() - 1 + eps || sy > g.ny() - 1 + eps ||
        sz > g.nz() - 1 + eps)
        throw PreconditionError("sample: point outside the grid");
    int i0, j0, k0;
    std::array<double, 4> wx, wy, wz;
    detail::lagrange4(sx, g.nx(), i0, wx);
    detail::lagrange4(sy, g.ny(), j0, wy);
    detail::lagrange4(sz, g.nz(), k0, wz);
    const int mx = std::min(4, g.nx()), my = std::min(4, g.ny()), mz = std::min(4, g.nz());
    double acc = 0.0;
    for (int c = 0; c < mz; ++c)
        for (int b = 0; b < my; ++b)
            for (int a = 0; a < mx; ++a)
                acc += wx[static_cast<std::size_t>(a)] * wy[static_cast<std::size_t>(b)] *
                       wz[static_cast<std::size_t>(c)] * f(i0 + a, j0 + b, k0 + c);
    return acc;
}

// ---------------------------------------------------------------- vortices

struct VortexLocation {
    double x = 0.0;
    double z = 0.0;
    double plane_y = 0.5;
    double vorticity = 0.0; // du/dz - dw/dx at the centre
    double streamfunction = 0.0; // integral of u along z from the floor, at the centre
};

namespace detail {

struct PlaneSlice {
    int nx = 0, nz = 0;
    double hx = 0.0, hz = 0.0, x0 = 0.0, z0 = 0.0;
    std::vector<double> u, w;

    double U(int i, int k) const { return u[static_cast<std::size_t>(i + nx * k)]; }
    double W(int i, int k) const { return w[static_cast<std::size_t>(i + nx * k)]; }
    double s2(int i, int k) const { return U(i, k) * U(i, k) + W(i, k) * W(i, k); }
};

// psi(x, z) = int_{z0}^{z} u dz', trapezoid rule per column.
inline std::vector<double> stream_function(const PlaneSlice& ps)
{
    std::vector<double> psi(ps.u.size(), 0.0);
    for (int k = 1; k < ps.nz; ++k)
        for (int i = 0; i < ps.nx; ++i)
            psi[static_cast<std::size_t>(i + ps.nx * k)] =
                psi[static_cast<std::size_t>(i + ps.nx * (k - 1))] +
                0.5 * ps.hz * (ps.U(i, k) + ps.U(i, k - 1));
    return psi;
}

inline double bilinear(const std::vector<double>& f, const PlaneSlice& ps, double fi, double fk)
{
    const int i0 = std::clamp(static_cast<int>(std::floor(fi)), 0, ps.nx - 2);
    const int k0 = std::clamp(static_cast<int>(std::floor(fk)), 0, ps.nz - 2);
    const double a = fi - i0, b = fk - k0;
    auto F = [&](int i, int k) { return f[static_cast<std::size_t>(i + ps.nx * k)]; };
    return (1 - a) * (1 - b) * F(i0, k0) + a * (1 - b) * F(i0 + 1, k0) +
           (1 - a) * b * F(i0, k0 + 1) + a * b * F(i0 + 1, k0 + 1);
}

inline PlaneSlice slice_y(const VectorField& v, double plane_y)
{
    const GridSpec& g = v.grid();
    const double s = (plane_y - g.lower(Axis::y)) / g.hy();
    if (s < -1e-9 || s > g.ny() - 1 + 1e-9)
        throw PreconditionError("find_primary_vortex: plane outside the grid");
    int j0 = std::clamp(static_cast<int>(std::floor(s)), 0, g.ny() - 2);
    double t = std::clamp(s - j0, 0.0, 1.0);
    if (std::abs(s - std::round(s)) < 1e-9) {
        j0 = static_cast<int>(std::round(s));
        t = 0.0;
    }
    PlaneSlice ps;
    ps.nx = g.nx();
    ps.nz = g.nz();
    ps.hx = g.hx();
    ps.hz = g.hz();
    ps.x0 = g.lower(Axis::x);
    ps.z0 = g.lower(Axis::z);
    ps.u.resize(static_cast<std::size_t>(ps.nx * ps.nz));
    ps.w.resize(ps.u.size());
    for (int k = 0; k < g.nz(); ++k)
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t idx = static_cast<std::size_t>(i + ps.nx * k);
            const double u0 = v.u(i, j0, k), w0 = v.w(i, j0, k);
            const double u1 = t > 0.0 ? v.u(i, j0 + 1, k) : u0;
            const double w1 = t > 0.0 ? v.w(i, j0 + 1, k) : w0;
            ps.u[idx] = (1.0 - t) * u0 + t * u1;
            ps.w[idx] = (1.0 - t) * w0 + t * w1;
        }
    return ps;
}

// Least-squares quadratic through the 3x3 block of speed^2 around (i,k);
// returns the offset of its minimiser in cell units, clamped to [-1,1].
inline std::array<double, 2> quadratic_minimiser(const PlaneSlice& ps, int i, int k)
{
    double S0 = 0, Sx = 0, Sz = 0, Sxx = 0, Szz = 0, Sxz = 0;
    for (int dk = -1; dk <= 1; ++dk)
        for (int di = -1; di <= 1; ++di) {
            const double f = ps.s2(i + di, k + dk);
            S0 += f;
            Sx += f * di;
            Sz += f * dk;
            Sxx += f * di * di;
            Szz += f * dk * dk;
            Sxz += f * di * dk;
        }
    // f ~ a + b dx + c dz + d dx^2 + e dx dz + g dz^2
    const double b = Sx / 6.0, c = Sz / 6.0, e = Sxz / 4.0;
    const double sum_dg = (Sxx + Szz - 4.0 / 3.0 * S0) / 2.0;
    const double diff_dg = (Sxx - Szz) / 2.0;
    const double d = 0.5 * (sum_dg + diff_dg), gq = 0.5 * (sum_dg - diff_dg);
    const double det = 4.0 * d * gq - e * e;
    if (!(d > 0.0) || !(det > 0.0)) return {0.0, 0.0};
    const double ox = (-2.0 * gq * b + e * c) / det;
    const double oz = (-2.0 * d * c + e * b) / det;
    return {std::clamp(ox, -1.0, 1.0), std::clamp(oz, -1.0, 1.0)};
}

} // namespace detail

/// Every elliptic critical point of the in-plane velocity (u, w) on the
/// plane y = plane_y: interior local minima of in-plane speed whose velocity
/// gradient has positive determinant, refined by a quadratic fit.
inline std::vector<VortexLocation> find_vortex_centers(const VectorField& v, double plane_y)
{
    const detail::PlaneSlice ps = detail::slice_y(v, plane_y);
    const auto psi = detail::stream_function(ps);
    std::vector<VortexLocation> out;
    for (int k = 1; k < ps.nz - 1; ++k)
        for (int i = 1; i < ps.nx - 1; ++i) {
            const double s = ps.s2(i, k);
            bool is_min = true;
            for (int dk = -1; dk <= 1 && is_min; ++dk)
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dk == 0) continue;
                    const double nb = ps.s2(i + di, k + dk);
                    // Strict on one half of the neighbours so plateaus yield one node.
                    if (nb < s || (nb == s && (dk < 0 || (dk == 0 && di < 0)))) {
                        is_min = false;
                        break;
                    }
                }
            if (!is_min) continue;
            const double ux = (ps.U(i + 1, k) - ps.U(i - 1, k)) / (2.0 * ps.hx);
            const double uz = (ps.U(i, k + 1) - ps.U(i, k - 1)) / (2.0 * ps.hz);
            const double wx = (ps.W(i + 1, k) - ps.W(i - 1, k)) / (2.0 * ps.hx);
            const double wz = (ps.W(i, k + 1) - ps.W(i, k - 1)) / (2.0 * ps.hz);
            if (!(ux * wz - uz * wx > 0.0)) continue;
            const auto off = detail::quadratic_minimiser(ps, i, k);
            VortexLocation loc;
            loc.x = ps.x0 + (i + off[0]) * ps.hx;
            loc.z = ps.z0 + (k + off[1]) * ps.hz;
            loc.plane_y = plane_y;
            loc.vorticity = uz - wx;
            loc.streamfunction = detail::bilinear(psi, ps, i + off[0], k + off[1]);
            out.push_back(loc);
        }
    return out;
}

/// Centre of the largest recirculation cell on the plane, i.e. the centre
/// with the largest |psi|. Small intense eddies near the lid edges can carry
/// more vorticity than the main cell, so vorticity is not used here.
inline VortexLocation find_primary_vortex(const VectorField& v, double plane_y)
{
    const auto all = find_vortex_centers(v, plane_y);
    if (all.empty())
        throw PreconditionError("find_primary_vortex: no interior vortex on the plane");
    return *std::max_element(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return std::abs(a.streamfunction) < std::abs(b.streamfunction);
    });
}

// --------------------------------------------------------------- profiles

struct ProfileSample {
    double coord = 0.0;
    double u = 0.0, v = 0.0, w = 0.0;
};

struct CenterlineProfiles {
    std::vector<ProfileSample> vertical;   // along z at x = y = mid
    std::vector<ProfileSample> horizontal; // along x at y = z = mid
};

inline CenterlineProfiles centerline_profiles(const VectorField& v)
{
    const GridSpec& g = v.grid();
    const double xm = 0.5 * (g.lower(Axis::x) + g.upper(Axis::x));
    const double ym = 0.5 * (g.lower(Axis::y) + g.upper(Axis::y));
    const double zm = 0.5 * (g.lower(Axis::z) + g.upper(Axis::z));
    CenterlineProfiles prof;
    for (int k = 0; k < g.nz(); ++k) {
        const double z = g.coord(Axis::z, k);
        prof.vertical.push_back({z, sample(v.u, xm, ym, z), sample(v.v, xm, ym, z),
                                 sample(v.w, xm, ym, z)});
    }
    for (int i = 0; i < g.nx(); ++i) {
        const double x = g.coord(Axis::x, i);
        prof.horizontal.push_back({x, sample(v.u, x, ym, zm), sample(v.v, x, ym, zm),
                                   sample(v.w, x, ym, zm)});
    }
    return prof;
}

} // namespace scns
