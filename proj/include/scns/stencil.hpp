#pragma once

// Super-compact (19,7) discretisation of the unsteady convection-diffusion-
// reaction equation
//
//     m U_t + n U_x + o U_y + p U_z + q U = lap(U) + r
//
// The unknown level t^{n+1} couples only the node and its six face
// neighbours; the known level t^n uses the node, six faces and twelve edges.
// The resulting scheme is O(dt^2, h^4, k^4, l^4).

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "scns/error.hpp"
#include "scns/field.hpp"
#include "scns/linsolve.hpp"

namespace scns {

/// Equation coefficients at the current level t^n and the previous level
/// t^{n-1}. The previous level feeds the backward time differences that
/// appear inside A, B, C, D and R.
struct CoefficientFields {
    double m = 1.0;
    ScalarField n, o, p, q, r;
    ScalarField n_prev, o_prev, p_prev, q_prev, r_prev;

    /// Previous level equal to the current one (backward differences vanish).
    static CoefficientFields frozen(double m, ScalarField n, ScalarField o, ScalarField p,
                                    ScalarField q, ScalarField r)
    {
        CoefficientFields cf;
        cf.m = m;
        cf.n_prev = n;
        cf.o_prev = o;
        cf.p_prev = p;
        cf.q_prev = q;
        cf.r_prev = r;
        cf.n = std::move(n);
        cf.o = std::move(o);
        cf.p = std::move(p);
        cf.q = std::move(q);
        cf.r = std::move(r);
        return cf;
    }

    /// All-zero convection, reaction and forcing on `g`.
    static CoefficientFields zero(const GridSpec& g, double m = 1.0)
    {
        const ScalarField z(g);
        return frozen(m, z, z, z, z, z);
    }

    void check(const GridSpec& g) const
    {
        for (const ScalarField* f : {&n, &o, &p, &q, &r, &n_prev, &o_prev, &p_prev, &q_prev, &r_prev})
            if (!f->grid().same_layout(g))
                throw GridMismatchError("CoefficientFields: field not on the system grid");
        if (!(m > 0.0) || !std::isfinite(m))
            throw PreconditionError("CoefficientFields: m must be positive");
    }
};

/// The eleven per-node scheme coefficients.
struct NodeCoefficients {
    double alpha = 1.0, beta = 1.0, gamma = 1.0;
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, R = 0.0;
    double p1 = 0.0, q1 = 0.0, r1 = 0.0;
};

namespace detail {

inline double d1(const ScalarField& f, Axis a, Index3 n)
{
    return apply_delta(f, a, DeltaOrder::first, n);
}
inline double d2(const ScalarField& f, Axis a, Index3 n)
{
    return apply_delta(f, a, DeltaOrder::second, n);
}

} // namespace detail

/// The operator
///   [h^2/12 (dxx - n dx) + k^2/12 (dyy - o dy) + l^2/12 (dzz - p dz) + dt/2 dt^- + 1]
/// applied to a coefficient field g (with g_prev its value one step back).
inline double apply_coefficient_bracket(const CoefficientFields& cf, const GridSpec& grid,
                                        const ScalarField& g, const ScalarField& g_prev,
                                        Index3 node)
{
    using detail::d1;
    using detail::d2;
    const double h2 = grid.hx() * grid.hx() / 12.0;
    const double k2 = grid.hy() * grid.hy() / 12.0;
    const double l2 = grid.hz() * grid.hz() / 12.0;
    const double gn = g(node);
    // dt/2 * (g^n - g^{n-1}) / dt
    const double time_term = 0.5 * (gn - g_prev(node));
    return h2 * (d2(g, Axis::x, node) - cf.n(node) * d1(g, Axis::x, node)) +
           k2 * (d2(g, Axis::y, node) - cf.o(node) * d1(g, Axis::y, node)) +
           l2 * (d2(g, Axis::z, node) - cf.p(node) * d1(g, Axis::z, node)) + time_term + gn;
}

inline NodeCoefficients node_coefficients(const CoefficientFields& cf, const GridSpec& grid,
                                          Index3 node)
{
    using detail::d1;
    if (!grid.contains(node) || grid.is_boundary(node))
        throw PreconditionError("node_coefficients: node must be interior in all axes");

    const double h2 = grid.hx() * grid.hx();
    const double k2 = grid.hy() * grid.hy();
    const double l2 = grid.hz() * grid.hz();
    const double n = cf.n(node), o = cf.o(node), p = cf.p(node), q = cf.q(node);

    NodeCoefficients c;
    c.alpha = h2 / 12.0 * (n * n - q - 2.0 * d1(cf.n, Axis::x, node)) + 1.0;
    c.beta = k2 / 12.0 * (o * o - q - 2.0 * d1(cf.o, Axis::y, node)) + 1.0;
    c.gamma = l2 / 12.0 * (p * p - q - 2.0 * d1(cf.p, Axis::z, node)) + 1.0;

    c.A = apply_coefficient_bracket(cf, grid, cf.n, cf.n_prev, node) -
          h2 / 12.0 * (n * q - 2.0 * d1(cf.q, Axis::x, node));
    c.B = apply_coefficient_bracket(cf, grid, cf.o, cf.o_prev, node) -
          k2 / 12.0 * (o * q - 2.0 * d1(cf.q, Axis::y, node));
    c.C = apply_coefficient_bracket(cf, grid, cf.p, cf.p_prev, node) -
          l2 / 12.0 * (p * q - 2.0 * d1(cf.q, Axis::z, node));
    c.D = apply_coefficient_bracket(cf, grid, cf.q, cf.q_prev, node);
    c.R = apply_coefficient_bracket(cf, grid, cf.r, cf.r_prev, node);

    c.p1 = -n * o + 2.0 / (h2 + k2) * (k2 * d1(cf.n, Axis::y, node) + h2 * d1(cf.o, Axis::x, node));
    c.q1 = -o * p + 2.0 / (k2 + l2) * (l2 * d1(cf.o, Axis::z, node) + k2 * d1(cf.p, Axis::y, node));
    c.r1 = -p * n + 2.0 / (l2 + h2) * (h2 * d1(cf.p, Axis::x, node) + l2 * d1(cf.n, Axis::z, node));
    return c;
}

/// Implicit slot order.
enum ImplicitSlot : int { kCenter = 0, kWest, kEast, kSouth, kNorth, kBottom, kTop };

/// Offset (di, dj, dk) in {-1,0,1}^3 to an index in the 3x3x3 explicit box.
constexpr int box_index(int di, int dj, int dk) noexcept
{
    return (di + 1) + 3 * (dj + 1) + 9 * (dk + 1);
}

constexpr bool is_corner_offset(int di, int dj, int dk) noexcept
{
    return di != 0 && dj != 0 && dk != 0;
}

/// Per-interior-node weights of the assembled scheme, unscaled:
///   sum implicit * U^{n+1} = sum explicit * U^n + forcing
/// Nodes are ordered like the rows of SparseSevenDiagonal over the interior.
struct StencilWeights {
    int nix = 0, niy = 0, niz = 0;
    std::vector<std::array<double, 7>> implicit;
    std::vector<std::array<double, 27>> explicit_box;
    std::vector<double> forcing;

    std::size_t size() const noexcept { return implicit.size(); }
};

namespace detail {

using Stencil1D = std::array<double, 3>;

struct AxisStencils {
    Stencil1D id, first, second;
};

inline AxisStencils axis_stencils(double h)
{
    return {{0.0, 1.0, 0.0},
            {-0.5 / h, 0.0, 0.5 / h},
            {1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)}};
}

// box += coef * X(a) Y(b) Z(c)
inline void add_product(std::array<double, 27>& box, double coef, const Stencil1D& x,
                        const Stencil1D& y, const Stencil1D& z)
{
    if (coef == 0.0) return;
    for (int c = 0; c < 3; ++c) {
        if (z[c] == 0.0) continue;
        for (int b = 0; b < 3; ++b) {
            if (y[b] == 0.0) continue;
            const double yz = coef * y[b] * z[c];
            for (int a = 0; a < 3; ++a) box[a + 3 * b + 9 * c] += yz * x[a];
        }
    }
}

} // namespace detail

/// Weights of the bracket operator that multiplies the time increment,
///   1 + (h^2/12 - dt/2m)(dxx - n dx) + (k^2/12 - dt/2m)(dyy - o dy)
///     + (l^2/12 - dt/2m)(dzz - p dz) + dt/(2m) q,
/// already multiplied by m/dt.
inline std::array<double, 7> implicit_weights(double m, double dt, const GridSpec& g, double n,
                                              double o, double p, double q)
{
    const double h = g.hx(), k = g.hy(), l = g.hz();
    const double s = m / dt;
    const double ax = h * h / 12.0 - dt / (2.0 * m);
    const double ay = k * k / 12.0 - dt / (2.0 * m);
    const double az = l * l / 12.0 - dt / (2.0 * m);
    std::array<double, 7> w{};
    w[kCenter] = s * (1.0 - 2.0 * ax / (h * h) - 2.0 * ay / (k * k) - 2.0 * az / (l * l) +
                      dt / (2.0 * m) * q);
    w[kWest] = s * ax * (1.0 / (h * h) + n / (2.0 * h));
    w[kEast] = s * ax * (1.0 / (h * h) - n / (2.0 * h));
    w[kSouth] = s * ay * (1.0 / (k * k) + o / (2.0 * k));
    w[kNorth] = s * ay * (1.0 / (k * k) - o / (2.0 * k));
    w[kBottom] = s * az * (1.0 / (l * l) + p / (2.0 * l));
    w[kTop] = s * az * (1.0 / (l * l) - p / (2.0 * l));
    return w;
}

/// Explicit 19-point weights on U^n at one node: (m/dt)*bracket minus the
/// spatial operator of the scheme, including the edge-coupling cross terms.
inline std::array<double, 27> explicit_weights(const GridSpec& g,
                                               const std::array<double, 7>& implicit, double n,
                                               double o, double p, const NodeCoefficients& c)
{
    using detail::add_product;
    const auto X = detail::axis_stencils(g.hx());
    const auto Y = detail::axis_stencils(g.hy());
    const auto Z = detail::axis_stencils(g.hz());
    const double h2 = g.hx() * g.hx(), k2 = g.hy() * g.hy(), l2 = g.hz() * g.hz();
    const double cxy = (h2 + k2) / 12.0;
    const double cyz = (k2 + l2) / 12.0;
    const double czx = (l2 + h2) / 12.0;

    std::array<double, 27> box{};
    box[box_index(0, 0, 0)] += implicit[kCenter];
    box[box_index(-1, 0, 0)] += implicit[kWest];
    box[box_index(1, 0, 0)] += implicit[kEast];
    box[box_index(0, -1, 0)] += implicit[kSouth];
    box[box_index(0, 1, 0)] += implicit[kNorth];
    box[box_index(0, 0, -1)] += implicit[kBottom];
    box[box_index(0, 0, 1)] += implicit[kTop];

    // -(-alpha dxx - beta dyy - gamma dzz + A dx + B dy + C dz + D)
    add_product(box, c.alpha, X.second, Y.id, Z.id);
    add_product(box, c.beta, X.id, Y.second, Z.id);
    add_product(box, c.gamma, X.id, Y.id, Z.second);
    add_product(box, -c.A, X.first, Y.id, Z.id);
    add_product(box, -c.B, X.id, Y.first, Z.id);
    add_product(box, -c.C, X.id, Y.id, Z.first);
    add_product(box, -c.D, X.id, Y.id, Z.id);

    // +(h^2+k^2)/12 (dxx dyy - n dx dyy - o dxx dy - p1 dx dy)
    add_product(box, cxy, X.second, Y.second, Z.id);
    add_product(box, -cxy * n, X.first, Y.second, Z.id);
    add_product(box, -cxy * o, X.second, Y.first, Z.id);
    add_product(box, -cxy * c.p1, X.first, Y.first, Z.id);

    // +(k^2+l^2)/12 (dyy dzz - o dy dzz - p dyy dz - q1 dy dz)
    add_product(box, cyz, X.id, Y.second, Z.second);
    add_product(box, -cyz * o, X.id, Y.first, Z.second);
    add_product(box, -cyz * p, X.id, Y.second, Z.first);
    add_product(box, -cyz * c.q1, X.id, Y.first, Z.first);

    // +(l^2+h^2)/12 (dzz dxx - p dz dxx - n dzz dx - r1 dz dx)
    add_product(box, czx, X.second, Y.id, Z.second);
    add_product(box, -czx * p, X.second, Y.id, Z.first);
    add_product(box, -czx * n, X.first, Y.id, Z.second);
    add_product(box, -czx * c.r1, X.first, Y.id, Z.first);
    return box;
}

inline StencilWeights build_stencil_weights(const CoefficientFields& cf, const GridSpec& grid)
{
    cf.check(grid);
    const double dt = grid.dt();
    StencilWeights sw;
    sw.nix = grid.nx() - 2;
    sw.niy = grid.ny() - 2;
    sw.niz = grid.nz() - 2;
    const std::size_t count = static_cast<std::size_t>(sw.nix) * sw.niy * sw.niz;
    sw.implicit.resize(count);
    sw.explicit_box.resize(count);
    sw.forcing.resize(count);

    std::size_t row = 0;
    for (int k = 1; k < grid.nz() - 1; ++k)
        for (int j = 1; j < grid.ny() - 1; ++j)
            for (int i = 1; i < grid.nx() - 1; ++i, ++row) {
                const Index3 node{i, j, k};
                const double n = cf.n(node), o = cf.o(node), p = cf.p(node), q = cf.q(node);
                const NodeCoefficients c = node_coefficients(cf, grid, node);
                sw.implicit[row] = implicit_weights(cf.m, dt, grid, n, o, p, q);
                sw.explicit_box[row] = explicit_weights(grid, sw.implicit[row], n, o, p, c);
                sw.forcing[row] = c.R;
            }
    return sw;
}

/// True iff every node's explicit box has zero corner weights and all
/// weights are finite (the 7-point / 19-point shape).
inline bool verify_stencil_shape(const StencilWeights& sw)
{
    if (sw.explicit_box.size() != sw.implicit.size()) return false;
    for (std::size_t r = 0; r < sw.size(); ++r) {
        for (double w : sw.implicit[r])
            if (!std::isfinite(w)) return false;
        for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const double w = sw.explicit_box[r][box_index(di, dj, dk)];
                    if (!std::isfinite(w)) return false;
                    if (is_corner_offset(di, dj, dk) && w != 0.0) return false;
                }
    }
    return true;
}

/// Row-scaled linear system over interior nodes. `row_scale` holds the
/// original diagonal; multiplying a scaled row by it recovers the unscaled
/// equation. `explicit_rhs` is the unscaled right side without forcing.
struct LinearSystem {
    SparseSevenDiagonal matrix;
    std::vector<double> rhs;
    std::vector<double> row_scale;
    std::vector<double> explicit_rhs;

    /// Rebuild rhs from explicit_rhs plus a new unscaled forcing vector.
    void set_forcing(const std::vector<double>& forcing)
    {
        if (forcing.size() != explicit_rhs.size())
            throw PreconditionError("LinearSystem: forcing size mismatch");
        for (std::size_t r = 0; r < rhs.size(); ++r)
            rhs[r] = (explicit_rhs[r] + forcing[r]) / row_scale[r];
    }
};

/// Turn stencil weights into a linear system for the interior values of
/// U^{n+1}. `boundary` supplies U^{n+1} on boundary nodes (interior values
/// are ignored); known boundary values are moved to the right-hand side.
inline LinearSystem assemble_system(const StencilWeights& sw, const ScalarField& u_n,
                                    const ScalarField& boundary)
{
    const GridSpec& g = u_n.grid();
    if (!g.same_layout(boundary.grid()))
        throw GridMismatchError("assemble_system: boundary data on a different grid");
    if (sw.nix != g.nx() - 2 || sw.niy != g.ny() - 2 || sw.niz != g.nz() - 2)
        throw GridMismatchError("assemble_system: weights built for a different grid");

    LinearSystem sys;
    sys.matrix = SparseSevenDiagonal(sw.nix, sw.niy, sw.niz);
    const std::size_t count = sw.size();
    sys.rhs.resize(count);
    sys.row_scale.resize(count);
    sys.explicit_rhs.resize(count);
    auto& A = sys.matrix;

    std::size_t row = 0;
    for (int k = 1; k < g.nz() - 1; ++k)
        for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i, ++row) {
                const auto& box = sw.explicit_box[row];
                double e = 0.0;
                for (int dk = -1; dk <= 1; ++dk)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int di = -1; di <= 1; ++di) {
                            const double w = box[box_index(di, dj, dk)];
                            if (w != 0.0) e += w * u_n(i + di, j + dj, k + dk);
                        }

                const auto& w = sw.implicit[row];
                double known = 0.0;
                auto place = [&](double weight, int ni, int nj, int nk, std::vector<double>& band) {
                    if (g.is_boundary({ni, nj, nk})) {
                        known += weight * boundary(ni, nj, nk);
                        band[row] = 0.0;
                    } else {
                        band[row] = weight;
                    }
                };
                place(w[kWest], i - 1, j, k, A.west);
                place(w[kEast], i + 1, j, k, A.east);
                place(w[kSouth], i, j - 1, k, A.south);
                place(w[kNorth], i, j + 1, k, A.north);
                place(w[kBottom], i, j, k - 1, A.bottom);
                place(w[kTop], i, j, k + 1, A.top);

                const double diag = w[kCenter];
                if (diag == 0.0 || !std::isfinite(diag))
                    throw PreconditionError("assemble_system: singular diagonal");
                sys.explicit_rhs[row] = e - known;
                sys.row_scale[row] = diag;
                const double inv = 1.0 / diag;
                A.center[row] = 1.0;
                A.west[row] *= inv;
                A.east[row] *= inv;
                A.south[row] *= inv;
                A.north[row] *= inv;
                A.bottom[row] *= inv;
                A.top[row] *= inv;
            }
    sys.set_forcing(sw.forcing);
    return sys;
}

inline LinearSystem assemble_system(const CoefficientFields& cf, const ScalarField& u_n,
                                    const GridSpec& grid, const ScalarField& boundary)
{
    if (!u_n.grid().same_layout(grid))
        throw GridMismatchError("assemble_system: U^n on a different grid");
    return assemble_system(build_stencil_weights(cf, grid), u_n, boundary);
}

/// Forcing R over the interior for a forcing field r (r_prev one step back),
/// with convection coefficients taken from `cf`.
inline std::vector<double> forcing_vector(const CoefficientFields& cf, const GridSpec& grid,
                                          const ScalarField& r, const ScalarField& r_prev)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(grid.nx() - 2) * (grid.ny() - 2) * (grid.nz() - 2));
    for (int k = 1; k < grid.nz() - 1; ++k)
        for (int j = 1; j < grid.ny() - 1; ++j)
            for (int i = 1; i < grid.nx() - 1; ++i)
                out.push_back(apply_coefficient_bracket(cf, grid, r, r_prev, {i, j, k}));
    return out;
}

/// Scatter interior solution values back into a full field whose boundary
/// nodes are taken from `boundary`.
inline ScalarField scatter_interior(const std::vector<double>& x, const ScalarField& boundary)
{
    ScalarField out = boundary;
    const GridSpec& g = boundary.grid();
    std::size_t row = 0;
    for (int k = 1; k < g.nz() - 1; ++k)
        for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i) out(i, j, k) = x[row++];
    return out;
}

/// Interior values of a field in system row order.
inline std::vector<double> gather_interior(const ScalarField& f)
{
    const GridSpec& g = f.grid();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.nx() - 2) * (g.ny() - 2) * (g.nz() - 2));
    for (int k = 1; k < g.nz() - 1; ++k)
        for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i) out.push_back(f(i, j, k));
    return out;
}

} // namespace scns
