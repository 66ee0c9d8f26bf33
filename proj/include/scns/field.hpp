#pragma once

// Structured-grid containers and the central / one-sided difference
// operators that the rest of the library is built from.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "scns/error.hpp"

namespace scns {

enum class Axis { x = 0, y = 1, z = 2 };
enum class DeltaOrder { first, second };

/// Node index triple. Components are signed so that neighbour arithmetic
/// (i - 1) never wraps.
struct Index3 {
    int i = 0;
    int j = 0;
    int k = 0;

    friend bool operator==(const Index3&, const Index3&) = default;

    int operator[](Axis a) const
    {
        return a == Axis::x ? i : (a == Axis::y ? j : k);
    }
};

/// Uniform 3D grid geometry plus the time step.
class GridSpec {
public:
    GridSpec() : GridSpec(3, 3, 3) {}

    GridSpec(int nx, int ny, int nz, double dt = 1.0,
             std::array<double, 6> bounds = {0.0, 1.0, 0.0, 1.0, 0.0, 1.0})
        : n_{nx, ny, nz}, lo_{bounds[0], bounds[2], bounds[4]},
          hi_{bounds[1], bounds[3], bounds[5]}, dt_(dt)
    {
        for (int a = 0; a < 3; ++a) {
            if (n_[a] < 3)
                throw PreconditionError("GridSpec: every axis needs at least 3 nodes");
            if (!(hi_[a] > lo_[a]))
                throw PreconditionError("GridSpec: upper bound must exceed lower bound");
            spacing_[a] = (hi_[a] - lo_[a]) / static_cast<double>(n_[a] - 1);
        }
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw PreconditionError("GridSpec: time step must be positive");
    }

    /// Cubic grid with n^3 nodes on the unit cube.
    static GridSpec cube(int n, double dt = 1.0) { return GridSpec(n, n, n, dt); }

    int nx() const noexcept { return n_[0]; }
    int ny() const noexcept { return n_[1]; }
    int nz() const noexcept { return n_[2]; }
    int count(Axis a) const noexcept { return n_[static_cast<int>(a)]; }

    double hx() const noexcept { return spacing_[0]; }
    double hy() const noexcept { return spacing_[1]; }
    double hz() const noexcept { return spacing_[2]; }
    double spacing(Axis a) const noexcept { return spacing_[static_cast<int>(a)]; }

    double lower(Axis a) const noexcept { return lo_[static_cast<int>(a)]; }
    double upper(Axis a) const noexcept { return hi_[static_cast<int>(a)]; }

    double dt() const noexcept { return dt_; }
    GridSpec with_dt(double dt) const
    {
        return GridSpec(n_[0], n_[1], n_[2], dt, {lo_[0], hi_[0], lo_[1], hi_[1], lo_[2], hi_[2]});
    }

    std::size_t size() const noexcept
    {
        return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
    }

    // i fastest, then j, then k.
    std::size_t flatten(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(n_[0]) * (static_cast<std::size_t>(j) +
                                                  static_cast<std::size_t>(n_[1]) * k);
    }
    std::size_t flatten(Index3 n) const noexcept { return flatten(n.i, n.j, n.k); }

    Index3 unflatten(std::size_t idx) const noexcept
    {
        const auto nx = static_cast<std::size_t>(n_[0]);
        const auto ny = static_cast<std::size_t>(n_[1]);
        return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
                static_cast<int>(idx / (nx * ny))};
    }

    double coord(Axis a, int index) const noexcept
    {
        const int ai = static_cast<int>(a);
        return lo_[ai] + index * spacing_[ai];
    }
    std::array<double, 3> coords(Index3 n) const noexcept
    {
        return {coord(Axis::x, n.i), coord(Axis::y, n.j), coord(Axis::z, n.k)};
    }

    bool is_boundary(Index3 n) const noexcept
    {
        return n.i == 0 || n.j == 0 || n.k == 0 || n.i == n_[0] - 1 || n.j == n_[1] - 1 ||
               n.k == n_[2] - 1;
    }
    bool is_interior(Index3 n, Axis a) const noexcept
    {
        const int v = n[a];
        return v >= 1 && v <= count(a) - 2;
    }
    bool contains(Index3 n) const noexcept
    {
        return n.i >= 0 && n.j >= 0 && n.k >= 0 && n.i < n_[0] && n.j < n_[1] && n.k < n_[2];
    }

    /// Same node layout and geometry; the time step is not compared.
    bool same_layout(const GridSpec& o) const noexcept
    {
        return n_ == o.n_ && lo_ == o.lo_ && hi_ == o.hi_;
    }

private:
    std::array<int, 3> n_;
    std::array<double, 3> lo_;
    std::array<double, 3> hi_;
    std::array<double, 3> spacing_{};
    double dt_;
};

/// Node-indexed real field on a GridSpec.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double value = 0.0)
        : grid_(g), data_(g.size(), value) {}

    template <class Fn>
    static ScalarField from_function(const GridSpec& g, Fn&& fn)
    {
        ScalarField f(g);
        for (int k = 0; k < g.nz(); ++k)
            for (int j = 0; j < g.ny(); ++j)
                for (int i = 0; i < g.nx(); ++i)
                    f(i, j, k) = fn(g.coord(Axis::x, i), g.coord(Axis::y, j), g.coord(Axis::z, k));
        return f;
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(int i, int j, int k) noexcept { return data_[grid_.flatten(i, j, k)]; }
    double operator()(int i, int j, int k) const noexcept { return data_[grid_.flatten(i, j, k)]; }
    double& operator()(Index3 n) noexcept { return data_[grid_.flatten(n)]; }
    double operator()(Index3 n) const noexcept { return data_[grid_.flatten(n)]; }

    /// Value at an offset from a node along one axis.
    double shifted(Index3 n, Axis a, int offset) const noexcept
    {
        switch (a) {
        case Axis::x: n.i += offset; break;
        case Axis::y: n.j += offset; break;
        case Axis::z: n.k += offset; break;
        }
        return (*this)(n);
    }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool all_finite() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    ScalarField& operator+=(double c)
    {
        for (auto& v : data_) v += c;
        return *this;
    }

private:
    GridSpec grid_;
    std::vector<double> data_;
};

/// Velocity-like triple of scalar fields on one grid.
struct VectorField {
    ScalarField u, v, w;

    VectorField() = default;
    explicit VectorField(const GridSpec& g) : u(g), v(g), w(g) {}
    VectorField(ScalarField u_, ScalarField v_, ScalarField w_)
        : u(std::move(u_)), v(std::move(v_)), w(std::move(w_))
    {
        if (!u.grid().same_layout(v.grid()) || !u.grid().same_layout(w.grid()))
            throw GridMismatchError("VectorField: components on different grids");
    }

    const GridSpec& grid() const noexcept { return u.grid(); }

    ScalarField& component(Axis a) noexcept
    {
        return a == Axis::x ? u : (a == Axis::y ? v : w);
    }
    const ScalarField& component(Axis a) const noexcept
    {
        return a == Axis::x ? u : (a == Axis::y ? v : w);
    }
};

inline constexpr std::array<Axis, 3> kAxes{Axis::x, Axis::y, Axis::z};

/// Central difference of `field` at `node` along `axis`:
/// first order (f+ - f-)/(2h), second order (f+ - 2f + f-)/h^2.
inline double apply_delta(const ScalarField& field, Axis axis, DeltaOrder order, Index3 node)
{
    const GridSpec& g = field.grid();
    if (!g.contains(node) || !g.is_interior(node, axis))
        throw PreconditionError("apply_delta: node is on the boundary along the requested axis");
    const double h = g.spacing(axis);
    const double fp = field.shifted(node, axis, +1);
    const double fm = field.shifted(node, axis, -1);
    if (order == DeltaOrder::first) return (fp - fm) / (2.0 * h);
    return (fp - 2.0 * field(node) + fm) / (h * h);
}

/// First derivative along `axis`: central in the interior, three-point
/// one-sided at the two faces. Exact for quadratics.
inline double first_derivative(const ScalarField& f, Axis axis, Index3 n)
{
    const GridSpec& g = f.grid();
    const double h = g.spacing(axis);
    const int idx = n[axis];
    const int last = g.count(axis) - 1;
    if (idx == 0)
        return (-3.0 * f(n) + 4.0 * f.shifted(n, axis, 1) - f.shifted(n, axis, 2)) / (2.0 * h);
    if (idx == last)
        return (3.0 * f(n) - 4.0 * f.shifted(n, axis, -1) + f.shifted(n, axis, -2)) / (2.0 * h);
    return (f.shifted(n, axis, 1) - f.shifted(n, axis, -1)) / (2.0 * h);
}

inline ScalarField divergence(const VectorField& v)
{
    const GridSpec& g = v.grid();
    if (!g.same_layout(v.v.grid()) || !g.same_layout(v.w.grid()))
        throw GridMismatchError("divergence: components on different grids");
    ScalarField d(g);
    for (int k = 0; k < g.nz(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const Index3 n{i, j, k};
                d(n) = first_derivative(v.u, Axis::x, n) + first_derivative(v.v, Axis::y, n) +
                       first_derivative(v.w, Axis::z, n);
            }
    return d;
}

inline VectorField pressure_gradient(const ScalarField& pr)
{
    const GridSpec& g = pr.grid();
    if (g.nx() < 3 || g.ny() < 3 || g.nz() < 3)
        throw PreconditionError("pressure_gradient: need at least 3 nodes per axis");
    VectorField grad(g);
    for (int k = 0; k < g.nz(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const Index3 n{i, j, k};
                grad.u(n) = first_derivative(pr, Axis::x, n);
                grad.v(n) = first_derivative(pr, Axis::y, n);
                grad.w(n) = first_derivative(pr, Axis::z, n);
            }
    return grad;
}

enum class Reduction { max_abs, mean_abs, rms };

/// Serial, fixed-order reduction over all nodes.
inline double reduce(const ScalarField& field, Reduction kind)
{
    const auto& d = field.data();
    if (d.empty()) throw PreconditionError("reduce: empty field");
    double acc = 0.0;
    switch (kind) {
    case Reduction::max_abs:
        for (double x : d) acc = std::max(acc, std::abs(x));
        return acc;
    case Reduction::mean_abs:
        for (double x : d) acc += std::abs(x);
        return acc / static_cast<double>(d.size());
    case Reduction::rms:
        for (double x : d) acc += x * x;
        return std::sqrt(acc / static_cast<double>(d.size()));
    }
    return acc;
}

/// max |f| over nodes that are interior in all three axes.
inline double interior_max_abs(const ScalarField& f)
{
    const GridSpec& g = f.grid();
    double m = 0.0;
    for (int k = 1; k < g.nz() - 1; ++k)
        for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i) m = std::max(m, std::abs(f(i, j, k)));
    return m;
}

} // namespace scns
