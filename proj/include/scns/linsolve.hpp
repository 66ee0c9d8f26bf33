#pragma once

// Seven-band sparse matrices over the interior nodes of a structured grid
// and an unpreconditioned BiCGSTAB solver for them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "scns/error.hpp"

namespace scns {

/// Matrix with one diagonal and six off-diagonal bands, laid out over an
/// nix x niy x niz block of unknowns (i fastest). Row r couples to r +- 1,
/// r +- nix and r +- nix*niy.
class SparseSevenDiagonal {
public:
    SparseSevenDiagonal() = default;
    SparseSevenDiagonal(int nix, int niy, int niz)
        : nix_(nix), niy_(niy), niz_(niz)
    {
        if (nix < 1 || niy < 1 || niz < 1)
            throw PreconditionError("SparseSevenDiagonal: empty block");
        const std::size_t n = dimension();
        center.assign(n, 0.0);
        west.assign(n, 0.0);
        east.assign(n, 0.0);
        south.assign(n, 0.0);
        north.assign(n, 0.0);
        bottom.assign(n, 0.0);
        top.assign(n, 0.0);
    }

    std::size_t dimension() const noexcept
    {
        return static_cast<std::size_t>(nix_) * niy_ * niz_;
    }
    int nix() const noexcept { return nix_; }
    int niy() const noexcept { return niy_; }
    int niz() const noexcept { return niz_; }

    std::size_t row(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nix_) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(niy_) * k);
    }

    /// Clear band entries that would reference unknowns outside the block.
    void zero_outside()
    {
        for (int k = 0; k < niz_; ++k)
            for (int j = 0; j < niy_; ++j)
                for (int i = 0; i < nix_; ++i) {
                    const std::size_t r = row(i, j, k);
                    if (i == 0) west[r] = 0.0;
                    if (i == nix_ - 1) east[r] = 0.0;
                    if (j == 0) south[r] = 0.0;
                    if (j == niy_ - 1) north[r] = 0.0;
                    if (k == 0) bottom[r] = 0.0;
                    if (k == niz_ - 1) top[r] = 0.0;
                }
    }

    bool bands_consistent() const
    {
        for (int k = 0; k < niz_; ++k)
            for (int j = 0; j < niy_; ++j)
                for (int i = 0; i < nix_; ++i) {
                    const std::size_t r = row(i, j, k);
                    if ((i == 0 && west[r] != 0.0) || (i == nix_ - 1 && east[r] != 0.0) ||
                        (j == 0 && south[r] != 0.0) || (j == niy_ - 1 && north[r] != 0.0) ||
                        (k == 0 && bottom[r] != 0.0) || (k == niz_ - 1 && top[r] != 0.0))
                        return false;
                }
        return true;
    }

    std::vector<double> center, west, east, south, north, bottom, top;

private:
    int nix_ = 0, niy_ = 0, niz_ = 0;
};

inline void matvec(const SparseSevenDiagonal& a, std::span<const double> x, std::span<double> y)
{
    const std::size_t n = a.dimension();
    if (x.size() != n || y.size() != n)
        throw PreconditionError("matvec: dimension mismatch");
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(a.nix());
    const std::size_t sz = sy * static_cast<std::size_t>(a.niy());
    for (std::size_t r = 0; r < n; ++r) {
        double acc = a.center[r] * x[r];
        if (a.west[r] != 0.0) acc += a.west[r] * x[r - sx];
        if (a.east[r] != 0.0) acc += a.east[r] * x[r + sx];
        if (a.south[r] != 0.0) acc += a.south[r] * x[r - sy];
        if (a.north[r] != 0.0) acc += a.north[r] * x[r + sy];
        if (a.bottom[r] != 0.0) acc += a.bottom[r] * x[r - sz];
        if (a.top[r] != 0.0) acc += a.top[r] * x[r + sz];
        y[r] = acc;
    }
}

inline std::vector<double> matvec(const SparseSevenDiagonal& a, std::span<const double> x)
{
    std::vector<double> y(a.dimension());
    matvec(a, x, y);
    return y;
}

struct SolveStats {
    int iterations = 0;
    double final_relative_residual = 0.0;
    bool converged = false;
    bool breakdown = false;
};

struct SolveResult {
    std::vector<double> x;
    SolveStats stats;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a)
{
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace detail

/// Unpreconditioned BiCGSTAB for A x = b starting from x0.
///
/// Converged means the true residual satisfies ||b - A x|| <= rel_tol ||b||.
/// A breakdown (rho or omega numerically zero) triggers one restart from the
/// current iterate; a second breakdown ends the solve with breakdown = true.
/// The rho test is scale-free: |rho| < 1e-30 * ||r_hat|| * ||r||.
/// On failure the iterate with the smallest residual seen is returned.
inline SolveResult bicgstab(const SparseSevenDiagonal& a, std::span<const double> b,
                            std::span<const double> x0, double rel_tol, int max_iter)
{
    constexpr double kTiny = 1e-30;
    const std::size_t n = a.dimension();
    if (b.size() != n || x0.size() != n)
        throw PreconditionError("bicgstab: dimension mismatch");
    if (!(rel_tol > 0.0 && rel_tol < 1.0) || max_iter < 1)
        throw PreconditionError("bicgstab: need 0 < rel_tol < 1 and max_iter >= 1");
    if (!detail::all_finite(b) || !detail::all_finite(x0))
        throw PreconditionError("bicgstab: non-finite input");

    SolveResult out;
    out.x.assign(x0.begin(), x0.end());
    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.stats.converged = true;
        return out;
    }
    const double target = rel_tol * bnorm;

    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n);
    std::vector<double>& x = out.x;
    auto true_residual = [&] {
        matvec(a, x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return detail::norm2(r);
    };

    double rnorm = true_residual();
    std::vector<double> best_x = x;
    double best_norm = rnorm;
    int breakdowns = 0;
    int it = 0;

    while (rnorm > target && it < max_iter) {
        // (Re)start the recurrences from the current iterate; r holds b - A x.
        rhat = r;
        double rho_old = 1.0, alpha = 1.0, omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        const double rhat_norm = detail::norm2(rhat);
        bool restart = false;

        while (it < max_iter) {
            const double rho = detail::dot(rhat, r);
            if (std::abs(rho) < kTiny * rhat_norm * detail::norm2(r)) {
                restart = true;
                break;
            }
            const double beta = (rho / rho_old) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
            matvec(a, p, v);
            const double rv = detail::dot(rhat, v);
            if (std::abs(rv) < kTiny * rhat_norm * detail::norm2(v)) {
                restart = true;
                break;
            }
            alpha = rho / rv;
            ++it;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            if (detail::norm2(s) <= target) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
                break;
            }
            matvec(a, s, t);
            const double tt = detail::dot(t, t);
            omega = tt > 0.0 ? detail::dot(t, s) / tt : 0.0;
            if (std::abs(omega) < kTiny) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
                restart = true;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i] + omega * s[i];
                r[i] = s[i] - omega * t[i];
            }
            const double rn = detail::norm2(r);
            if (rn < best_norm) {
                best_norm = rn;
                best_x = x;
            }
            if (rn <= target) break;
            rho_old = rho;
        }

        rnorm = true_residual();
        if (rnorm < best_norm) {
            best_norm = rnorm;
            best_x = x;
        }
        if (restart && rnorm > target) {
            if (++breakdowns > 1) {
                out.stats.breakdown = true;
                break;
            }
        }
    }

    if (rnorm > target && best_norm < rnorm) {
        x = best_x;
        rnorm = true_residual();
    }
    out.stats.iterations = it;
    out.stats.final_relative_residual = rnorm / bnorm;
    out.stats.converged = rnorm <= target;
    return out;
}

} // namespace scns
