#pragma once

// Modified-compressibility pressure iteration, with and without Gaussian
// smoothing of the pressure inside each correction:
//
//     baseline:  p_new = p_old - lambda * div(v)
//     filtered:  p_new = G * p_old - lambda * div(v)
//
// followed by a zero-normal-gradient closure on the boundary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "scns/error.hpp"
#include "scns/field.hpp"

namespace scns {

struct PressureConfig {
    double lambda = 0.06;
    double tol = 1e-3;
    bool filter_enabled = true;
    int kernel_radius = 1;
    double kernel_sigma = 1.0; // in grid spacings
    int max_pressure_iters = 1000;

    void validate() const
    {
        if (!(lambda > 0.0)) throw PreconditionError("PressureConfig: lambda must be positive");
        if (!(tol > 0.0)) throw PreconditionError("PressureConfig: tol must be positive");
        if (kernel_radius < 1) throw PreconditionError("PressureConfig: kernel_radius must be >= 1");
        if (!(kernel_sigma > 0.0))
            throw PreconditionError("PressureConfig: kernel_sigma must be positive");
        if (max_pressure_iters < 0)
            throw PreconditionError("PressureConfig: max_pressure_iters must be >= 0");
    }
};

/// Separable 1D Gaussian weights for offsets -radius..radius.
struct GaussianKernel {
    int radius = 1;
    std::vector<double> weights;

    double at(int offset) const { return weights[static_cast<std::size_t>(offset + radius)]; }
};

inline GaussianKernel build_kernel(int radius, double sigma)
{
    if (radius < 1) throw PreconditionError("build_kernel: radius must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw PreconditionError("build_kernel: sigma must be positive");
    GaussianKernel kern;
    kern.radius = radius;
    kern.weights.resize(static_cast<std::size_t>(2 * radius + 1));
    for (int d = -radius; d <= radius; ++d)
        kern.weights[static_cast<std::size_t>(d + radius)] =
            std::exp(-static_cast<double>(d * d) / (2.0 * sigma * sigma));
    // Sum from the tails inward so that symmetric pairs are added together.
    double sum = kern.weights[static_cast<std::size_t>(radius)];
    for (int d = radius; d >= 1; --d)
        sum += kern.weights[static_cast<std::size_t>(radius - d)] +
               kern.weights[static_cast<std::size_t>(radius + d)];
    for (double& w : kern.weights) w /= sum;
    return kern;
}

namespace detail {

inline void convolve_axis(const ScalarField& in, ScalarField& out, const GaussianKernel& kern,
                          Axis axis)
{
    const GridSpec& g = in.grid();
    const int last = g.count(axis) - 1;
    for (int k = 0; k < g.nz(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const Index3 n{i, j, k};
                const int pos = n[axis];
                double acc = 0.0;
                for (int d = -kern.radius; d <= kern.radius; ++d) {
                    const int q = std::clamp(pos + d, 0, last);
                    acc += kern.at(d) * in.shifted(n, axis, q - pos);
                }
                out(n) = acc;
            }
}

} // namespace detail

/// Separable convolution x, then y, then z, with edge replication.
inline ScalarField gaussian_filter(const ScalarField& pr, const GaussianKernel& kern)
{
    if (kern.weights.size() != static_cast<std::size_t>(2 * kern.radius + 1))
        throw PreconditionError("gaussian_filter: malformed kernel");
    ScalarField a(pr.grid());
    ScalarField b(pr.grid());
    detail::convolve_axis(pr, a, kern, Axis::x);
    detail::convolve_axis(a, b, kern, Axis::y);
    detail::convolve_axis(b, a, kern, Axis::z);
    return a;
}

/// Copy each boundary value from the nearest node that is interior in
/// every axis (discrete zero normal derivative).
inline void apply_pressure_neumann(ScalarField& pr)
{
    const GridSpec& g = pr.grid();
    for (int k = 0; k < g.nz(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                if (!g.is_boundary({i, j, k})) continue;
                pr(i, j, k) = pr(std::clamp(i, 1, g.nx() - 2), std::clamp(j, 1, g.ny() - 2),
                                 std::clamp(k, 1, g.nz() - 2));
            }
}

inline ScalarField correct_pressure(const ScalarField& pr, const ScalarField& div_v,
                                    const PressureConfig& cfg)
{
    if (!pr.grid().same_layout(div_v.grid()))
        throw GridMismatchError("correct_pressure: fields on different grids");
    ScalarField out = cfg.filter_enabled
                          ? gaussian_filter(pr, build_kernel(cfg.kernel_radius, cfg.kernel_sigma))
                          : pr;
    auto& o = out.data();
    const auto& d = div_v.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= cfg.lambda * d[i];
    apply_pressure_neumann(out);
    return out;
}

struct PressureLoopResult {
    ScalarField pr;
    VectorField v;
    int iterations = 0;                 // corrections applied
    std::vector<double> div_history;    // interior |div v|_max after every momentum solve
};

/// Momentum re-solve for a given pressure.
using MomentumSolve = std::function<VectorField(const ScalarField&)>;

/// Iterate momentum solve -> divergence check -> pressure correction until
/// the interior |div v|_max drops to cfg.tol. Throws NonConvergenceError
/// carrying the divergence history when max_pressure_iters corrections did
/// not suffice.
inline PressureLoopResult pressure_loop(ScalarField pr, const PressureConfig& cfg,
                                        const MomentumSolve& momentum)
{
    cfg.validate();
    PressureLoopResult res;
    res.v = momentum(pr);
    for (;;) {
        const ScalarField div = divergence(res.v);
        const double dmax = interior_max_abs(div);
        res.div_history.push_back(dmax);
        if (!std::isfinite(dmax))
            throw NonConvergenceError("pressure_loop: divergence is not finite", res.div_history);
        if (dmax <= cfg.tol) break;
        if (res.iterations >= cfg.max_pressure_iters)
            throw NonConvergenceError("pressure_loop: no convergence after " +
                                          std::to_string(res.iterations) + " corrections",
                                      res.div_history);
        pr = correct_pressure(pr, div, cfg);
        ++res.iterations;
        res.v = momentum(pr);
    }
    res.pr = std::move(pr);
    return res;
}

} // namespace scns
