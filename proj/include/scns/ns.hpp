#pragma once

// Time stepping of the incompressible Navier-Stokes equations (and of the
// pressure-free Burgers system) with the super-compact scheme.
//
// Each momentum component is an instance of the convection-diffusion form
// with m = Re, (n, o, p) = Re (u, v, w), q = 0 and r = -Re * dpr/dx_i.
// Convection is lagged at t^n for all three components.

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scns/bench.hpp"
#include "scns/error.hpp"
#include "scns/field.hpp"
#include "scns/linsolve.hpp"
#include "scns/pressure.hpp"
#include "scns/stencil.hpp"

namespace scns {

enum class ProblemKind { burgers, cavity, double_cavity };

inline const char* to_string(ProblemKind p)
{
    switch (p) {
    case ProblemKind::burgers: return "burgers";
    case ProblemKind::cavity: return "cavity";
    case ProblemKind::double_cavity: return "double-cavity";
    }
    return "?";
}

struct ProblemConfig {
    ProblemKind problem = ProblemKind::cavity;
    double re = 100.0;
    double lid_speed = 1.0;
    GridSpec grid = GridSpec::cube(31, 0.005);
    double t_end = 1.0;       // fixed-time end; in steady mode an optional cap (<= 0: none)
    bool steady = false;
    double steady_tol = 1e-6;
    long max_steps = 10'000'000;
    PressureConfig pressure;
    BurgersParams burgers;
    double lin_tol = 1e-10;
    int lin_max_iter = 5000;

    void validate() const
    {
        if (!(re > 0.0)) throw PreconditionError("ProblemConfig: Re must be positive");
        if (!(steady_tol > 0.0)) throw PreconditionError("ProblemConfig: steady_tol must be positive");
        if (!steady && !(t_end > 0.0))
            throw PreconditionError("ProblemConfig: t_end must be positive for fixed-time runs");
        if (max_steps < 1) throw PreconditionError("ProblemConfig: max_steps must be >= 1");
        pressure.validate();
        if (problem == ProblemKind::burgers) {
            burgers.validate();
            if (burgers.re != re)
                throw PreconditionError("ProblemConfig: burgers.re differs from re");
        }
    }
};

struct RunReport {
    std::vector<int> pressure_iterations;  // corrections per step
    std::vector<double> residuals;         // max |v^{n+1} - v^n| per step
    std::vector<double> divergence;        // interior |div v|_max accepted per step
    std::vector<int> linear_iterations;    // BiCGSTAB iterations summed per step
    double wall_time_s = 0.0;
    bool converged = false;
    std::string status;
    std::optional<ErrorNorms> error_norms;
    std::optional<VortexLocation> vortex;
    std::vector<VortexLocation> vortex_centers;

    std::size_t steps() const noexcept { return residuals.size(); }

    double mean_pressure_iterations(std::size_t first_n = 0) const
    {
        const std::size_t n =
            first_n == 0 ? pressure_iterations.size()
                         : std::min(first_n, pressure_iterations.size());
        if (n == 0) return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += pressure_iterations[i];
        return s / static_cast<double>(n);
    }
};

struct SimState {
    VectorField v;
    VectorField v_prev; // t^{n-1}; equals v before the first step
    ScalarField pr;
    double time = 0.0;
    long step = 0;
    RunReport report;
};

/// Raised when a run stops on a solver failure; the partial state and its
/// report are attached, plus the divergence history of the failed step.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, std::shared_ptr<SimState> partial,
               std::vector<double> history = {})
        : Error(what), partial_(std::move(partial)), history_(std::move(history)) {}
    const SimState& partial() const noexcept { return *partial_; }
    const std::vector<double>& divergence_history() const noexcept { return history_; }

private:
    std::shared_ptr<SimState> partial_;
    std::vector<double> history_;
};

// ------------------------------------------------------ boundary conditions

/// Cavity walls: no slip everywhere, u = U0 on the lid z = 1 and, for the
/// double cavity, u = -U0 on z = 0. Lid edges shared with a wall stay 0.
inline void apply_velocity_bcs(VectorField& v, const ProblemConfig& cfg)
{
    if (cfg.problem == ProblemKind::burgers)
        throw PreconditionError("apply_velocity_bcs: Burgers boundaries come from the exact solution");
    const GridSpec& g = v.grid();
    for (int k = 0; k < g.nz(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const Index3 n{i, j, k};
                if (!g.is_boundary(n)) continue;
                double u = 0.0;
                const bool face_interior = i > 0 && i < g.nx() - 1 && j > 0 && j < g.ny() - 1;
                if (face_interior && k == g.nz() - 1) u = cfg.lid_speed;
                if (face_interior && k == 0 && cfg.problem == ProblemKind::double_cavity)
                    u = -cfg.lid_speed;
                v.u(n) = u;
                v.v(n) = 0.0;
                v.w(n) = 0.0;
            }
}

/// Velocity field carrying the boundary values of t = time (interior nodes
/// hold the exact/initial data where one exists, zero otherwise).
inline VectorField boundary_velocity(const ProblemConfig& cfg, double time)
{
    if (cfg.problem == ProblemKind::burgers) return burgers_field(cfg.burgers, cfg.grid, time);
    VectorField v(cfg.grid);
    apply_velocity_bcs(v, cfg);
    return v;
}

inline double steady_state_residual(const VectorField& v_new, const VectorField& v_old)
{
    if (!v_new.grid().same_layout(v_old.grid()))
        throw GridMismatchError("steady_state_residual: fields on different grids");
    const std::size_t n = v_new.grid().size();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double du = v_new.u.data()[i] - v_old.u.data()[i];
        const double dv = v_new.v.data()[i] - v_old.v.data()[i];
        const double dw = v_new.w.data()[i] - v_old.w.data()[i];
        m = std::max(m, std::sqrt(du * du + dv * dv + dw * dw));
    }
    return m;
}

// ----------------------------------------------------------- momentum step

/// The three momentum systems of one time step with convection frozen at
/// t^n. Only the pressure forcing changes between pressure iterations, so
/// the matrices and explicit right-hand sides are built once.
class MomentumSolver {
public:
    MomentumSolver(const VectorField& v_n, const VectorField& v_prev, const VectorField& boundary,
                   const ProblemConfig& cfg)
        : re_(cfg.re), lin_tol_(cfg.lin_tol), lin_max_iter_(cfg.lin_max_iter), grid_(cfg.grid)
    {
        const double re = cfg.re;
        auto scaled = [re](const ScalarField& f) {
            ScalarField s = f;
            for (double& x : s.data()) x *= re;
            return s;
        };
        const ScalarField zero(grid_);
        coeffs_.m = re;
        coeffs_.n = scaled(v_n.u);
        coeffs_.o = scaled(v_n.v);
        coeffs_.p = scaled(v_n.w);
        coeffs_.q = zero;
        coeffs_.r = zero;
        coeffs_.n_prev = scaled(v_prev.u);
        coeffs_.o_prev = scaled(v_prev.v);
        coeffs_.p_prev = scaled(v_prev.w);
        coeffs_.q_prev = zero;
        coeffs_.r_prev = zero;

        const StencilWeights sw = build_stencil_weights(coeffs_, grid_);
        for (Axis a : kAxes) {
            const auto ai = static_cast<std::size_t>(a);
            systems_[ai] = assemble_system(sw, v_n.component(a), boundary.component(a));
            boundary_[ai] = boundary.component(a);
            guess_[ai] = gather_interior(v_n.component(a));
        }
    }

    /// Solve the momentum equations for the pressure `pr` (pass an all-zero
    /// field for the pressure-free Burgers system).
    VectorField solve(const ScalarField& pr)
    {
        const bool has_pressure = reduce(pr, Reduction::max_abs) != 0.0;
        const VectorField grad = has_pressure ? pressure_gradient(pr) : VectorField(grid_);
        VectorField out(grid_);
        for (Axis a : kAxes) {
            const auto ai = static_cast<std::size_t>(a);
            LinearSystem& sys = systems_[ai];
            if (has_pressure || forced_[ai]) {
                ScalarField r = grad.component(a);
                for (double& x : r.data()) x *= -re_;
                sys.set_forcing(forcing_vector(coeffs_, grid_, r, r));
                forced_[ai] = has_pressure;
            }
            SolveResult res = bicgstab(sys.matrix, sys.rhs, guess_[ai], lin_tol_, lin_max_iter_);
            last_iterations_ += res.stats.iterations;
            if (!res.stats.converged)
                throw NonConvergenceError(std::string("momentum solve for ") + "uvw"[ai] +
                                              " did not converge (relative residual " +
                                              std::to_string(res.stats.final_relative_residual) + ")",
                                          {res.stats.final_relative_residual});
            guess_[ai] = res.x;
            out.component(a) = scatter_interior(res.x, boundary_[ai]);
            if (!out.component(a).all_finite())
                throw NonConvergenceError("momentum solve produced non-finite values", {});
        }
        return out;
    }

    /// BiCGSTAB iterations accumulated over all solves so far.
    int linear_iterations() const noexcept { return last_iterations_; }

private:
    double re_;
    double lin_tol_;
    int lin_max_iter_;
    GridSpec grid_;
    CoefficientFields coeffs_;
    std::array<LinearSystem, 3> systems_;
    std::array<ScalarField, 3> boundary_;
    std::array<std::vector<double>, 3> guess_;
    std::array<bool, 3> forced_{};
    int last_iterations_ = 0;
};

/// One momentum solve from `state` with its current pressure.
inline VectorField momentum_step(const SimState& state, const ProblemConfig& cfg)
{
    const VectorField bc = boundary_velocity(cfg, state.time + cfg.grid.dt());
    MomentumSolver solver(state.v, state.v_prev, bc, cfg);
    return solver.solve(state.pr);
}

// ---------------------------------------------------------------- driver

inline SimState initial_state(const ProblemConfig& cfg)
{
    SimState s;
    if (cfg.problem == ProblemKind::burgers) {
        s.v = burgers_field(cfg.burgers, cfg.grid, 0.0);
    } else {
        s.v = VectorField(cfg.grid);
        apply_velocity_bcs(s.v, cfg);
    }
    s.v_prev = s.v;
    s.pr = ScalarField(cfg.grid);
    return s;
}

/// Advance `state` by one time step and append that step to its report.
inline void advance(SimState& state, const ProblemConfig& cfg)
{
    const double dt = cfg.grid.dt();
    const double t_next = static_cast<double>(state.step + 1) * dt;
    const VectorField bc = boundary_velocity(cfg, t_next);
    MomentumSolver solver(state.v, state.v_prev, bc, cfg);

    VectorField v_new;
    int corrections = 0;
    double div_max = 0.0;
    if (cfg.problem == ProblemKind::burgers) {
        v_new = solver.solve(ScalarField(cfg.grid));
        div_max = interior_max_abs(divergence(v_new));
    } else {
        PressureLoopResult res = pressure_loop(
            state.pr, cfg.pressure, [&solver](const ScalarField& p) { return solver.solve(p); });
        v_new = std::move(res.v);
        state.pr = std::move(res.pr);
        corrections = res.iterations;
        div_max = res.div_history.back();
    }

    auto& rep = state.report;
    rep.residuals.push_back(steady_state_residual(v_new, state.v));
    rep.pressure_iterations.push_back(corrections);
    rep.divergence.push_back(div_max);
    rep.linear_iterations.push_back(solver.linear_iterations());

    state.v_prev = std::move(state.v);
    state.v = std::move(v_new);
    ++state.step;
    state.time = t_next;
}

inline void finalize_diagnostics(SimState& s, const ProblemConfig& cfg)
{
    if (cfg.problem == ProblemKind::burgers) {
        s.report.error_norms = error_norms(s.v, burgers_field(cfg.burgers, cfg.grid, s.time));
        return;
    }
    const double ym = 0.5 * (cfg.grid.lower(Axis::y) + cfg.grid.upper(Axis::y));
    s.report.vortex_centers = find_vortex_centers(s.v, ym);
    if (!s.report.vortex_centers.empty()) s.report.vortex = find_primary_vortex(s.v, ym);
}

using StepObserver = std::function<void(const SimState&)>;

/// Run until t_end (fixed-time mode) or until the steady residual drops
/// below steady_tol (steady mode). Throws RunAborted on solver failure.
inline SimState run(const ProblemConfig& cfg, const StepObserver& observer = {})
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto state = std::make_shared<SimState>(initial_state(cfg));
    const double dt = cfg.grid.dt();
    const long fixed_steps =
        cfg.t_end > 0.0 ? std::max(1L, std::lround(cfg.t_end / dt)) : cfg.max_steps;
    const long step_cap = std::min(cfg.max_steps, fixed_steps);

    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    try {
        while (state->step < step_cap) {
            advance(*state, cfg);
            if (observer) observer(*state);
            if (cfg.steady && state->report.residuals.back() < cfg.steady_tol) {
                state->report.converged = true;
                state->report.status = "steady state reached";
                break;
            }
        }
        if (!state->report.converged) {
            if (cfg.steady) {
                state->report.status = "step cap reached before steady state";
            } else {
                state->report.converged = true;
                state->report.status = "t_end reached";
            }
        }
        finalize_diagnostics(*state, cfg);
    } catch (const NonConvergenceError& e) {
        state->report.converged = false;
        state->report.status = std::string("aborted: ") + e.what();
        state->report.wall_time_s = elapsed();
        throw RunAborted(e.what(), state, e.history());
    }
    state->report.wall_time_s = elapsed();
    return std::move(*state);
}

} // namespace scns
