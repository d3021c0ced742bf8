#include "cilfit/simulate.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "cilfit/lengyel.hpp"
#include "cilfit/rkc2.hpp"
#include "cilfit/rng.hpp"

namespace cilfit {

std::string to_string(SimStatus s) {
    switch (s) {
        case SimStatus::Converged: return "Converged";
        case SimStatus::RejectedNoConvergence: return "RejectedNoConvergence";
        case SimStatus::RejectedDegenerate: return "RejectedDegenerate";
        case SimStatus::RejectedNonFinite: return "RejectedNonFinite";
    }
    return "Unknown";
}

FieldState sample_initial_state(const ModelParams& params, const GridConfig& grid,
                                const InitNoiseConfig& noise) {
    params.validate();
    grid.validate();
    noise.validate();
    const auto [v0, w0] = homogeneous_steady_state(params);
    const int n = grid.m_dim;

    FieldState state;
    state.v.resize(n, n);
    state.w.resize(n, n);
    state.t = 0.0;

    auto rng = make_rng(noise.seed);
    std::uniform_real_distribution<double> unif(-noise.delta, noise.delta);
    for (Eigen::Index i = 0; i < state.v.size(); ++i)
        state.v.data()[i] = v0 + (noise.delta > 0.0 ? unif(rng) : 0.0);
    for (Eigen::Index i = 0; i < state.w.size(); ++i)
        state.w.data()[i] = w0 + (noise.delta > 0.0 ? unif(rng) : 0.0);
    return state;
}

double diffusion_radius_bound(const ModelParams& params, double h) {
    return std::max(1.0 / params.sigma, params.d) * 8.0 / (h * h);
}

namespace {

// Flattened layout: y = [v; w], column-major fields of size n x n.
RhsFn make_rhs(const ModelParams& params, int n, double h) {
    const Eigen::Index sz = static_cast<Eigen::Index>(n) * n;
    return [params, n, h, sz](const Vector& y, Vector& dy) {
        dy.resize(2 * sz);
        lengyel_rhs(y.data(), y.data() + sz, n, n, params, h, dy.data(), dy.data() + sz);
    };
}

Vector flatten(const FieldState& s) {
    const Eigen::Index sz = s.v.size();
    Vector y(2 * sz);
    std::copy(s.v.data(), s.v.data() + sz, y.data());
    std::copy(s.w.data(), s.w.data() + sz, y.data() + sz);
    return y;
}

FieldState unflatten(const Vector& y, int n, double t) {
    const Eigen::Index sz = static_cast<Eigen::Index>(n) * n;
    FieldState s;
    s.v = Eigen::Map<const Field>(y.data(), n, n);
    s.w = Eigen::Map<const Field>(y.data() + sz, n, n);
    s.t = t;
    return s;
}

// Both fields spatially constant to within the degeneracy tolerance. Once the
// state is flat the only remaining dynamics is the uniform two-component ODE,
// which cannot produce a pattern; time-discretisation wobble can then sustain
// a residual above eps_conv indefinitely, so flatness is checked directly.
bool spatially_degenerate(const Vector& y, int n) {
    const Eigen::Index sz = static_cast<Eigen::Index>(n) * n;
    const auto v = Eigen::Map<const Eigen::VectorXd>(y.data(), sz);
    const auto w = Eigen::Map<const Eigen::VectorXd>(y.data() + sz, sz);
    return v.maxCoeff() - v.minCoeff() < kDegenerateRange &&
           w.maxCoeff() - w.minCoeff() < kDegenerateRange;
}

}  // namespace

double estimate_spectral_radius(const FieldState& state, const ModelParams& params,
                                const GridConfig& grid) {
    const double h = grid.step(params);
    const RhsFn f = make_rhs(params, grid.m_dim, h);
    const Vector y = flatten(state);
    Vector f0;
    f(y, f0);
    Vector direction;
    const double refined = power_iteration_radius(f, y, f0, direction);
    return std::max(diffusion_radius_bound(params, h), refined);
}

Pattern extract_pattern(const FieldState& state, const GridConfig& grid,
                        const ModelParams& params) {
    const int n = grid.m_dim;
    const int side = n / 2;
    const int offset = (n - side) / 2;
    Eigen::ArrayXXd block = state.v.block(offset, offset, side, side);
    const double lo = block.minCoeff();
    const double hi = block.maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw DegeneratePatternError("extract_pattern: non-finite field");
    if (hi - lo < kDegenerateRange)
        throw DegeneratePatternError("extract_pattern: spatially constant field");
    Pattern p;
    p.values = (block - lo) / (hi - lo);
    p.patch_len = params.L;
    return p;
}

SimOutcome integrate_to_steady_state(const FieldState& init, const ModelParams& params,
                                     const GridConfig& grid, const SolverConfig& solver) {
    params.validate();
    grid.validate();
    solver.validate();

    const int n = grid.m_dim;
    const double h_grid = grid.step(params);
    const RhsFn f = make_rhs(params, n, h_grid);

    SimOutcome outcome;
    Vector y = flatten(init);
    double t = init.t;

    if (!y.allFinite()) {
        outcome.status = SimStatus::RejectedNonFinite;
        return outcome;
    }

    Vector f0(y.size());
    f(y, f0);
    if (!f0.allFinite()) {
        outcome.status = SimStatus::RejectedNonFinite;
        return outcome;
    }

    Vector eigvec;  // carried between spectral radius refreshes
    double rho = std::max(diffusion_radius_bound(params, h_grid),
                          power_iteration_radius(f, y, f0, eigvec));
    const double safety = 1.05;
    const double stage_limit_dt = 0.653 * solver.max_stages * solver.max_stages;

    double dt = std::min(solver.t_end - t, 0.25 / rho);
    if (!(dt > 0.0)) dt = solver.t_end * 1e-6;

    Rkc2Workspace ws;
    Vector ynew(y.size()), fnew(y.size()), est(y.size());

    // Moving average of the grid-weighted L2 norm of du/dt over accepted steps.
    std::deque<double> window;
    double window_sum = 0.0;

    long accepted = 0;
    int nonfinite_rejects = 0;

    while (t < solver.t_end) {
        dt = std::min(dt, solver.t_end - t);
        if (dt * rho * safety > stage_limit_dt) dt = stage_limit_dt / (rho * safety);
        if (dt < 1e-14 * std::max(1.0, t)) {
            outcome.status = SimStatus::RejectedNoConvergence;
            outcome.final_residual = window.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                    : window_sum / window.size();
            return outcome;
        }

        const int stages = rkc2_stage_count(dt * safety, rho);
        rkc2_step(f, y, f0, dt, stages, ynew, ws);

        bool finite = ynew.allFinite();
        if (finite) {
            f(ynew, fnew);
            finite = fnew.allFinite();
        }
        if (!finite) {
            if (++nonfinite_rejects > 25) {
                outcome.status = SimStatus::RejectedNonFinite;
                return outcome;
            }
            dt *= 0.1;
            rho = std::max(diffusion_radius_bound(params, h_grid),
                           power_iteration_radius(f, y, f0, eigvec));
            continue;
        }

        // RKC local error estimate, weighted RMS against atol + rtol*|y|.
        est = 0.8 * (y - ynew) + (0.4 * dt) * (f0 + fnew);
        double err_sq = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double scale =
                solver.atol + solver.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = est[i] / scale;
            err_sq += r * r;
        }
        const double err = std::sqrt(err_sq / static_cast<double>(y.size()));

        if (err <= 1.0) {
            y.swap(ynew);
            f0.swap(fnew);
            t += dt;
            ++accepted;
            nonfinite_rejects = 0;

            const double residual = h_grid * f0.norm();
            window.push_back(residual);
            window_sum += residual;
            if (static_cast<int>(window.size()) > solver.n_ma) {
                window_sum -= window.front();
                window.pop_front();
            }
            if (static_cast<int>(window.size()) == solver.n_ma &&
                window_sum / solver.n_ma < solver.eps_conv) {
                outcome.steps_taken = accepted;
                outcome.final_residual = window_sum / solver.n_ma;
                try {
                    outcome.pattern = extract_pattern(unflatten(y, n, t), grid, params);
                    outcome.status = SimStatus::Converged;
                } catch (const DegeneratePatternError&) {
                    outcome.status = SimStatus::RejectedDegenerate;
                }
                return outcome;
            }

            if (accepted % 25 == 0) {
                if (spatially_degenerate(y, n)) {
                    outcome.steps_taken = accepted;
                    outcome.final_residual = window_sum / window.size();
                    outcome.status = SimStatus::RejectedDegenerate;
                    return outcome;
                }
                rho = std::max(diffusion_radius_bound(params, h_grid),
                               power_iteration_radius(f, y, f0, eigvec));
            }

            const double fac = err > 0.0 ? 0.8 * std::pow(err, -1.0 / 3.0) : 10.0;
            dt *= std::min(10.0, std::max(0.1, fac));
        } else {
            const double fac = 0.8 * std::pow(err, -1.0 / 3.0);
            dt *= std::max(0.1, std::min(1.0, fac));
        }
    }

    outcome.steps_taken = accepted;
    outcome.final_residual =
        window.empty() ? std::numeric_limits<double>::quiet_NaN() : window_sum / window.size();
    // Any residual level above the threshold at t_end counts as no convergence,
    // including the intermediate regime below 5*eps_conv — unless the state is
    // spatially constant, which is a degenerate (pattern-free) outcome.
    outcome.status = spatially_degenerate(y, n) ? SimStatus::RejectedDegenerate
                                                : SimStatus::RejectedNoConvergence;
    return outcome;
}

SimOutcome model_operator(const ModelParams& params, const GridConfig& grid,
                          const SolverConfig& solver, const InitNoiseConfig& noise) {
    const FieldState init = sample_initial_state(params, grid, noise);
    SimOutcome out = integrate_to_steady_state(init, params, grid, solver);
    return out;
}

}  // namespace cilfit
