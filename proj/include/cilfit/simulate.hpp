#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "cilfit/grid.hpp"
#include "cilfit/types.hpp"

namespace cilfit {

enum class SimStatus {
    Converged,
    RejectedNoConvergence,
    RejectedDegenerate,
    RejectedNonFinite,
};

std::string to_string(SimStatus s);

// Min-max scaled activator patch on a physical square of side patch_len.
struct Pattern {
    Eigen::ArrayXXd values;  // (m_dim/2) x (m_dim/2), min 0, max 1
    double patch_len = 0.0;
};

struct FieldState {
    Field v, w;
    double t = 0.0;
};

struct SimOutcome {
    SimStatus status = SimStatus::RejectedNoConvergence;
    std::optional<Pattern> pattern;  // present iff status == Converged
    long steps_taken = 0;
    double final_residual = 0.0;
};

struct DegeneratePatternError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pre-normalisation range below which a pattern counts as spatially constant.
inline constexpr double kDegenerateRange = 1e-8;

// Homogeneous steady state perturbed by iid U(-delta, delta) noise per grid
// point, v first then w; identical seed gives bitwise-identical state.
FieldState sample_initial_state(const ModelParams& params, const GridConfig& grid,
                                const InitNoiseConfig& noise);

// max(1/sigma, d) * 8/h^2, the reach of the diffusion blocks.
double diffusion_radius_bound(const ModelParams& params, double h);

// Upper estimate of the Jacobian spectral radius at the given state:
// the analytic diffusion bound refined by power iteration on the full
// right-hand side.
double estimate_spectral_radius(const FieldState& state, const ModelParams& params,
                                const GridConfig& grid);

// Centre (m_dim/2)^2 block of the activator field, min-max scaled.
// Throws DegeneratePatternError when the block range is below kDegenerateRange.
Pattern extract_pattern(const FieldState& state, const GridConfig& grid,
                        const ModelParams& params);

// Advance with the adaptive-stage stabilised integrator until the moving
// average (over n_ma accepted steps) of the grid-weighted L2 norm of du/dt
// drops below eps_conv, or t reaches t_end (rejection).
SimOutcome integrate_to_steady_state(const FieldState& init, const ModelParams& params,
                                     const GridConfig& grid, const SolverConfig& solver);

// The model operator F_theta: randomised initial data -> steady state ->
// centre patch, min-max scaled. Deterministic given the noise seed.
SimOutcome model_operator(const ModelParams& params, const GridConfig& grid,
                          const SolverConfig& solver, const InitNoiseConfig& noise);

}  // namespace cilfit
