#pragma once

#include <utility>

#include "cilfit/grid.hpp"
#include "cilfit/types.hpp"

namespace cilfit {

// Spatially homogeneous steady state (v0, w0) = (a/5, 1 + (a/5)^2).
inline std::pair<double, double> homogeneous_steady_state(const ModelParams& p) {
    const double v0 = p.a / 5.0;
    return {v0, 1.0 + v0 * v0};
}

// Method-of-lines right-hand side of the Lengyel-Epstein system on a uniform
// grid with step h:
//   dv/dt = (1/sigma) (a - v - 4 v w / (1 + v^2) + lap v)
//   dw/dt = b (v - v w / (1 + v^2)) + d lap w
// Writes into dv, dw (resized as needed). Throws nothing; callers check for
// non-finite output.
void lengyel_rhs(const Field& v, const Field& w, const ModelParams& p, double h,
                 Field& dv, Field& dw);

// Raw column-major core used by the integrator (v, w, dv, dw each rows*cols).
void lengyel_rhs(const double* v, const double* w, Eigen::Index rows, Eigen::Index cols,
                 const ModelParams& p, double h, double* dv, double* dw);

// Upper bound on the reaction Jacobian spectral radius over the current state
// (Gershgorin row sums of the 2x2 pointwise Jacobian, maximised over the grid).
double reaction_jacobian_bound(const Field& v, const Field& w, const ModelParams& p);

// Largest linear growth rate over the square-domain Neumann modes
// k^2 = pi^2 (n^2 + m^2) / Ltilde^2. Uniform-mode (k = 0) stability is reported
// separately so callers can distinguish diffusion-driven instability.
struct DispersionScan {
    bool uniform_stable = false;  // Re lambda < 0 at k = 0
    double max_growth = 0.0;      // max over admitted k > 0 of Re lambda(k^2)
};

DispersionScan dispersion_scan(const ModelParams& p, double domain_factor = 2.0,
                               int max_mode = 256);

// True iff the homogeneous state is stable to uniform perturbations but some
// admitted wavenumber k > 0 has an unstable linearised mode.
bool turing_unstable(const ModelParams& p, double domain_factor = 2.0);

}  // namespace cilfit
