#pragma once

#include <Eigen/Dense>
#include <functional>

namespace cilfit {

using Vector = Eigen::VectorXd;

// Autonomous right-hand side: dy = f(y).
using RhsFn = std::function<void(const Vector& y, Vector& dy)>;

// Scratch buffers reused across steps.
struct Rkc2Workspace {
    Vector yjm1, yjm2, fj;
};

// Smallest admissible stage count for step size dt against spectral radius
// rho (stability interval beta(s) ~ 0.653 s^2 for the damped scheme).
int rkc2_stage_count(double dt, double rho);

// One step of the second-order Runge-Kutta-Chebyshev scheme with damping
// eps = 2/13 (three-term Chebyshev recurrence). f0 must equal f(y). The
// result is written to out; out may not alias y or f0.
void rkc2_step(const RhsFn& f, const Vector& y, const Vector& f0, double dt,
               int stages, Vector& out, Rkc2Workspace& ws);

// Nonlinear power iteration on the Jacobian of f at y via directional
// differences. f0 = f(y). `direction` carries the previous eigenvector
// estimate between calls (resized and overwritten); a zero vector starts a
// fresh iteration.
double power_iteration_radius(const RhsFn& f, const Vector& y, const Vector& f0,
                              Vector& direction, int max_iters = 25);

}  // namespace cilfit
