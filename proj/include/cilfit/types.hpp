#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cilfit {

// Dimensionless Lengyel-Epstein parameters. theta = (L, a, b, sigma) is the
// vector being estimated; d is held fixed at its experimentally known value.
struct ModelParams {
    double L = 0.0;      // physical patch side (dimensionless)
    double a = 0.0;      // feed parameter
    double b = 0.0;      // rate parameter
    double sigma = 1.0;  // complexation factor, >= 1
    double d = 1.07;     // inhibitor/activator diffusivity ratio

    void validate() const {
        if (!(L > 0.0) || !(a > 0.0) || !(b > 0.0))
            throw std::invalid_argument("ModelParams: L, a, b must be positive");
        if (!(sigma >= 1.0))
            throw std::invalid_argument("ModelParams: sigma must be >= 1");
        if (!(d > 0.0))
            throw std::invalid_argument("ModelParams: d must be positive");
    }
};

struct GridConfig {
    int m_dim = 128;            // grid points per side, even
    double domain_factor = 2.0; // computational domain side = domain_factor * L

    void validate() const {
        if (m_dim < 8 || m_dim % 2 != 0)
            throw std::invalid_argument("GridConfig: m_dim must be even and >= 8");
        if (!(domain_factor >= 1.0))
            throw std::invalid_argument("GridConfig: domain_factor must be >= 1");
    }

    // Uniform grid step on the enlarged domain (0, domain_factor*L)^2.
    double step(const ModelParams& p) const {
        return domain_factor * p.L / static_cast<double>(m_dim - 1);
    }
};

struct SolverConfig {
    double t_end = 2e6;      // integration horizon
    double eps_conv = 2e-7;  // steady-state threshold on the residual norm
    int n_ma = 100;          // moving-average window, in accepted steps
    double rtol = 1e-4;      // local error control
    double atol = 1e-7;
    int max_stages = 200;    // cap on internal stages per step

    void validate() const {
        if (!(t_end > 0.0)) throw std::invalid_argument("SolverConfig: t_end must be positive");
        if (!(eps_conv > 0.0)) throw std::invalid_argument("SolverConfig: eps_conv must be positive");
        if (n_ma < 1) throw std::invalid_argument("SolverConfig: n_ma must be >= 1");
        if (!(rtol > 0.0) || !(atol > 0.0))
            throw std::invalid_argument("SolverConfig: tolerances must be positive");
        if (max_stages < 2) throw std::invalid_argument("SolverConfig: max_stages must be >= 2");
    }
};

struct InitNoiseConfig {
    double delta = 1e-3;  // half-width of uniform perturbation around the steady state
    std::uint64_t seed = 0;

    void validate() const {
        if (!(delta >= 0.0))
            throw std::invalid_argument("InitNoiseConfig: delta must be nonnegative");
    }
};

}  // namespace cilfit
