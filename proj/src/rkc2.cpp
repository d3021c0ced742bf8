#include "cilfit/rkc2.hpp"

#include <cmath>
#include <limits>

namespace cilfit {

int rkc2_stage_count(double dt, double rho) {
    // Stage selection as in the classical RKC codes: beta(s) covers dt*rho.
    const double m = 1.0 + std::sqrt(1.54 * dt * rho + 1.0);
    return std::max(2, static_cast<int>(m));
}

void rkc2_step(const RhsFn& f, const Vector& y, const Vector& f0, double dt,
               int stages, Vector& out, Rkc2Workspace& ws) {
    const int s = stages;
    const double eps = 2.0 / 13.0;
    const double w0 = 1.0 + eps / (static_cast<double>(s) * s);
    const double temp1 = w0 * w0 - 1.0;
    const double temp2 = std::sqrt(temp1);
    const double arg = s * std::log(w0 + temp2);
    const double w1 =
        std::sinh(arg) * temp1 / (std::cosh(arg) * s * temp2 - w0 * std::sinh(arg));

    double bjm1 = 1.0 / (4.0 * w0 * w0);
    double bjm2 = bjm1;

    ws.yjm2 = y;
    ws.yjm1 = y + (dt * w1 * bjm1) * f0;

    double zjm1 = w0, zjm2 = 1.0;
    double dzjm1 = 1.0, dzjm2 = 0.0;
    double d2zjm1 = 0.0, d2zjm2 = 0.0;

    for (int j = 2; j <= s; ++j) {
        const double zj = 2.0 * w0 * zjm1 - zjm2;
        const double dzj = 2.0 * w0 * dzjm1 - dzjm2 + 2.0 * zjm1;
        const double d2zj = 2.0 * w0 * d2zjm1 - d2zjm2 + 4.0 * dzjm1;
        const double bj = d2zj / (dzj * dzj);
        const double ajm1 = 1.0 - zjm1 * bjm1;
        const double mu = 2.0 * w0 * bj / bjm1;
        const double nu = -bj / bjm2;
        const double mus = mu * w1 / w0;

        f(ws.yjm1, ws.fj);
        out = mu * ws.yjm1 + nu * ws.yjm2 + (1.0 - mu - nu) * y +
              (dt * mus) * (ws.fj - ajm1 * f0);

        if (j < s) {
            ws.yjm2.swap(ws.yjm1);
            ws.yjm1.swap(out);
        }
        bjm2 = bjm1;
        bjm1 = bj;
        zjm2 = zjm1;
        zjm1 = zj;
        dzjm2 = dzjm1;
        dzjm1 = dzj;
        d2zjm2 = d2zjm1;
        d2zjm1 = d2zj;
    }
}

double power_iteration_radius(const RhsFn& f, const Vector& y, const Vector& f0,
                              Vector& direction, int max_iters) {
    const Eigen::Index n = y.size();
    if (direction.size() != n || direction.norm() == 0.0) {
        direction = f0;
        if (direction.norm() == 0.0) direction = Vector::Ones(n);
    }
    const double ynrm = y.norm();
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    const double dynrm = sqrt_eps * std::max(ynrm, 1.0);

    Vector probe(n), fv(n);
    double sigma = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        const double vnrm = direction.norm();
        if (vnrm == 0.0 || !std::isfinite(vnrm)) {
            direction = Vector::Ones(n);
            continue;
        }
        probe = y + (dynrm / vnrm) * direction;
        f(probe, fv);
        direction = fv - f0;
        const double new_sigma = direction.norm() / dynrm;
        if (it > 0 && std::abs(new_sigma - sigma) <= 0.01 * new_sigma) {
            sigma = new_sigma;
            break;
        }
        sigma = new_sigma;
    }
    return sigma;
}

}  // namespace cilfit
