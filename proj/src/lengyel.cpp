#include "cilfit/lengyel.hpp"

#include <cmath>
#include <limits>

namespace cilfit {

void lengyel_rhs(const double* v, const double* w, Eigen::Index rows, Eigen::Index cols,
                 const ModelParams& p, double h, double* dv, double* dw) {
    const double inv_h2 = 1.0 / (h * h);
    const double inv_sigma = 1.0 / p.sigma;
    // Laplacian fused with the reaction terms; ghost nodes mirror the boundary
    // value, so missing neighbours contribute the centre value. Column-major.
    for (Eigen::Index j = 0; j < cols; ++j) {
        const Eigen::Index jl = j > 0 ? j - 1 : j;
        const Eigen::Index jr = j < cols - 1 ? j + 1 : j;
        for (Eigen::Index i = 0; i < rows; ++i) {
            const Eigen::Index iu = i > 0 ? i - 1 : i;
            const Eigen::Index id = i < rows - 1 ? i + 1 : i;
            const Eigen::Index c = i + j * rows;
            const double vc = v[c];
            const double wc = w[c];
            const double lap_v = (v[iu + j * rows] + v[id + j * rows] + v[i + jl * rows] +
                                  v[i + jr * rows] - 4.0 * vc) *
                                 inv_h2;
            const double lap_w = (w[iu + j * rows] + w[id + j * rows] + w[i + jl * rows] +
                                  w[i + jr * rows] - 4.0 * wc) *
                                 inv_h2;
            const double ratio = vc * wc / (1.0 + vc * vc);
            dv[c] = inv_sigma * (p.a - vc - 4.0 * ratio + lap_v);
            dw[c] = p.b * (vc - ratio) + p.d * lap_w;
        }
    }
}

void lengyel_rhs(const Field& v, const Field& w, const ModelParams& p, double h,
                 Field& dv, Field& dw) {
    dv.resize(v.rows(), v.cols());
    dw.resize(v.rows(), v.cols());
    lengyel_rhs(v.data(), w.data(), v.rows(), v.cols(), p, h, dv.data(), dw.data());
}

double reaction_jacobian_bound(const Field& v, const Field& w, const ModelParams& p) {
    const double inv_sigma = 1.0 / p.sigma;
    double bound = 0.0;
    const Eigen::Index n = v.size();
    const double* pv = v.data();
    const double* pw = w.data();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double vc = pv[i];
        const double wc = pw[i];
        const double denom = 1.0 + vc * vc;
        const double uv = wc * (1.0 - vc * vc) / (denom * denom);
        const double uw = vc / denom;
        const double row_v = inv_sigma * (std::abs(-1.0 - 4.0 * uv) + std::abs(4.0 * uw));
        const double row_w = p.b * (std::abs(1.0 - uv) + std::abs(uw));
        bound = std::max(bound, std::max(row_v, row_w));
    }
    return bound;
}

namespace {

// Largest real part of the eigenvalues of the linearisation at wavenumber k^2.
double growth_rate(const ModelParams& p, double v0, double w0, double k2) {
    const double denom = 1.0 + v0 * v0;
    const double uv = w0 * (1.0 - v0 * v0) / (denom * denom);
    const double uw = v0 / denom;
    const double inv_sigma = 1.0 / p.sigma;
    const double j11 = inv_sigma * (-1.0 - 4.0 * uv) - inv_sigma * k2;
    const double j12 = inv_sigma * (-4.0 * uw);
    const double j21 = p.b * (1.0 - uv);
    const double j22 = -p.b * uw - p.d * k2;
    const double tr = j11 + j22;
    const double det = j11 * j22 - j12 * j21;
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) return 0.5 * (tr + std::sqrt(disc));
    return 0.5 * tr;
}

}  // namespace

DispersionScan dispersion_scan(const ModelParams& p, double domain_factor, int max_mode) {
    p.validate();
    const auto [v0, w0] = homogeneous_steady_state(p);
    DispersionScan result;
    result.uniform_stable = growth_rate(p, v0, w0, 0.0) < 0.0;

    const double l_tilde = domain_factor * p.L;
    const double base = M_PI * M_PI / (l_tilde * l_tilde);
    double max_growth = -std::numeric_limits<double>::infinity();
    for (int nx = 0; nx <= max_mode; ++nx) {
        for (int ny = nx; ny <= max_mode; ++ny) {
            if (nx == 0 && ny == 0) continue;
            const double k2 = base * (nx * nx + ny * ny);
            max_growth = std::max(max_growth, growth_rate(p, v0, w0, k2));
        }
    }
    result.max_growth = max_growth;
    return result;
}

bool turing_unstable(const ModelParams& p, double domain_factor) {
    const DispersionScan scan = dispersion_scan(p, domain_factor);
    return scan.uniform_stable && scan.max_growth > 0.0;
}

}  // namespace cilfit
