#include "cilfit/grid.hpp"

#include <stdexcept>

namespace cilfit {

void apply_laplacian(const Field& u, double h, Field& out) {
    if (!(h > 0.0)) throw std::invalid_argument("apply_laplacian: h must be positive");
    const Eigen::Index n = u.rows();
    const Eigen::Index m = u.cols();
    out.resize(n, m);
    const double inv_h2 = 1.0 / (h * h);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index jl = j > 0 ? j - 1 : j;
        const Eigen::Index jr = j < m - 1 ? j + 1 : j;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index iu = i > 0 ? i - 1 : i;
            const Eigen::Index id = i < n - 1 ? i + 1 : i;
            out(i, j) =
                (u(iu, j) + u(id, j) + u(i, jl) + u(i, jr) - 4.0 * u(i, j)) * inv_h2;
        }
    }
}

}  // namespace cilfit
