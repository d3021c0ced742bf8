#pragma once

#include <Eigen/Dense>

namespace cilfit {

using Field = Eigen::ArrayXXd;

// Five-point Laplacian with zero-flux (Neumann) boundaries. Ghost values are
// taken equal to the boundary value itself (first-order one-sided scheme), so
// a missing neighbour contributes the centre value to the stencil.
void apply_laplacian(const Field& u, double h, Field& out);

inline Field apply_laplacian(const Field& u, double h) {
    Field out(u.rows(), u.cols());
    apply_laplacian(u, h, out);
    return out;
}

}  // namespace cilfit
