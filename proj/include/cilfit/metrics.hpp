#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cilfit/simulate.hpp"

namespace cilfit {

enum class DistanceKind { L2, SobolevFull, SobolevSemi };

struct DistanceFamily {
    DistanceKind kind = DistanceKind::L2;
};

struct DimensionMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Physical spacing of a pattern's grid.
inline double pattern_step(const Pattern& p) {
    return p.patch_len / static_cast<double>(p.values.rows() - 1);
}

// Grid-weighted distance between two min-max scaled patterns:
//   L2          sqrt(h^2 sum (p1-p2)^2)
//   SobolevSemi sqrt(h^2 sum |grad_h (p1-p2)|^2), forward differences,
//               one-sided at the far row/column
//   SobolevFull sqrt(L2^2 + SobolevSemi^2)
double distance(const Pattern& p1, const Pattern& p2, const DistanceFamily& family);

// Entry (i, j) = distance(a[i], b[j], family).
Eigen::MatrixXd distance_matrix(const std::vector<Pattern>& a,
                                const std::vector<Pattern>& b,
                                const DistanceFamily& family, int workers = 1);

// distance_matrix(a, a, family) computed on the upper triangle and mirrored.
Eigen::MatrixXd symmetric_distance_matrix(const std::vector<Pattern>& a,
                                          const DistanceFamily& family, int workers = 1);

}  // namespace cilfit
