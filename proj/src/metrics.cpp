#include "cilfit/metrics.hpp"

#include <cmath>

#include "cilfit/parallel.hpp"

namespace cilfit {

namespace {

void check_compatible(const Pattern& p1, const Pattern& p2) {
    if (p1.values.rows() != p2.values.rows() || p1.values.cols() != p2.values.cols())
        throw DimensionMismatchError("distance: pattern dimensions differ");
    if (p1.patch_len != p2.patch_len)
        throw DimensionMismatchError("distance: patch lengths differ");
}

double l2_sq(const Eigen::ArrayXXd& diff, double h) {
    return h * h * diff.square().sum();
}

double semi_sq(const Eigen::ArrayXXd& diff, double h) {
    const Eigen::Index n = diff.rows();
    const Eigen::Index m = diff.cols();
    const double inv_h = 1.0 / h;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            // forward differences, one-sided (backward) on the last row/column
            const double gx = (i < n - 1 ? diff(i + 1, j) - diff(i, j)
                                         : diff(i, j) - diff(i - 1, j)) *
                              inv_h;
            const double gy = (j < m - 1 ? diff(i, j + 1) - diff(i, j)
                                         : diff(i, j) - diff(i, j - 1)) *
                              inv_h;
            acc += gx * gx + gy * gy;
        }
    }
    return h * h * acc;
}

}  // namespace

double distance(const Pattern& p1, const Pattern& p2, const DistanceFamily& family) {
    check_compatible(p1, p2);
    const double h = pattern_step(p1);
    const Eigen::ArrayXXd diff = p1.values - p2.values;
    switch (family.kind) {
        case DistanceKind::L2: return std::sqrt(l2_sq(diff, h));
        case DistanceKind::SobolevSemi: return std::sqrt(semi_sq(diff, h));
        case DistanceKind::SobolevFull:
            return std::sqrt(l2_sq(diff, h) + semi_sq(diff, h));
    }
    return 0.0;
}

Eigen::MatrixXd distance_matrix(const std::vector<Pattern>& a,
                                const std::vector<Pattern>& b,
                                const DistanceFamily& family, int workers) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("distance_matrix: empty pattern set");
    Eigen::MatrixXd out(a.size(), b.size());
    parallel_for(
        a.size(),
        [&](std::size_t i) {
            for (std::size_t j = 0; j < b.size(); ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    distance(a[i], b[j], family);
        },
        workers);
    return out;
}

Eigen::MatrixXd symmetric_distance_matrix(const std::vector<Pattern>& a,
                                          const DistanceFamily& family, int workers) {
    if (a.empty()) throw std::invalid_argument("symmetric_distance_matrix: empty set");
    const Eigen::Index n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    parallel_for(
        a.size(),
        [&](std::size_t i) {
            for (std::size_t j = i + 1; j < a.size(); ++j) {
                const double d = distance(a[i], a[j], family);
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
                out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
            }
        },
        workers);
    return out;
}

}  // namespace cilfit
