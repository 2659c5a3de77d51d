#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "sogm/core/types.hpp"

namespace sogm {

/// Writes one measurement's ground uncertainty into a bounded patch: an
/// unnormalized Gaussian kernel scaled into (0.5, confidence], truncated at
/// the 3-sigma ellipse. Near-degenerate covariances (eigenvalue below
/// resolution^2/100) are regularized by adding (resolution/10)^2 to the
/// diagonal so the kernel stays invertible.
///
/// The patch lives in the same frame as `mean`; its anchor is snapped to the
/// resolution lattice so patches align with lattice-aligned grids.
inline IsmPatch splat_gaussian(const Eigen::Vector2d& mean, Eigen::Matrix2d cov,
                               double confidence, const std::string& layer,
                               double resolution) {
    if (!(confidence > 0.5 && confidence <= 1.0))
        throw Error(ErrorCode::DomainError, "splat_gaussian: confidence out of (0.5, 1]");

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const double min_ev = es.eigenvalues().minCoeff();
    if (min_ev < -1e-9)
        throw Error(ErrorCode::NotPositiveSemidefinite,
                    "splat_gaussian: covariance not positive semidefinite");
    if (min_ev < resolution * resolution / 100.0) {
        const double reg = (resolution / 10.0) * (resolution / 10.0);
        cov(0, 0) += reg;
        cov(1, 1) += reg;
    }

    const Eigen::Matrix2d info = cov.inverse();
    const double rx = 3.0 * std::sqrt(cov(0, 0));
    const double ry = 3.0 * std::sqrt(cov(1, 1));

    const double x0 = std::floor((mean.x() - rx) / resolution) * resolution;
    const double y0 = std::floor((mean.y() - ry) / resolution) * resolution;
    const int w = static_cast<int>(std::ceil((mean.x() + rx - x0) / resolution)) + 1;
    const int h = static_cast<int>(std::ceil((mean.y() + ry - y0) / resolution)) + 1;

    IsmPatch patch(Pose2D(x0, y0, 0.0), resolution, w, h, layer);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            Eigen::Vector2d d(x0 + (i + 0.5) * resolution - mean.x(),
                              y0 + (j + 0.5) * resolution - mean.y());
            const double q = d.dot(info * d);
            if (q > 9.0) continue; // beyond 3 sigma: stays exactly 0.5
            patch.at(i, j) = 0.5 + (confidence - 0.5) * std::exp(-0.5 * q);
        }
    }
    return patch;
}

/// No-propagation counterpart: stamps the confidence into the single cell
/// containing the point. Used to contrast maps with and without error
/// propagation.
inline IsmPatch stamp_single_cell(const Eigen::Vector2d& point, double confidence,
                                  const std::string& layer, double resolution) {
    const double x0 = std::floor(point.x() / resolution) * resolution;
    const double y0 = std::floor(point.y() / resolution) * resolution;
    IsmPatch patch(Pose2D(x0, y0, 0.0), resolution, 1, 1, layer);
    patch.at(0, 0) = confidence;
    return patch;
}

} // namespace sogm
