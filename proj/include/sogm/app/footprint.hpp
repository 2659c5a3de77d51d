#pragma once

#include <cmath>
#include <string>

#include "sogm/core/types.hpp"

namespace sogm {

/// Static implement shape in the vehicle frame: a rectangle of `width`
/// across-track (y) by `depth` along-track (x), centered at `offset` from
/// the vehicle origin.
struct ImplementFootprint {
    double width = 6.0;
    double depth = 0.5;
    double offset_x = 0.0;
    double offset_y = 0.0;
    double p_applied = 0.95; // in (0.5, 1]
    std::string layer_name = "processed";

    void validate() const {
        if (!(width > 0.0 && depth > 0.0))
            throw Error(ErrorCode::DomainError, "ImplementFootprint: width/depth must be > 0");
        if (!(p_applied > 0.5 && p_applied <= 1.0))
            throw Error(ErrorCode::DomainError, "ImplementFootprint: p_applied out of (0.5, 1]");
    }
};

namespace detail {
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}
}

/// Stamps the footprint at a pose into a patch. With zero pose noise the
/// result is an exact rasterized rectangle (cell-center containment). With
/// noise, the indicator is convolved with a single isotropic Gaussian of
/// variance sigma_x^2 + sigma_y^2 + r_max^2 * sigma_theta^2 (lever arm at
/// the farthest footprint corner), evaluated analytically per cell.
inline IsmPatch stamp_footprint(const ImplementFootprint& fp, const Pose2D& pose,
                                double sigma_x, double sigma_y, double sigma_theta,
                                double resolution) {
    fp.validate();
    if (sigma_x < 0.0 || sigma_y < 0.0 || sigma_theta < 0.0)
        throw Error(ErrorCode::DomainError, "stamp_footprint: negative sigma");

    const double hx = fp.depth / 2.0;
    const double hy = fp.width / 2.0;
    const double r_max = std::hypot(std::abs(fp.offset_x) + hx, std::abs(fp.offset_y) + hy);
    const double blur2 = sigma_x * sigma_x + sigma_y * sigma_y +
                         r_max * r_max * sigma_theta * sigma_theta;
    const double blur = std::sqrt(blur2);
    const double margin = 3.0 * blur;

    // world-frame bounding box of the rotated rectangle plus blur margin
    double cx, cy;
    pose.transform(fp.offset_x, fp.offset_y, cx, cy);
    const double reach = std::hypot(hx, hy) + margin;
    const double x0 = std::floor((cx - reach) / resolution) * resolution;
    const double y0 = std::floor((cy - reach) / resolution) * resolution;
    const int n = static_cast<int>(std::ceil(2.0 * reach / resolution)) + 1;

    IsmPatch patch(Pose2D(x0, y0, 0.0), resolution, n, n, fp.layer_name);
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double wx = x0 + (i + 0.5) * resolution;
            const double wy = y0 + (j + 0.5) * resolution;
            // cell center in the footprint's local frame
            const double dx = wx - pose.x, dy = wy - pose.y;
            const double lx = c * dx + s * dy - fp.offset_x;
            const double ly = -s * dx + c * dy - fp.offset_y;
            double weight;
            if (blur <= 0.0) {
                weight = (std::abs(lx) <= hx && std::abs(ly) <= hy) ? 1.0 : 0.0;
            } else {
                // isotropic blur commutes with the rotation, so the convolved
                // rectangle separates into two 1D error-function factors
                const double fx = detail::normal_cdf((hx - lx) / blur) -
                                  detail::normal_cdf((-hx - lx) / blur);
                const double fy = detail::normal_cdf((hy - ly) / blur) -
                                  detail::normal_cdf((-hy - ly) / blur);
                weight = fx * fy;
            }
            if (weight > 0.0)
                patch.at(i, j) = 0.5 + (fp.p_applied - 0.5) * weight;
        }
    }
    return patch;
}

} // namespace sogm
