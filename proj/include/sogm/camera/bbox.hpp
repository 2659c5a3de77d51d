#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "sogm/camera/model.hpp"
#include "sogm/core/types.hpp"

namespace sogm {

/// Default angular uncertainty at zero distance; grows linearly toward
/// 2x at max_range.
inline constexpr double kDefaultSigmaAz0 = 2.0 * M_PI / 180.0;

struct BoundingBoxDetection {
    double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;
    std::string class_label;
    double confidence = 0.75; // in (0.5, 1]
    double distance = 1.0;    // estimated depth d, meters
    double sigma_d = 0.0;     // depth estimate std dev, meters

    void validate() const {
        if (!(u_min < u_max && v_min < v_max))
            throw Error(ErrorCode::DomainError, "BoundingBoxDetection: degenerate pixel box");
        if (!(distance > 0.0))
            throw Error(ErrorCode::DomainError, "BoundingBoxDetection: distance must be > 0");
        if (!(confidence > 0.5 && confidence <= 1.0))
            throw Error(ErrorCode::DomainError, "BoundingBoxDetection: confidence out of (0.5, 1]");
    }
};

/// 3D object hypothesis from a bounding box: a vertical cylinder on the
/// ground plane with polar localization uncertainty.
struct CylinderHypothesis {
    Eigen::Vector2d center = Eigen::Vector2d::Zero(); // vehicle frame, meters
    double width = 0.0;
    double height = 0.0;
    double sigma_radial = 0.0;
    double sigma_angular = 0.0; // radians
    double confidence = 0.75;
    std::string class_label;
};

/// Maps the four bounding box corners to vehicle-frame coordinates at the
/// estimated depth and reduces them to a cylinder: center at the bottom-edge
/// midpoint projected to the ground, width/height from corner separations.
inline CylinderHypothesis bbox_to_cylinder(const CameraModel& cam,
                                           const BoundingBoxDetection& det,
                                           double sigma_az0 = kDefaultSigmaAz0) {
    det.validate();
    auto corner = [&](double u, double v) -> Eigen::Vector3d {
        const Eigen::Vector3d dir_c((u - cam.cu) / cam.fu, (v - cam.cv) / cam.fv, 1.0);
        // depth along the optical axis equals det.distance
        const Eigen::Vector3d pc = dir_c * det.distance;
        if (!(pc.z() > 0.0))
            throw Error(ErrorCode::BehindCamera, "bbox_to_cylinder: corner behind camera");
        return cam.rotation * pc + cam.translation;
    };
    const Eigen::Vector3d bl = corner(det.u_min, det.v_max);
    const Eigen::Vector3d br = corner(det.u_max, det.v_max);
    const Eigen::Vector3d tl = corner(det.u_min, det.v_min);
    const Eigen::Vector3d tr = corner(det.u_max, det.v_min);

    CylinderHypothesis cyl;
    cyl.center = 0.5 * (bl.head<2>() + br.head<2>());
    cyl.width = (br.head<2>() - bl.head<2>()).norm();
    cyl.height = 0.5 * ((tl.z() - bl.z()) + (tr.z() - br.z()));
    cyl.sigma_radial = det.sigma_d;
    cyl.sigma_angular = sigma_az0 * (1.0 + det.distance / cam.max_range);
    cyl.confidence = det.confidence;
    cyl.class_label = det.class_label;
    return cyl;
}

/// Cylinder to ISM: a polar Gaussian around the center (radial variance
/// sigma_r^2, tangential variance (d*sigma_ang)^2 rotated into the vehicle
/// frame), footprint enlarged by width/2, truncated to 0.5 beyond 3 sigma.
inline IsmPatch cylinder_to_patch(const CylinderHypothesis& cyl, const std::string& layer,
                                  double resolution) {
    if (!(cyl.sigma_radial >= 0.0 && cyl.sigma_angular >= 0.0))
        throw Error(ErrorCode::DomainError, "cylinder_to_patch: negative sigma");
    const double d = cyl.center.norm();
    const double angle = std::atan2(cyl.center.y(), cyl.center.x());

    const double reg = resolution / 10.0;
    const double sr = std::max(cyl.sigma_radial, reg);
    const double st = std::max(d * cyl.sigma_angular, reg);
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Eigen::Matrix2d cov = rot * Eigen::Vector2d(sr * sr, st * st).asDiagonal() * rot.transpose();
    const Eigen::Matrix2d info = cov.inverse();

    const double half = cyl.width / 2.0;
    const double rx = 3.0 * std::sqrt(cov(0, 0)) + half;
    const double ry = 3.0 * std::sqrt(cov(1, 1)) + half;
    const double x0 = std::floor((cyl.center.x() - rx) / resolution) * resolution;
    const double y0 = std::floor((cyl.center.y() - ry) / resolution) * resolution;
    const int w = static_cast<int>(std::ceil((cyl.center.x() + rx - x0) / resolution)) + 1;
    const int h = static_cast<int>(std::ceil((cyl.center.y() + ry - y0) / resolution)) + 1;

    IsmPatch patch(Pose2D(x0, y0, 0.0), resolution, w, h, layer);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            Eigen::Vector2d v(x0 + (i + 0.5) * resolution - cyl.center.x(),
                              y0 + (j + 0.5) * resolution - cyl.center.y());
            const double len = v.norm();
            // shrink the offset by the cylinder half-width: the disc interior
            // carries the peak value
            if (len > half && len > 0.0) v *= (len - half) / len;
            else v.setZero();
            const double q = v.dot(info * v);
            if (q > 9.0) continue;
            patch.at(i, j) = 0.5 + (cyl.confidence - 0.5) * std::exp(-0.5 * q);
        }
    }
    return patch;
}

} // namespace sogm
