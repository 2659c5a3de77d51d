#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "sogm/core/error.hpp"

namespace sogm {

/// Mounting geometry and noise parameters of a downward-facing LiDAR.
/// sigma_s/phi/gamma/xi are measurement and steering-induced angular noise,
/// sigma_x/y/z positioning noise from vehicle vibration.
struct LidarMount {
    Eigen::Vector3d translation = Eigen::Vector3d::Zero(); // sensor origin, vehicle frame
    double sigma_s = 0.0;
    double sigma_phi = 0.0;
    double sigma_gamma = 0.0;
    double sigma_xi = 0.0;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double sigma_z = 0.0;
};

/// One range measurement: scalar distance plus beam angles in the sensor
/// frame, carrying the classifier's label and confidence for the hit point.
struct LidarBeam {
    double range = 0.0; // S
    double phi = 0.0;   // pitch
    double gamma = 0.0; // azimuth
    double xi = 0.0;    // roll
    std::string class_label;
    double confidence = 0.75; // in (0.5, 1]
};

struct GroundGaussian {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero(); // vehicle frame, meters
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

/// Full beam-to-point transform: X_S = R(phi,gamma,xi) * S + T with the
/// direction vector (c_phi c_gamma, c_xi s_gamma + c_gamma s_phi s_xi,
/// s_xi s_gamma - c_gamma s_phi c_xi).
inline Eigen::Vector3d beam_to_point(const LidarMount& mount, const LidarBeam& beam) {
    const double cp = std::cos(beam.phi), sp = std::sin(beam.phi);
    const double cg = std::cos(beam.gamma), sg = std::sin(beam.gamma);
    const double cx = std::cos(beam.xi), sx = std::sin(beam.xi);
    Eigen::Vector3d dir(cp * cg, cx * sg + cg * sp * sx, sx * sg - cg * sp * cx);
    return dir * beam.range + mount.translation;
}

/// Jacobian of beam_to_point w.r.t. (S, phi, gamma, xi); re-evaluated per
/// measurement, never cached across beams.
inline Eigen::Matrix<double, 3, 4> beam_jacobian(const LidarMount&, const LidarBeam& beam) {
    const double S = beam.range;
    const double cp = std::cos(beam.phi), sp = std::sin(beam.phi);
    const double cg = std::cos(beam.gamma), sg = std::sin(beam.gamma);
    const double cx = std::cos(beam.xi), sx = std::sin(beam.xi);
    Eigen::Matrix<double, 3, 4> J;
    // dX/dS
    J.col(0) << cp * cg, cx * sg + cg * sp * sx, sx * sg - cg * sp * cx;
    // dX/dphi
    J.col(1) << -S * sp * cg, S * cg * cp * sx, -S * cg * cp * cx;
    // dX/dgamma
    J.col(2) << -S * cp * sg, S * cx * cg - S * sg * sp * sx, S * sx * cg + S * sg * sp * cx;
    // dX/dxi
    J.col(3) << 0.0, -S * sx * sg + S * cg * sp * cx, S * cx * sg + S * cg * sp * sx;
    return J;
}

/// Sigma_{X_S} = J diag(s_s^2, s_phi^2, s_gamma^2, s_xi^2) J^T
///             + diag(s_x^2, s_y^2, s_z^2).
inline Eigen::Matrix3d full_covariance(const LidarMount& mount, const LidarBeam& beam) {
    const Eigen::Matrix<double, 3, 4> J = beam_jacobian(mount, beam);
    Eigen::Vector4d d(mount.sigma_s * mount.sigma_s,
                      mount.sigma_phi * mount.sigma_phi,
                      mount.sigma_gamma * mount.sigma_gamma,
                      mount.sigma_xi * mount.sigma_xi);
    Eigen::Matrix3d cov = J * d.asDiagonal() * J.transpose();
    cov(0, 0) += mount.sigma_x * mount.sigma_x;
    cov(1, 1) += mount.sigma_y * mount.sigma_y;
    cov(2, 2) += mount.sigma_z * mount.sigma_z;
    // symmetrize against rounding
    return 0.5 * (cov + cov.transpose());
}

/// Simplified planar model: roll omitted, z-uncertainty dropped.
/// X'_S = (c_phi c_gamma, s_gamma, -c_gamma s_phi) S + T.
inline Eigen::Vector3d simplified_point(const LidarMount& mount, const LidarBeam& beam) {
    const double cp = std::cos(beam.phi), sp = std::sin(beam.phi);
    const double cg = std::cos(beam.gamma), sg = std::sin(beam.gamma);
    Eigen::Vector3d dir(cp * cg, sg, -cg * sp);
    return dir * beam.range + mount.translation;
}

/// 2x3 Jacobian of the simplified xy-projection w.r.t. (S, phi, gamma).
inline Eigen::Matrix<double, 2, 3> simplified_jacobian(const LidarBeam& beam) {
    const double S = beam.range;
    const double cp = std::cos(beam.phi), sp = std::sin(beam.phi);
    const double cg = std::cos(beam.gamma), sg = std::sin(beam.gamma);
    Eigen::Matrix<double, 2, 3> J;
    J << cp * cg, -S * sp * cg, -S * cp * sg,
         sg,      0.0,          S * cg;
    return J;
}

/// Sigma_{X'_S} = J' diag(s_s^2, s_phi^2, s_gamma^2) J'^T + diag(s_x^2, s_y^2).
inline Eigen::Matrix2d simplified_covariance(const LidarMount& mount, const LidarBeam& beam) {
    const Eigen::Matrix<double, 2, 3> J = simplified_jacobian(beam);
    Eigen::Vector3d d(mount.sigma_s * mount.sigma_s,
                      mount.sigma_phi * mount.sigma_phi,
                      mount.sigma_gamma * mount.sigma_gamma);
    Eigen::Matrix2d cov = J * d.asDiagonal() * J.transpose();
    cov(0, 0) += mount.sigma_x * mount.sigma_x;
    cov(1, 1) += mount.sigma_y * mount.sigma_y;
    return 0.5 * (cov + cov.transpose());
}

} // namespace sogm
