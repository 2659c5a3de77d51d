#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sogm/core/error.hpp"

namespace sogm {

/// Pinhole camera with a flat-plane assumption. Camera frame: z along the
/// optical axis, x right, y down. The extrinsic maps camera coordinates to
/// vehicle coordinates; plane_height is the height of the assumed flat
/// plane in the vehicle frame (0 for ground, crop height for canopy).
struct CameraModel {
    double fu = 500.0, fv = 500.0;
    double cu = 320.0, cv = 240.0;
    int image_width = 640, image_height = 480;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity(); // camera -> vehicle
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // camera center, vehicle frame
    double plane_height = 0.0;
    double max_range = 25.0; // IPM ground-range cap; cell area diverges at the horizon

    /// Camera at `height` above the vehicle origin, looking along vehicle +x,
    /// pitched down by `pitch_down` radians.
    static CameraModel forward_tilted(double fu, double fv, double cu, double cv,
                                      int w, int h, double height, double pitch_down,
                                      double plane_height = 0.0) {
        CameraModel cam;
        cam.fu = fu; cam.fv = fv; cam.cu = cu; cam.cv = cv;
        cam.image_width = w; cam.image_height = h;
        const double ca = std::cos(pitch_down), sa = std::sin(pitch_down);
        // columns: camera x (right), y (down), z (optical) in vehicle coords
        cam.rotation.col(0) = Eigen::Vector3d(0.0, -1.0, 0.0);
        cam.rotation.col(1) = Eigen::Vector3d(-sa, 0.0, -ca);
        cam.rotation.col(2) = Eigen::Vector3d(ca, 0.0, -sa);
        cam.translation = Eigen::Vector3d(0.0, 0.0, height);
        cam.plane_height = plane_height;
        return cam;
    }

    double height() const { return translation.z(); }

    bool pixel_in_image(double u, double v) const {
        return u >= 0.0 && v >= 0.0 && u < image_width && v < image_height;
    }
};

struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

/// Projects a flat-plane point (x, y given in vehicle meters, z implied by
/// the camera's plane_height) to pixel coordinates. The pixel may fall
/// outside the image; that is reported by pixel_in_image, not an error.
/// Points at or behind the camera plane are a behind-camera error.
inline PixelCoord ground_to_pixel(const CameraModel& cam, double x, double y) {
    const Eigen::Vector3d pv(x, y, cam.plane_height);
    const Eigen::Vector3d pc = cam.rotation.transpose() * (pv - cam.translation);
    if (!(pc.z() > 1e-12))
        throw Error(ErrorCode::BehindCamera, "ground_to_pixel: point at or behind camera");
    return {cam.fu * pc.x() / pc.z() + cam.cu, cam.fv * pc.y() / pc.z() + cam.cv};
}

/// Intersects the pixel ray with the plane z = plane_height. Returns the
/// (x, y) vehicle-frame intersection, or nullopt when the ray points at or
/// above the horizon (a miss is a value, not an error).
inline std::optional<Eigen::Vector2d> pixel_to_ground(const CameraModel& cam,
                                                      double u, double v) {
    const Eigen::Vector3d dir_c((u - cam.cu) / cam.fu, (v - cam.cv) / cam.fv, 1.0);
    const Eigen::Vector3d dir_v = cam.rotation * dir_c;
    const double dz = dir_v.z();
    const double drop = cam.translation.z() - cam.plane_height;
    if (dz >= -1e-12 || drop <= 0.0) return std::nullopt;
    const double s = drop / -dz;
    return Eigen::Vector2d(cam.translation.x() + s * dir_v.x(),
                           cam.translation.y() + s * dir_v.y());
}

/// Eq.-8 style flat-plane localization error: sigma_d = (d / h) * sigma_h.
inline double depth_error(double d, double h, double sigma_h) {
    if (!(h > 0.0))
        throw Error(ErrorCode::DomainError, "depth_error: camera height must be > 0");
    if (!(d > 0.0))
        throw Error(ErrorCode::DomainError, "depth_error: distance must be > 0");
    return d / h * sigma_h;
}

/// Per-pixel class labels plus a legend mapping each label to its semantic
/// layer and classifier confidence. Label 0 is background/ground.
struct ClassifiedImage {
    int width = 0;
    int height = 0;
    std::vector<int> labels; // row-major, row 0 = top image row

    struct LegendEntry {
        std::string name;
        double confidence = 0.9; // in (0.5, 1]
    };
    std::map<int, LegendEntry> legend;

    ClassifiedImage() = default;
    ClassifiedImage(int w, int h) : width(w), height(h), labels(static_cast<size_t>(w) * h, 0) {}

    int label(int u, int v) const { return labels[static_cast<size_t>(v) * width + u]; }
    int& label(int u, int v) { return labels[static_cast<size_t>(v) * width + u]; }
};

} // namespace sogm
