#pragma once

#include <cmath>
#include <set>
#include <string>

#include "sogm/camera/model.hpp"
#include "sogm/core/types.hpp"

namespace sogm {

/// Occupancy value for plane cells that are visible but not detected as the
/// target class ("below 0.5"); bounded evidence per frame.
inline constexpr double kVisibleFreeProb = 0.3;

namespace detail {

/// Square rasterization window of side 2*max_range centered on the camera
/// footprint, snapped to the resolution lattice. Depends only on the camera
/// position and range cap so dual-plane patches align exactly.
inline IsmPatch make_frustum_window(const CameraModel& cam, const std::string& layer,
                                    double resolution) {
    const double cx = cam.translation.x();
    const double cy = cam.translation.y();
    const double x0 = std::floor((cx - cam.max_range) / resolution) * resolution;
    const double y0 = std::floor((cy - cam.max_range) / resolution) * resolution;
    const int n = static_cast<int>(std::ceil(2.0 * cam.max_range / resolution)) + 1;
    return IsmPatch(Pose2D(x0, y0, 0.0), resolution, n, n, layer);
}

} // namespace detail

/// Rectifies a classified image onto the camera's flat plane. Cell values:
/// class confidence where the cell back-projects to pixels of the target
/// class, kVisibleFreeProb where visible but another class, exactly 0.5
/// outside the frustum or beyond max_range.
inline IsmPatch rasterize_classified_image(const CameraModel& cam,
                                           const ClassifiedImage& img,
                                           const std::string& target_class,
                                           double resolution) {
    int target_label = -1;
    for (const auto& [label, entry] : img.legend)
        if (entry.name == target_class) target_label = label;
    if (target_label < 0)
        throw Error(ErrorCode::DomainError,
                    "rasterize_classified_image: class not in legend: " + target_class);
    const double conf = img.legend.at(target_label).confidence;

    IsmPatch patch = detail::make_frustum_window(cam, target_class, resolution);
    const double cx = cam.translation.x();
    const double cy = cam.translation.y();
    for (int j = 0; j < patch.height; ++j) {
        for (int i = 0; i < patch.width; ++i) {
            double wx, wy;
            patch.cell_center(i, j, wx, wy);
            if (std::hypot(wx - cx, wy - cy) > cam.max_range) continue;
            PixelCoord px;
            try {
                px = ground_to_pixel(cam, wx, wy);
            } catch (const Error&) {
                continue; // behind camera: no information
            }
            if (!cam.pixel_in_image(px.u, px.v)) continue;
            const int label = img.label(static_cast<int>(px.u), static_cast<int>(px.v));
            patch.at(i, j) = (label == target_label) ? conf : kVisibleFreeProb;
        }
    }
    return patch;
}

/// Naive tall-object handling: rays are marched from the camera footprint
/// outward; every cell strictly beyond the first cell whose back-projection
/// hits a tall-class pixel is reset to 0.5 (unknown).
inline IsmPatch occlusion_cutoff(IsmPatch patch, const CameraModel& cam,
                                 const ClassifiedImage& img,
                                 const std::set<std::string>& tall_classes) {
    std::set<int> tall_labels;
    for (const auto& [label, entry] : img.legend)
        if (tall_classes.count(entry.name)) tall_labels.insert(label);
    if (tall_labels.empty()) return patch;

    const double res = patch.resolution;
    const double cx = cam.translation.x();
    const double cy = cam.translation.y();

    auto is_tall_cell = [&](int ci, int cj) {
        double wx, wy;
        patch.cell_center(ci, cj, wx, wy);
        try {
            const PixelCoord px = ground_to_pixel(cam, wx, wy);
            if (!cam.pixel_in_image(px.u, px.v)) return false;
            return tall_labels.count(
                       img.label(static_cast<int>(px.u), static_cast<int>(px.v))) > 0;
        } catch (const Error&) {
            return false;
        }
    };

    auto march_ray = [&](int bi, int bj) {
        double tx, ty;
        patch.cell_center(bi, bj, tx, ty);
        const double dist = std::hypot(tx - cx, ty - cy);
        if (dist < res) return;
        const double ux = (tx - cx) / dist, uy = (ty - cy) / dist;
        bool occluded = false;
        int hit_i = -1, hit_j = -1;
        for (double s = 0.0; s <= dist; s += 0.5 * res) {
            const int ci = static_cast<int>(std::floor((cx + s * ux - patch.anchor.x) / res));
            const int cj = static_cast<int>(std::floor((cy + s * uy - patch.anchor.y) / res));
            if (ci < 0 || cj < 0 || ci >= patch.width || cj >= patch.height) continue;
            if (occluded) {
                if (ci != hit_i || cj != hit_j) patch.at(ci, cj) = 0.5;
            } else if (is_tall_cell(ci, cj)) {
                occluded = true;
                hit_i = ci;
                hit_j = cj;
            }
        }
    };

    for (int i = 0; i < patch.width; ++i) {
        march_ray(i, 0);
        march_ray(i, patch.height - 1);
    }
    for (int j = 1; j < patch.height - 1; ++j) {
        march_ray(0, j);
        march_ray(patch.width - 1, j);
    }
    return patch;
}

/// Contradicting IPM: the same classified image rectified under the ground
/// plane and under the crop plane. The two patches share anchor, size and
/// resolution; fusing them into a conflict map is the evidence module's job.
inline std::pair<IsmPatch, IsmPatch>
contradicting_ipm(const CameraModel& cam_ground, const CameraModel& cam_crop,
                  const ClassifiedImage& img, const std::string& target_class,
                  double resolution) {
    if (cam_ground.plane_height != 0.0)
        throw Error(ErrorCode::DomainError, "contradicting_ipm: ground camera plane must be 0");
    if (cam_crop.plane_height < 0.0)
        throw Error(ErrorCode::DomainError, "contradicting_ipm: negative crop height");
    if (cam_crop.plane_height >= cam_crop.height())
        throw Error(ErrorCode::DomainError,
                    "contradicting_ipm: crop plane at or above camera height");
    IsmPatch ground = rasterize_classified_image(cam_ground, img, target_class, resolution);
    IsmPatch crop = rasterize_classified_image(cam_crop, img, target_class, resolution);
    return {std::move(ground), std::move(crop)};
}

} // namespace sogm
