#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "sogm/camera/bbox.hpp"
#include "sogm/camera/ipm.hpp"
#include "sogm/core/map_io.hpp"
#include "sogm/evidence/mass.hpp"
#include "sogm/lidar/splat.hpp"
#include "sogm/sim/synth.hpp"

namespace sogm {

/// Re-anchors a local-frame patch into the world via the vehicle pose.
inline IsmPatch patch_to_world(IsmPatch patch, const Pose2D& pose) {
    double wx, wy;
    pose.transform(patch.anchor.x, patch.anchor.y, wx, wy);
    patch.anchor = Pose2D(wx, wy, pose.theta + patch.anchor.theta);
    return patch;
}

struct LayerStats {
    std::string name;
    long occupied = 0;
    long free = 0;
    long unknown = 0;
    long informative = 0; // |p - 0.5| >= 0.05
    double informative_fraction = 0.0;
    double iou_vs_truth = -1.0; // -1 when no ground truth exists for the layer
};

struct RunReport {
    std::vector<LayerStats> layers;
    double conflict_max = 0.0;
    double conflict_median = 0.0;
    long conflict_over_03 = 0;
    double swath_area_m2 = 0.0;          // measured processed-layer area
    double swath_area_analytic_m2 = 0.0; // trajectory length x implement width
    double duration_s = 0.0;
};

struct RunOptions {
    bool error_propagation = true;
    std::string out_dir; // empty: no artifacts written
};

struct RunResult {
    SemanticGrid grid;
    ConflictMap conflict;
    RunReport report;
};

/// True iff the scenario geometry puts `layer` at the center of cell (i, j).
inline std::vector<uint8_t> ground_truth_mask(const Scenario& sc, const std::string& layer) {
    const GridSpec& g = sc.grid;
    std::vector<uint8_t> mask(static_cast<size_t>(g.width_cells) * g.height_cells, 0);
    for (int j = 0; j < g.height_cells; ++j)
        for (int i = 0; i < g.width_cells; ++i) {
            const double x = g.origin_x + (i + 0.5) * g.resolution;
            const double y = g.origin_y + (j + 0.5) * g.resolution;
            if (ground_truth_class(sc, x, y) == layer)
                mask[static_cast<size_t>(j) * g.width_cells + i] = 1;
        }
    return mask;
}

namespace detail {

inline void accumulate_conflict(ConflictMap& global, const GridSpec& spec,
                                const ConflictMap& local, const IsmPatch& window) {
    for (int j = 0; j < local.height; ++j)
        for (int i = 0; i < local.width; ++i) {
            const double k = local.at(i, j);
            if (k <= 0.0) continue;
            double wx, wy;
            window.cell_center(i, j, wx, wy);
            int gi, gj;
            if (!SemanticGrid::world_to_grid(spec, wx, wy, gi, gj)) continue;
            global.at(gi, gj) = std::max(global.at(gi, gj), k);
        }
}

/// Projects one obstacle disc into a bounding box detection; returns false
/// when the disc is not in front of the camera or off-image.
inline bool project_disc_to_bbox(const CameraModel& cam, const Pose2D& pose,
                                 const DiscObstacle& disc, double sigma_h,
                                 BoundingBoxDetection& det) {
    const double ch = std::cos(pose.theta), sh = std::sin(pose.theta);
    // disc center in vehicle frame
    const double rx = disc.x - pose.x, ry = disc.y - pose.y;
    const Eigen::Vector3d base_v(ch * rx + sh * ry, -sh * rx + ch * ry, 0.0);
    const Eigen::Vector3d cam_pos = cam.translation;

    auto project = [&](const Eigen::Vector3d& pv, double& u, double& v, double& depth) {
        const Eigen::Vector3d pc = cam.rotation.transpose() * (pv - cam_pos);
        depth = pc.z();
        if (!(depth > 1e-6)) return false;
        u = cam.fu * pc.x() / depth + cam.cu;
        v = cam.fv * pc.y() / depth + cam.cv;
        return true;
    };

    // lateral direction perpendicular to the viewing direction in the xy plane
    Eigen::Vector2d look(base_v.x() - cam_pos.x(), base_v.y() - cam_pos.y());
    const double dist = look.norm();
    if (dist < 1e-6) return false;
    look /= dist;
    const Eigen::Vector3d lat(-look.y(), look.x(), 0.0);

    double u0, v0, d0;
    if (!project(base_v, u0, v0, d0)) return false;
    double ul, vl, dl, ur, vr, dr, ut, vt, dt;
    if (!project(base_v - disc.radius * lat, ul, vl, dl)) return false;
    if (!project(base_v + disc.radius * lat, ur, vr, dr)) return false;
    if (!project(base_v + Eigen::Vector3d(0, 0, disc.height), ut, vt, dt)) return false;

    det.u_min = std::min(ul, ur);
    det.u_max = std::max(ul, ur);
    det.v_min = std::min({vt, v0});
    det.v_max = std::max({vt, v0});
    det.distance = d0;
    det.class_label = disc.class_name;
    det.sigma_d = depth_error(d0, cam.height(), sigma_h);
    if (det.u_max < 0 || det.u_min >= cam.image_width || det.v_max < 0 ||
        det.v_min >= cam.image_height)
        return false;
    return det.u_min < det.u_max && det.v_min < det.v_max;
}

} // namespace detail

inline RunResult run_pipeline(const Scenario& sc, const RunOptions& opt = {}) {
    const auto wall_start = std::chrono::steady_clock::now();
    RunResult result{SemanticGrid(sc.grid),
                     ConflictMap(sc.grid.width_cells, sc.grid.height_cells),
                     RunReport{}};
    SemanticGrid& grid = result.grid;
    ConflictMap& conflict = result.conflict;

    for (size_t step = 0; step < sc.trajectory.size(); ++step) {
        const double t = sc.trajectory[step].t;
        const Pose2D pose = sc.pose_at(t);
        const double ch = std::cos(pose.theta), sh = std::sin(pose.theta);

        try {
            if (sc.lidar) {
                Eigen::Matrix2d rot;
                rot << ch, -sh, sh, ch;
                for (const LidarBeam& beam : synthesize_lidar_scan(sc, t, step)) {
                    if (sc.grid.layer_index(beam.class_label) < 0) continue;
                    const Eigen::Vector3d pt_v = simplified_point(sc.lidar->mount, beam);
                    const Eigen::Vector2d mean_w =
                        rot * pt_v.head<2>() + Eigen::Vector2d(pose.x, pose.y);
                    IsmPatch patch = opt.error_propagation
                        ? splat_gaussian(mean_w,
                                         rot * simplified_covariance(sc.lidar->mount, beam) *
                                             rot.transpose(),
                                         beam.confidence, beam.class_label, sc.grid.resolution)
                        : stamp_single_cell(mean_w, beam.confidence, beam.class_label,
                                            sc.grid.resolution);
                    grid.apply_patch(patch);
                }
            }

            for (const CameraConfig& cc : sc.cameras) {
                if (cc.mode == CameraMode::BBox) {
                    for (const auto& disc : sc.obstacles) {
                        BoundingBoxDetection det;
                        det.confidence = cc.class_confidence;
                        if (!detail::project_disc_to_bbox(cc.cam, pose, disc, cc.sigma_h, det))
                            continue;
                        if (sc.grid.layer_index(det.class_label) < 0) continue;
                        const CylinderHypothesis cyl = bbox_to_cylinder(cc.cam, det);
                        IsmPatch patch =
                            cylinder_to_patch(cyl, det.class_label, sc.grid.resolution);
                        grid.apply_patch(patch_to_world(std::move(patch), pose));
                    }
                    continue;
                }

                const ClassifiedImage img = synthesize_classified_image(sc, cc, t);
                if (cc.mode == CameraMode::Contradicting) {
                    CameraModel crop_cam = cc.cam;
                    crop_cam.plane_height = cc.crop_plane_height;
                    auto [pg, pc] = contradicting_ipm(cc.cam, crop_cam, img, cc.target_class,
                                                      sc.grid.resolution);
                    IsmPatch wg = patch_to_world(std::move(pg), pose);
                    IsmPatch wc = patch_to_world(std::move(pc), pose);
                    auto [fused, local_conflict] = fuse_contradicting(wg, wc);
                    grid.apply_patch(fused);
                    detail::accumulate_conflict(conflict, sc.grid, local_conflict, fused);
                } else {
                    IsmPatch patch =
                        rasterize_classified_image(cc.cam, img, cc.target_class,
                                                   sc.grid.resolution);
                    if (!cc.tall_classes.empty())
                        patch = occlusion_cutoff(std::move(patch), cc.cam, img,
                                                 std::set<std::string>(cc.tall_classes.begin(),
                                                                       cc.tall_classes.end()));
                    grid.apply_patch(patch_to_world(std::move(patch), pose));
                }
            }

            for (size_t ci = 0; ci < sc.cones.size(); ++ci) {
                const ConeConfig& cc = sc.cones[ci];
                if (sc.grid.layer_index(cc.layer) < 0) continue;
                const ConeReading reading = synthesize_cone_reading(sc, cc, t, step, ci);
                const auto particles = sample_particles(
                    cc.model, reading, cc.particles,
                    detail::derive_seed(sc.seed, step, 0x5A3B + ci));
                if (particles.empty()) continue;
                IsmPatch patch = particles_to_patch(particles, sc.grid.resolution, cc.layer,
                                                    cc.p_max, &cc.model, &reading);
                grid.apply_patch(patch_to_world(std::move(patch), pose));
            }

            if (sc.implement) {
                const auto& im = *sc.implement;
                if (sc.grid.layer_index(im.fp.layer_name) >= 0)
                    grid.apply_patch(stamp_footprint(im.fp, pose, im.sigma_x, im.sigma_y,
                                                     im.sigma_theta, sc.grid.resolution));
            }
        } catch (const Error& e) {
            throw Error(e.code(), "timestep " + std::to_string(step) + " (t=" +
                                      std::to_string(t) + "): " + e.what());
        }
    }

    // report
    RunReport& rep = result.report;
    for (int l = 0; l < sc.grid.layers(); ++l) {
        LayerStats st;
        st.name = sc.grid.layer_names[l];
        const auto truth = ground_truth_mask(sc, st.name);
        long truth_cells = 0;
        for (auto v : truth) truth_cells += v;
        long inter = 0, uni = 0;
        const auto acc = grid.layer(l);
        for (size_t c = 0; c < acc.size(); ++c) {
            const double p = expit(acc[c]);
            if (p > 0.5 + kDefaultClassifyEps) ++st.occupied;
            else if (p < 0.5 - kDefaultClassifyEps) ++st.free;
            else ++st.unknown;
            if (std::abs(p - 0.5) >= 0.05) ++st.informative;
            const bool occ = p > 0.5 + kDefaultClassifyEps;
            if (occ && truth[c]) ++inter;
            if (occ || truth[c]) ++uni;
        }
        st.informative_fraction = static_cast<double>(st.informative) / acc.size();
        if (truth_cells > 0 && uni > 0)
            st.iou_vs_truth = static_cast<double>(inter) / uni;
        if (sc.implement && st.name == sc.implement->fp.layer_name)
            rep.swath_area_m2 = st.occupied * sc.grid.resolution * sc.grid.resolution;
        rep.layers.push_back(std::move(st));
    }
    if (sc.implement && sc.trajectory.size() > 1) {
        double len = 0.0;
        for (size_t k = 1; k < sc.trajectory.size(); ++k)
            len += std::hypot(sc.trajectory[k].pose.x - sc.trajectory[k - 1].pose.x,
                              sc.trajectory[k].pose.y - sc.trajectory[k - 1].pose.y);
        rep.swath_area_analytic_m2 = len * sc.implement->fp.width;
    }
    {
        std::vector<double> ks(conflict.k);
        std::sort(ks.begin(), ks.end());
        rep.conflict_max = ks.empty() ? 0.0 : ks.back();
        rep.conflict_median = ks.empty() ? 0.0 : ks[ks.size() / 2];
        for (double k : conflict.k)
            if (k > 0.3) ++rep.conflict_over_03;
    }
    rep.duration_s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - wall_start).count();

    if (!opt.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(opt.out_dir);
        {
            std::ofstream os(fs::path(opt.out_dir) / "map.sogm", std::ios::binary);
            save_map(grid, os);
        }
        {
            std::ofstream os(fs::path(opt.out_dir) / "conflict.pgm", std::ios::binary);
            render_conflict_pgm(conflict, os);
        }
        for (int l = 0; l < sc.grid.layers(); ++l) {
            std::ofstream os(fs::path(opt.out_dir) / (sc.grid.layer_names[l] + ".pgm"),
                             std::ios::binary);
            render_layer_pgm(grid, l, os);
        }
        nlohmann::json j;
        for (const auto& st : rep.layers)
            j["layers"][st.name] = {{"occupied", st.occupied},
                                    {"free", st.free},
                                    {"unknown", st.unknown},
                                    {"informative", st.informative},
                                    {"informative_fraction", st.informative_fraction},
                                    {"iou_vs_truth", st.iou_vs_truth}};
        j["conflict"] = {{"max", rep.conflict_max},
                         {"median", rep.conflict_median},
                         {"cells_over_0.3", rep.conflict_over_03}};
        j["swath_area_m2"] = rep.swath_area_m2;
        j["swath_area_analytic_m2"] = rep.swath_area_analytic_m2;
        j["duration_s"] = rep.duration_s;
        std::ofstream os(fs::path(opt.out_dir) / "report.json");
        os << j.dump(2) << "\n";
    }
    return result;
}

} // namespace sogm
