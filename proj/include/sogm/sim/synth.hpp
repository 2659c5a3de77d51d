#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sogm/camera/model.hpp"
#include "sogm/sim/scenario.hpp"

namespace sogm {

namespace detail {

/// splitmix64-style stream derivation so every (seed, step, sensor) pair
/// gets an independent deterministic generator.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Beta(8,2) via two gamma draws, clipped into (0.5, 1]; stands in for a
/// classifier's confidence output.
inline double sample_confidence(std::mt19937_64& rng) {
    std::gamma_distribution<double> ga(8.0, 1.0), gb(2.0, 1.0);
    const double x = ga(rng), y = gb(rng);
    const double v = x / (x + y);
    return std::clamp(v, 0.5 + 1e-6, 1.0);
}

} // namespace detail

struct RayHit {
    double s = std::numeric_limits<double>::infinity();
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    std::string label; // scenario layer/class name; empty = miss
};

/// Casts a world-frame ray against the flat ground, crop canopies and
/// obstacle cylinders; returns the nearest hit.
inline RayHit ray_cast(const Scenario& sc, const Eigen::Vector3d& origin,
                       const Eigen::Vector3d& dir) {
    RayHit best;
    auto consider = [&](double s, const std::string& label) {
        if (s > 1e-9 && s < best.s) {
            best.s = s;
            best.point = origin + s * dir;
            best.label = label;
        }
    };

    if (dir.z() < -1e-12) {
        consider(origin.z() / -dir.z(), sc.ground_layer);
        for (const auto& c : sc.crops) {
            if (origin.z() <= c.height) continue;
            const double s = (origin.z() - c.height) / -dir.z();
            const Eigen::Vector3d p = origin + s * dir;
            if (c.contains(p.x(), p.y())) consider(s, c.layer);
        }
    }
    for (const auto& o : sc.obstacles) {
        // ray vs infinite cylinder in xy, clipped to z in [0, height]
        const double dx = dir.x(), dy = dir.y();
        const double ox = origin.x() - o.x, oy = origin.y() - o.y;
        const double a = dx * dx + dy * dy;
        if (a < 1e-15) continue;
        const double bq = 2.0 * (ox * dx + oy * dy);
        const double cq = ox * ox + oy * oy - o.radius * o.radius;
        const double disc = bq * bq - 4.0 * a * cq;
        if (disc < 0.0) continue;
        const double sq = std::sqrt(disc);
        for (double s : {(-bq - sq) / (2.0 * a), (-bq + sq) / (2.0 * a)}) {
            if (s <= 1e-9) continue;
            const double z = origin.z() + s * dir.z();
            if (z >= 0.0 && z <= o.height) {
                consider(s, o.class_name);
                break;
            }
        }
    }
    return best;
}

/// True class of the environment at a ground point (crop region wins over
/// ground; obstacles win over both).
inline std::string ground_truth_class(const Scenario& sc, double x, double y) {
    for (const auto& o : sc.obstacles)
        if (std::hypot(x - o.x, y - o.y) <= o.radius) return o.class_name;
    for (const auto& c : sc.crops)
        if (c.contains(x, y)) return c.layer;
    return sc.ground_layer;
}

/// Synthesizes one LiDAR scan at time t: the configured azimuth fan is cast
/// from the interpolated pose; measurement noise and pose jitter are drawn
/// per the mount's sigma values (scaled by the scenario's noise_scale) and
/// folded into the reported range while the beams keep their nominal angles.
inline std::vector<LidarBeam> synthesize_lidar_scan(const Scenario& sc, double t,
                                                    uint64_t step_index) {
    if (!sc.lidar) return {};
    const LidarConfig& lc = *sc.lidar;
    const Pose2D pose = sc.pose_at(t);
    std::mt19937_64 rng(detail::derive_seed(sc.seed, step_index, 0x11dA4));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double ns = sc.noise_scale;

    const double ch = std::cos(pose.theta), sh = std::sin(pose.theta);
    std::vector<LidarBeam> beams;
    beams.reserve(lc.gammas.size());
    for (double gamma : lc.gammas) {
        // true beam geometry: nominal angles plus steering jitter, sensor
        // origin plus vibration jitter
        const double phi_t = lc.pitch + ns * lc.mount.sigma_phi * gauss(rng);
        const double gamma_t = gamma + ns * lc.mount.sigma_gamma * gauss(rng);
        const double xi_t = ns * lc.mount.sigma_xi * gauss(rng);
        Eigen::Vector3d jitter(ns * lc.mount.sigma_x * gauss(rng),
                               ns * lc.mount.sigma_y * gauss(rng),
                               ns * lc.mount.sigma_z * gauss(rng));
        const double range_noise = ns * lc.mount.sigma_s * gauss(rng);
        const double conf = detail::sample_confidence(rng);

        const double cp = std::cos(phi_t), sp = std::sin(phi_t);
        const double cg = std::cos(gamma_t), sg = std::sin(gamma_t);
        const double cx = std::cos(xi_t), sx = std::sin(xi_t);
        const Eigen::Vector3d dir_v(cp * cg, cx * sg + cg * sp * sx, sx * sg - cg * sp * cx);
        const Eigen::Vector3d dir_w(ch * dir_v.x() - sh * dir_v.y(),
                                    sh * dir_v.x() + ch * dir_v.y(), dir_v.z());
        const Eigen::Vector3d sensor_v = lc.mount.translation + jitter;
        Eigen::Vector3d origin_w(pose.x + ch * sensor_v.x() - sh * sensor_v.y(),
                                 pose.y + sh * sensor_v.x() + ch * sensor_v.y(),
                                 sensor_v.z());
        const RayHit hit = ray_cast(sc, origin_w, dir_w);
        if (!std::isfinite(hit.s)) continue;

        LidarBeam beam;
        beam.range = std::max(1e-3, hit.s + range_noise);
        beam.phi = lc.pitch;
        beam.gamma = gamma;
        beam.xi = 0.0;
        beam.class_label = hit.label;
        beam.confidence = conf;
        beams.push_back(std::move(beam));
    }
    return beams;
}

/// Renders the ground-truth scene through the pinhole camera: per pixel the
/// nearest intersection in painter's order decides the label. Ground maps
/// to background label 0; every other class gets a stable legend id.
inline ClassifiedImage synthesize_classified_image(const Scenario& sc,
                                                   const CameraConfig& cc, double t) {
    const Pose2D pose = sc.pose_at(t);
    const CameraModel& cam = cc.cam;
    ClassifiedImage img(cam.image_width, cam.image_height);

    // stable legend: all non-ground classes of the scenario, sorted
    std::map<std::string, int> ids;
    for (const auto& c : sc.crops) ids.emplace(c.layer, 0);
    for (const auto& o : sc.obstacles) ids.emplace(o.class_name, 0);
    int next = 1;
    for (auto& [name, id] : ids) {
        id = next++;
        img.legend[id] = {name, cc.class_confidence};
    }

    const double ch = std::cos(pose.theta), sh = std::sin(pose.theta);
    const Eigen::Vector3d cam_v = cam.translation;
    const Eigen::Vector3d origin_w(pose.x + ch * cam_v.x() - sh * cam_v.y(),
                                   pose.y + sh * cam_v.x() + ch * cam_v.y(), cam_v.z());
    for (int v = 0; v < cam.image_height; ++v) {
        for (int u = 0; u < cam.image_width; ++u) {
            const Eigen::Vector3d dir_c((u + 0.5 - cam.cu) / cam.fu,
                                        (v + 0.5 - cam.cv) / cam.fv, 1.0);
            const Eigen::Vector3d dir_v = cam.rotation * dir_c;
            const Eigen::Vector3d dir_w(ch * dir_v.x() - sh * dir_v.y(),
                                        sh * dir_v.x() + ch * dir_v.y(), dir_v.z());
            const RayHit hit = ray_cast(sc, origin_w, dir_w);
            if (!std::isfinite(hit.s) || hit.label == sc.ground_layer) continue;
            const auto it = ids.find(hit.label);
            if (it != ids.end()) img.label(u, v) = it->second;
        }
    }
    return img;
}

/// Synthesizes a cone sensor reading by casting the sensor axis against the
/// obstacle discs in 2D; no echo when nothing lies within max_range.
inline ConeReading synthesize_cone_reading(const Scenario& sc, const ConeConfig& cc,
                                           double t, uint64_t step_index,
                                           uint64_t sensor_index) {
    const Pose2D pose = sc.pose_at(t);
    double sx, sy;
    pose.transform(cc.model.mount.x, cc.model.mount.y, sx, sy);
    const double heading = pose.theta + cc.model.mount.theta;
    const Eigen::Vector3d origin(sx, sy, 0.5); // nominal sensor height
    const Eigen::Vector3d dir(std::cos(heading), std::sin(heading), 0.0);

    Scenario obstacles_only = sc; // cones only react to discs
    obstacles_only.crops.clear();
    const RayHit hit = ray_cast(obstacles_only, origin, dir);

    ConeReading reading;
    reading.timestamp = t;
    if (std::isfinite(hit.s) && hit.s <= cc.model.max_range && hit.label != sc.ground_layer) {
        std::mt19937_64 rng(detail::derive_seed(sc.seed, step_index, 0xC04E + sensor_index));
        std::normal_distribution<double> gauss(0.0, 1.0);
        const double r = hit.s + sc.noise_scale * cc.model.sigma_range * gauss(rng);
        reading.range = std::clamp(r, 1e-3, cc.model.max_range);
    }
    return reading;
}

} // namespace sogm
