#pragma once

#include <cmath>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sogm/app/footprint.hpp"
#include "sogm/camera/model.hpp"
#include "sogm/cone/cone.hpp"
#include "sogm/core/grid.hpp"
#include "sogm/lidar/beam.hpp"

namespace sogm {

struct CropRegion {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    double height = 0.5;
    std::string layer = "crop";

    bool contains(double x, double y) const {
        return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
    }
};

struct DiscObstacle {
    double x = 0, y = 0;
    double radius = 0.5;
    double height = 2.0;
    std::string class_name = "obstacle";
};

struct TrajectoryPoint {
    double t = 0.0;
    Pose2D pose;
};

struct LidarConfig {
    LidarMount mount;
    double pitch = M_PI / 4.0;  // fixed downward pitch of the scan fan
    std::vector<double> gammas; // azimuth pattern per scan
};

enum class CameraMode { Single, Contradicting, BBox };

struct CameraConfig {
    CameraModel cam;             // vehicle-frame extrinsics, ground plane
    CameraMode mode = CameraMode::Single;
    double crop_plane_height = 0.0; // contradicting mode second plane
    std::string target_class = "crop";
    double class_confidence = 0.9;
    std::vector<std::string> tall_classes; // occlusion cutoff in single mode
    double sigma_h = 0.1; // plane-height error driving bbox sigma_d
};

struct ConeConfig {
    ConeSensorModel model;
    std::string layer = "obstacle";
    double p_max = 0.8;
    int particles = kDefaultParticleCount;
};

struct ImplementConfig {
    ImplementFootprint fp;
    double sigma_x = 0.0, sigma_y = 0.0, sigma_theta = 0.0;
};

struct Scenario {
    GridSpec grid;
    std::string ground_layer = "ground";
    std::vector<CropRegion> crops;
    std::vector<DiscObstacle> obstacles;
    std::vector<TrajectoryPoint> trajectory;
    std::optional<LidarConfig> lidar;
    std::vector<CameraConfig> cameras;
    std::vector<ConeConfig> cones;
    std::optional<ImplementConfig> implement;
    uint64_t seed = 1;
    double noise_scale = 1.0; // scales all synthesis noise; 0 = exact readings

    double t_begin() const { return trajectory.empty() ? 0.0 : trajectory.front().t; }
    double t_end() const { return trajectory.empty() ? 0.0 : trajectory.back().t; }

    /// Linear position, shortest-arc heading between surrounding points.
    Pose2D pose_at(double t) const {
        if (trajectory.empty() || t < t_begin() - 1e-9 || t > t_end() + 1e-9)
            throw Error(ErrorCode::OutOfTimeSpan, "pose_at: t outside trajectory span");
        if (trajectory.size() == 1) return trajectory.front().pose;
        size_t k = 1;
        while (k + 1 < trajectory.size() && trajectory[k].t < t) ++k;
        const auto& a = trajectory[k - 1];
        const auto& b = trajectory[k];
        const double span = b.t - a.t;
        const double u = span > 0.0 ? std::clamp((t - a.t) / span, 0.0, 1.0) : 0.0;
        const double dth = wrap_angle(b.pose.theta - a.pose.theta);
        return Pose2D(a.pose.x + u * (b.pose.x - a.pose.x),
                      a.pose.y + u * (b.pose.y - a.pose.y),
                      a.pose.theta + u * dth);
    }
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& s) {
    std::istringstream ss(s);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    return out;
}

inline double deg(double d) { return d * M_PI / 180.0; }

} // namespace detail

/// Line-oriented scenario config: "[section]" headers, "key = value" lines,
/// "#" comments. Sections [crop], [obstacle], [camera], [cone] repeat.
inline Scenario load_scenario(std::istream& is) {
    Scenario sc;
    sc.grid.resolution = 0.1;
    std::string section;
    std::string line;
    int line_no = 0;
    double field_w = 0.0, field_h = 0.0;

    auto fail = [&](const std::string& msg) -> void {
        throw Error(ErrorCode::BadConfig,
                    "scenario: line " + std::to_string(line_no) + ": " + msg);
    };

    auto require_nums = [&](const std::string& v, size_t n) {
        auto nums = detail::parse_numbers(v);
        if (nums.size() != n) fail("expected " + std::to_string(n) + " numbers");
        return nums;
    };

    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream probe(line);
        std::string first;
        if (!(probe >> first)) continue;

        if (first.front() == '[') {
            section = first.substr(1, first.find(']') - 1);
            if (section == "crop") sc.crops.emplace_back();
            else if (section == "obstacle") sc.obstacles.emplace_back();
            else if (section == "camera") sc.cameras.emplace_back();
            else if (section == "cone") sc.cones.emplace_back();
            else if (section == "lidar") sc.lidar.emplace();
            else if (section == "implement") sc.implement.emplace();
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        std::string key = first;
        if (key.find('=') != std::string::npos) key = key.substr(0, key.find('='));
        std::string value = line.substr(eq + 1);
        // trim
        const auto b = value.find_first_not_of(" \t");
        if (b == std::string::npos) fail("missing value for '" + key + "'");
        value = value.substr(b, value.find_last_not_of(" \t") - b + 1);

        if (section == "field") {
            if (key == "origin") {
                auto n = require_nums(value, 2);
                sc.grid.origin_x = n[0]; sc.grid.origin_y = n[1];
            } else if (key == "size_m") {
                auto n = require_nums(value, 2);
                field_w = n[0]; field_h = n[1];
            } else if (key == "resolution") {
                sc.grid.resolution = require_nums(value, 1)[0];
            } else if (key == "layers") {
                std::istringstream ls(value);
                std::string name;
                while (std::getline(ls, name, ','))
                    if (!name.empty()) sc.grid.layer_names.push_back(name);
            } else if (key == "ground_layer") {
                sc.ground_layer = value;
            } else fail("unknown [field] key '" + key + "'");
        } else if (section == "sim") {
            if (key == "seed") sc.seed = static_cast<uint64_t>(require_nums(value, 1)[0]);
            else if (key == "noise_scale") sc.noise_scale = require_nums(value, 1)[0];
            else fail("unknown [sim] key '" + key + "'");
        } else if (section == "crop") {
            auto& c = sc.crops.back();
            if (key == "rect") {
                auto n = require_nums(value, 4);
                c.xmin = n[0]; c.ymin = n[1]; c.xmax = n[2]; c.ymax = n[3];
            } else if (key == "height") c.height = require_nums(value, 1)[0];
            else if (key == "layer") c.layer = value;
            else fail("unknown [crop] key '" + key + "'");
        } else if (section == "obstacle") {
            auto& o = sc.obstacles.back();
            if (key == "center") {
                auto n = require_nums(value, 2);
                o.x = n[0]; o.y = n[1];
            } else if (key == "radius") o.radius = require_nums(value, 1)[0];
            else if (key == "height") o.height = require_nums(value, 1)[0];
            else if (key == "class") o.class_name = value;
            else fail("unknown [obstacle] key '" + key + "'");
        } else if (section == "trajectory") {
            if (key == "point") {
                auto n = require_nums(value, 4);
                sc.trajectory.push_back({n[0], Pose2D(n[1], n[2], detail::deg(n[3]))});
            } else if (key == "line") {
                // x0 y0 heading_deg length speed dt
                auto n = require_nums(value, 6);
                const double th = detail::deg(n[2]);
                const double steps = std::floor(n[3] / (n[4] * n[5]));
                for (int k = 0; k <= static_cast<int>(steps); ++k) {
                    const double t = k * n[5];
                    const double dist = n[4] * t;
                    sc.trajectory.push_back(
                        {t, Pose2D(n[0] + dist * std::cos(th), n[1] + dist * std::sin(th), th)});
                }
            } else fail("unknown [trajectory] key '" + key + "'");
        } else if (section == "lidar") {
            auto& l = *sc.lidar;
            if (key == "mount") {
                auto n = require_nums(value, 3);
                l.mount.translation = Eigen::Vector3d(n[0], n[1], n[2]);
            } else if (key == "pitch_deg") l.pitch = detail::deg(require_nums(value, 1)[0]);
            else if (key == "gamma_deg") {
                auto n = require_nums(value, 3); // min max step
                if (!(n[2] > 0.0)) fail("gamma step must be > 0");
                for (double g = n[0]; g <= n[1] + 1e-9; g += n[2])
                    l.gammas.push_back(detail::deg(g));
            } else if (key == "sigma_s") l.mount.sigma_s = require_nums(value, 1)[0];
            else if (key == "sigma_phi_deg") l.mount.sigma_phi = detail::deg(require_nums(value, 1)[0]);
            else if (key == "sigma_gamma_deg") l.mount.sigma_gamma = detail::deg(require_nums(value, 1)[0]);
            else if (key == "sigma_xi_deg") l.mount.sigma_xi = detail::deg(require_nums(value, 1)[0]);
            else if (key == "sigma_x") l.mount.sigma_x = require_nums(value, 1)[0];
            else if (key == "sigma_y") l.mount.sigma_y = require_nums(value, 1)[0];
            else if (key == "sigma_z") l.mount.sigma_z = require_nums(value, 1)[0];
            else fail("unknown [lidar] key '" + key + "'");
        } else if (section == "camera") {
            auto& cc = sc.cameras.back();
            if (key == "intrinsics") {
                auto n = require_nums(value, 4);
                cc.cam.fu = n[0]; cc.cam.fv = n[1]; cc.cam.cu = n[2]; cc.cam.cv = n[3];
            } else if (key == "image_size") {
                auto n = require_nums(value, 2);
                cc.cam.image_width = static_cast<int>(n[0]);
                cc.cam.image_height = static_cast<int>(n[1]);
            } else if (key == "height") {
                const double h = require_nums(value, 1)[0];
                cc.cam = CameraModel::forward_tilted(cc.cam.fu, cc.cam.fv, cc.cam.cu, cc.cam.cv,
                                                     cc.cam.image_width, cc.cam.image_height,
                                                     h, 0.0);
            } else if (key == "pitch_deg") {
                cc.cam = CameraModel::forward_tilted(cc.cam.fu, cc.cam.fv, cc.cam.cu, cc.cam.cv,
                                                     cc.cam.image_width, cc.cam.image_height,
                                                     cc.cam.height(),
                                                     detail::deg(require_nums(value, 1)[0]));
            } else if (key == "max_range") cc.cam.max_range = require_nums(value, 1)[0];
            else if (key == "mode") {
                if (value == "single") cc.mode = CameraMode::Single;
                else if (value == "contradicting") cc.mode = CameraMode::Contradicting;
                else if (value == "bbox") cc.mode = CameraMode::BBox;
                else fail("unknown camera mode '" + value + "'");
            } else if (key == "crop_plane") cc.crop_plane_height = require_nums(value, 1)[0];
            else if (key == "target_class") cc.target_class = value;
            else if (key == "confidence") cc.class_confidence = require_nums(value, 1)[0];
            else if (key == "tall_class") cc.tall_classes.push_back(value);
            else if (key == "sigma_h") cc.sigma_h = require_nums(value, 1)[0];
            else fail("unknown [camera] key '" + key + "'");
        } else if (section == "cone") {
            auto& co = sc.cones.back();
            if (key == "kind") {
                auto k = parse_cone_kind(value);
                if (!k) fail("unknown cone kind '" + value + "'");
                co.model.kind = *k;
            } else if (key == "max_range") co.model.max_range = require_nums(value, 1)[0];
            else if (key == "half_angle_deg") co.model.half_angle = detail::deg(require_nums(value, 1)[0]);
            else if (key == "sigma_range") co.model.sigma_range = require_nums(value, 1)[0];
            else if (key == "sigma_bearing_deg") co.model.sigma_bearing = detail::deg(require_nums(value, 1)[0]);
            else if (key == "mount") {
                auto n = require_nums(value, 3); // x y yaw_deg
                co.model.mount = Pose2D(n[0], n[1], detail::deg(n[2]));
            } else if (key == "layer") co.layer = value;
            else if (key == "p_max") co.p_max = require_nums(value, 1)[0];
            else if (key == "particles") co.particles = static_cast<int>(require_nums(value, 1)[0]);
            else fail("unknown [cone] key '" + key + "'");
        } else if (section == "implement") {
            auto& im = *sc.implement;
            if (key == "width_m") im.fp.width = require_nums(value, 1)[0];
            else if (key == "depth_m") im.fp.depth = require_nums(value, 1)[0];
            else if (key == "offset_x_m") im.fp.offset_x = require_nums(value, 1)[0];
            else if (key == "offset_y_m") im.fp.offset_y = require_nums(value, 1)[0];
            else if (key == "p_applied") im.fp.p_applied = require_nums(value, 1)[0];
            else if (key == "layer") im.fp.layer_name = value;
            else if (key == "sigma_pose") {
                auto n = require_nums(value, 3); // sx sy stheta_deg
                im.sigma_x = n[0]; im.sigma_y = n[1]; im.sigma_theta = detail::deg(n[2]);
            } else fail("unknown [implement] key '" + key + "'");
        } else {
            fail("key outside of a known section");
        }
    }

    if (!(field_w > 0.0 && field_h > 0.0))
        throw Error(ErrorCode::BadConfig, "scenario: [field] size_m missing");
    sc.grid.width_cells = static_cast<int>(std::lround(field_w / sc.grid.resolution));
    sc.grid.height_cells = static_cast<int>(std::lround(field_h / sc.grid.resolution));
    try {
        sc.grid.validate();
    } catch (const Error& e) {
        // an inconsistent [field] section is a config error, not a grid bug
        throw Error(ErrorCode::BadConfig, std::string("scenario: ") + e.what());
    }
    if (sc.trajectory.empty())
        throw Error(ErrorCode::BadConfig, "scenario: empty trajectory");
    for (size_t i = 1; i < sc.trajectory.size(); ++i)
        if (!(sc.trajectory[i].t > sc.trajectory[i - 1].t))
            throw Error(ErrorCode::BadConfig, "scenario: trajectory timestamps must increase");
    return sc;
}

} // namespace sogm
