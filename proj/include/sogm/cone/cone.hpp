#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sogm/core/types.hpp"

namespace sogm {

enum class ConeKind { Lidar, Sonar, Proximity };

inline const char* cone_kind_name(ConeKind k) {
    switch (k) {
    case ConeKind::Lidar: return "lidar";
    case ConeKind::Sonar: return "sonar";
    default: return "proximity";
    }
}

inline std::optional<ConeKind> parse_cone_kind(const std::string& s) {
    if (s == "lidar") return ConeKind::Lidar;
    if (s == "sonar") return ConeKind::Sonar;
    if (s == "proximity") return ConeKind::Proximity;
    return std::nullopt;
}

/// Qualitative cone sensor: poor angular and/or distance resolution,
/// described by an opening half-angle and range/bearing noise.
struct ConeSensorModel {
    ConeKind kind = ConeKind::Sonar;
    double max_range = 5.0;
    double half_angle = 15.0 * M_PI / 180.0; // in (0, pi/2]
    double sigma_range = 0.1;
    double sigma_bearing = 0.0;
    Pose2D mount; // sensor pose in the vehicle frame

    void validate() const {
        if (!(max_range > 0.0))
            throw Error(ErrorCode::DomainError, "ConeSensorModel: max_range must be > 0");
        if (!(half_angle > 0.0 && half_angle <= M_PI / 2.0))
            throw Error(ErrorCode::DomainError, "ConeSensorModel: half_angle out of (0, pi/2]");
        if (sigma_range < 0.0 || sigma_bearing < 0.0)
            throw Error(ErrorCode::DomainError, "ConeSensorModel: negative sigma");
    }
};

/// One reading; no value means no echo.
struct ConeReading {
    std::optional<double> range;
    double timestamp = 0.0;
};

/// Inverse-particle-filter sampling: draws n points from the sensor's
/// uncertainty distribution. Bearing is uniform over the cone convolved with
/// Gaussian sigma_bearing; range is Gaussian around the reading (uniform
/// over (0, r] for proximity sensors). Deterministic for a fixed seed.
inline std::vector<Eigen::Vector2d> sample_particles(const ConeSensorModel& model,
                                                     const ConeReading& reading,
                                                     int n, uint64_t seed) {
    model.validate();
    if (n < 1)
        throw Error(ErrorCode::DomainError, "sample_particles: n must be >= 1");
    if (!reading.range) return {};
    const double r = *reading.range;
    if (!(r > 0.0 && r <= model.max_range))
        throw Error(ErrorCode::DomainError, "sample_particles: range out of (0, max_range]");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> cone(-model.half_angle, model.half_angle);
    std::normal_distribution<double> bearing_noise(0.0, 1.0);
    std::normal_distribution<double> range_noise(0.0, 1.0);
    std::uniform_real_distribution<double> prox(0.0, 1.0);

    std::vector<Eigen::Vector2d> points;
    points.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double b = cone(rng) + model.sigma_bearing * bearing_noise(rng);
        double rr;
        if (model.kind == ConeKind::Proximity) {
            rr = r * (1.0 - prox(rng)); // uniform over (0, r]
        } else {
            rr = r + model.sigma_range * range_noise(rng);
            rr = std::clamp(rr, 1e-6, model.max_range);
        }
        double wx, wy;
        model.mount.transform(rr * std::cos(b), rr * std::sin(b), wx, wy);
        points.emplace_back(wx, wy);
    }
    return points;
}

/// Histograms particles into a patch: cell value scales linearly from 0.5
/// (empty) to p_max (fullest cell). For ranging kinds, cells strictly inside
/// the cone closer than r - 2*sigma_range get weak free-space evidence.
inline IsmPatch particles_to_patch(const std::vector<Eigen::Vector2d>& points,
                                   double resolution, const std::string& layer,
                                   double p_max,
                                   const ConeSensorModel* model = nullptr,
                                   const ConeReading* reading = nullptr) {
    if (!(p_max > 0.5 && p_max <= 1.0))
        throw Error(ErrorCode::DomainError, "particles_to_patch: p_max out of (0.5, 1]");
    if (points.empty())
        return IsmPatch(Pose2D(0, 0, 0), resolution, 1, 1, layer); // valid all-0.5 no-op

    double xmin = points[0].x(), xmax = xmin, ymin = points[0].y(), ymax = ymin;
    for (const auto& p : points) {
        xmin = std::min(xmin, p.x()); xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y()); ymax = std::max(ymax, p.y());
    }
    bool carve = model && reading && reading->range &&
                 model->kind != ConeKind::Proximity;
    if (carve) {
        // include the sensor origin so the free-space cone fits in the patch
        xmin = std::min(xmin, model->mount.x); xmax = std::max(xmax, model->mount.x);
        ymin = std::min(ymin, model->mount.y); ymax = std::max(ymax, model->mount.y);
    }
    const double x0 = std::floor(xmin / resolution) * resolution;
    const double y0 = std::floor(ymin / resolution) * resolution;
    const int w = static_cast<int>(std::ceil((xmax - x0) / resolution)) + 1;
    const int h = static_cast<int>(std::ceil((ymax - y0) / resolution)) + 1;

    IsmPatch patch(Pose2D(x0, y0, 0.0), resolution, w, h, layer);
    std::vector<int> counts(static_cast<size_t>(w) * h, 0);
    int count_max = 0;
    for (const auto& p : points) {
        const int i = static_cast<int>(std::floor((p.x() - x0) / resolution));
        const int j = static_cast<int>(std::floor((p.y() - y0) / resolution));
        if (i < 0 || j < 0 || i >= w || j >= h) continue;
        count_max = std::max(count_max, ++counts[static_cast<size_t>(j) * w + i]);
    }

    if (carve) {
        const double free_limit = *reading->range - 2.0 * model->sigma_range;
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i) {
                const double dx = x0 + (i + 0.5) * resolution - model->mount.x;
                const double dy = y0 + (j + 0.5) * resolution - model->mount.y;
                const double dist = std::hypot(dx, dy);
                if (!(dist > 0.0 && dist < free_limit)) continue;
                const double bearing = wrap_angle(std::atan2(dy, dx) - model->mount.theta);
                if (std::abs(bearing) < model->half_angle)
                    patch.at(i, j) = 0.4;
            }
    }

    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            const int c = counts[static_cast<size_t>(j) * w + i];
            if (c > 0)
                patch.at(i, j) = 0.5 + (p_max - 0.5) * static_cast<double>(c) / count_max;
        }
    return patch;
}

inline constexpr int kDefaultParticleCount = 5000;
inline constexpr double kConeFreeProb = 0.4;

} // namespace sogm
