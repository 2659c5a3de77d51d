#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sogm/core/error.hpp"

namespace sogm {

/// Log-odds saturation bound. expit(50) differs from 1 by less than 2e-22,
/// so clamping here keeps accumulators finite without observable bias.
inline constexpr double kLogOddsMax = 50.0;

/// Probability value that carries no information and fuses as a no-op.
inline constexpr double kUnknownProb = 0.5;

/// ln(p / (1-p)). p outside [0,1] is a domain error; the endpoints
/// saturate to +-kLogOddsMax instead of producing infinities.
inline double logit(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::DomainError, "logit: probability out of [0,1]");
    if (p <= 0.0) return -kLogOddsMax;
    if (p >= 1.0) return kLogOddsMax;
    double l = std::log(p / (1.0 - p));
    if (l > kLogOddsMax) return kLogOddsMax;
    if (l < -kLogOddsMax) return -kLogOddsMax;
    return l;
}

/// Inverse of logit: 1 / (1 + e^-l).
inline double expit(double l) {
    return 1.0 / (1.0 + std::exp(-l));
}

/// Normalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

/// Planar pose: position in world meters, heading counterclockwise from +x.
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2D() = default;
    Pose2D(double x_, double y_, double theta_)
        : x(x_), y(y_), theta(wrap_angle(theta_)) {}

    /// Transform a point from this pose's local frame into the world frame.
    void transform(double lx, double ly, double& wx, double& wy) const {
        const double c = std::cos(theta), s = std::sin(theta);
        wx = x + c * lx - s * ly;
        wy = y + s * lx + c * ly;
    }
};

struct GridSpec {
    int width_cells = 0;
    int height_cells = 0;
    double resolution = 0.0;
    double origin_x = 0.0; // world coords of the corner of cell (0,0)
    double origin_y = 0.0;
    std::vector<std::string> layer_names;

    int layers() const { return static_cast<int>(layer_names.size()); }

    void validate() const {
        if (width_cells < 1 || height_cells < 1)
            throw Error(ErrorCode::DomainError, "GridSpec: dimensions must be >= 1");
        if (!(resolution > 0.0))
            throw Error(ErrorCode::DomainError, "GridSpec: resolution must be > 0");
        if (layer_names.empty())
            throw Error(ErrorCode::DomainError, "GridSpec: at least one layer required");
        for (size_t i = 0; i < layer_names.size(); ++i) {
            if (layer_names[i].empty())
                throw Error(ErrorCode::DomainError, "GridSpec: empty layer name");
            for (size_t j = i + 1; j < layer_names.size(); ++j)
                if (layer_names[i] == layer_names[j])
                    throw Error(ErrorCode::DomainError,
                                "GridSpec: duplicate layer name " + layer_names[i]);
        }
    }

    int layer_index(const std::string& name) const {
        for (size_t i = 0; i < layer_names.size(); ++i)
            if (layer_names[i] == name) return static_cast<int>(i);
        return -1;
    }
};

/// Output language of every inverse sensor model: a local probability
/// raster anchored at a pose. Cell (0,0)'s corner sits at the anchor;
/// cells are row-major, row 0 southernmost in the anchor frame.
struct IsmPatch {
    Pose2D anchor;
    double resolution = 0.0;
    int width = 0;
    int height = 0;
    std::string layer_name;
    std::vector<double> cells;

    IsmPatch() = default;
    IsmPatch(Pose2D anchor_, double res, int w, int h, std::string layer)
        : anchor(anchor_), resolution(res), width(w), height(h),
          layer_name(std::move(layer)), cells(static_cast<size_t>(w) * h, kUnknownProb) {}

    double& at(int i, int j) { return cells[static_cast<size_t>(j) * width + i]; }
    double at(int i, int j) const { return cells[static_cast<size_t>(j) * width + i]; }

    /// World (anchor-frame parent) coordinates of a cell center.
    void cell_center(int i, int j, double& wx, double& wy) const {
        anchor.transform((i + 0.5) * resolution, (j + 0.5) * resolution, wx, wy);
    }
};

enum class Ternary : int { Free = 0, Unknown = 1, Occupied = 2 };

struct CellClass {
    std::vector<Ternary> labels;
    int index = 0; // sum of digit * 3^layer
};

} // namespace sogm
