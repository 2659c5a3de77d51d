#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sogm/core/types.hpp"

namespace sogm {

/// Semantic occupancy grid: N layers of W x H natural-log-odds accumulators.
/// A fresh grid is all zeros (probability 0.5 everywhere).
///
/// Concurrency contract: apply_patch calls on disjoint layers may run
/// concurrently; within one layer callers must serialize externally
/// (accumulation is plain read-modify-write). Reads may run concurrently
/// with each other. Because fusion is an order-independent sum, any
/// serialization schedule yields the same map away from saturation.
class SemanticGrid {
public:
    explicit SemanticGrid(GridSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        layers_.assign(static_cast<size_t>(spec_.layers()),
                       std::vector<double>(cells_per_layer(), 0.0));
    }

    const GridSpec& spec() const { return spec_; }
    size_t cells_per_layer() const {
        return static_cast<size_t>(spec_.width_cells) * spec_.height_cells;
    }

    double accumulator(int layer, int i, int j) const {
        check_index(layer, i, j);
        return layers_[layer][idx(i, j)];
    }

    void set_accumulator(int layer, int i, int j, double v) {
        check_index(layer, i, j);
        layers_[layer][idx(i, j)] = clamp_logodds(v);
    }

    std::span<const double> layer(int l) const {
        if (l < 0 || l >= spec_.layers())
            throw Error(ErrorCode::UnknownLayer, "layer index out of range");
        return layers_[l];
    }

    std::span<double> layer_mut(int l) {
        if (l < 0 || l >= spec_.layers())
            throw Error(ErrorCode::UnknownLayer, "layer index out of range");
        return layers_[l];
    }

    double cell_probability(int layer, int i, int j) const {
        return expit(accumulator(layer, i, j));
    }

    /// Recursive Bayesian update: accumulator += logit(patch value) for every
    /// grid cell hit by a patch cell center. Values of exactly 0.5 are
    /// skipped, so a no-information patch leaves the grid bit-identical.
    /// Patch cells whose centers fall outside the grid are dropped.
    void apply_patch(const IsmPatch& patch) {
        const int l = spec_.layer_index(patch.layer_name);
        if (l < 0)
            throw Error(ErrorCode::UnknownLayer,
                        "apply_patch: unknown layer " + patch.layer_name);
        if (std::abs(patch.resolution - spec_.resolution) > 1e-12)
            throw Error(ErrorCode::ResolutionMismatch,
                        "apply_patch: patch resolution differs from grid resolution");
        auto& acc = layers_[l];
        for (int j = 0; j < patch.height; ++j) {
            for (int i = 0; i < patch.width; ++i) {
                const double p = patch.at(i, j);
                if (p == kUnknownProb) continue;
                double wx, wy;
                patch.cell_center(i, j, wx, wy);
                int gi, gj;
                if (!world_to_grid(spec_, wx, wy, gi, gj)) continue;
                acc[idx(gi, gj)] = clamp_logodds(acc[idx(gi, gj)] + quantize_logodds(logit(p)));
            }
        }
    }

    static double clamp_logodds(double v) {
        return std::clamp(v, -kLogOddsMax, kLogOddsMax);
    }

    /// Log-odds addends are snapped to a 2^-34 lattice before accumulation.
    /// Lattice sums of bounded terms are exact in a double, so fusing the
    /// same patches in any order yields bit-identical accumulators (away
    /// from the clamp); the snap perturbs a probability by < 1e-9.
    static double quantize_logodds(double v) {
        constexpr double kScale = 17179869184.0; // 2^34
        return std::round(v * kScale) / kScale;
    }

    /// World point -> cell index. Returns false when outside the grid;
    /// out-of-bounds is a value, not an error. The boundary between cells
    /// belongs to the upper cell (floor convention).
    static bool world_to_grid(const GridSpec& spec, double wx, double wy,
                              int& i, int& j) {
        const double fi = std::floor((wx - spec.origin_x) / spec.resolution);
        const double fj = std::floor((wy - spec.origin_y) / spec.resolution);
        i = static_cast<int>(fi);
        j = static_cast<int>(fj);
        return fi >= 0 && fj >= 0 && i < spec.width_cells && j < spec.height_cells;
    }

private:
    size_t idx(int i, int j) const {
        return static_cast<size_t>(j) * spec_.width_cells + i;
    }

    void check_index(int layer, int i, int j) const {
        if (layer < 0 || layer >= spec_.layers())
            throw Error(ErrorCode::UnknownLayer, "layer index out of range");
        if (i < 0 || i >= spec_.width_cells || j < 0 || j >= spec_.height_cells)
            throw Error(ErrorCode::IndexOutOfRange, "cell index out of range");
    }

    GridSpec spec_;
    std::vector<std::vector<double>> layers_;
};

/// Per-layer ternary classification with a dead band around 0.5.
/// Digit encoding: free = 0, unknown = 1, occupied = 2; the combined
/// index is sum(digit * 3^layer), covering 3^N classes.
inline CellClass classify_cell(std::span<const double> probabilities, double eps) {
    if (!(eps >= 0.0 && eps < 0.5))
        throw Error(ErrorCode::DomainError, "classify_cell: eps out of [0, 0.5)");
    CellClass out;
    out.labels.reserve(probabilities.size());
    int pow3 = 1;
    for (double p : probabilities) {
        if (!(p >= 0.0 && p <= 1.0))
            throw Error(ErrorCode::DomainError, "classify_cell: probability out of [0,1]");
        Ternary t = Ternary::Unknown;
        if (p > 0.5 + eps) t = Ternary::Occupied;
        else if (p < 0.5 - eps) t = Ternary::Free;
        out.labels.push_back(t);
        out.index += static_cast<int>(t) * pow3;
        pow3 *= 3;
    }
    return out;
}

inline constexpr double kDefaultClassifyEps = 0.1;

} // namespace sogm
