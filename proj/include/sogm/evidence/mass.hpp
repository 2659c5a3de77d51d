#pragma once

#include <cmath>
#include <vector>

#include "sogm/core/types.hpp"

namespace sogm {

/// Dempster-Shafer mass over the binary frame {occupied, free}; m_theta is
/// the mass on the whole frame (ignorance). Components sum to 1.
struct MassFunction {
    double m_occ = 0.0;
    double m_free = 0.0;
    double m_theta = 1.0;

    bool valid(double tol = 1e-9) const {
        return m_occ >= -tol && m_free >= -tol && m_theta >= -tol &&
               std::abs(m_occ + m_free + m_theta - 1.0) <= tol;
    }
};

/// Conflict masses K aligned to a grid window, row-major, row 0 southernmost.
struct ConflictMap {
    int width = 0;
    int height = 0;
    std::vector<double> k;

    ConflictMap() = default;
    ConflictMap(int w, int h) : width(w), height(h), k(static_cast<size_t>(w) * h, 0.0) {}

    double& at(int i, int j) { return k[static_cast<size_t>(j) * width + i]; }
    double at(int i, int j) const { return k[static_cast<size_t>(j) * width + i]; }
};

/// Linear probability-to-mass bridge: the unique symmetric mapping with
/// vacuous 0.5 and certain endpoints.
inline MassFunction prob_to_mass(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::DomainError, "prob_to_mass: probability out of [0,1]");
    MassFunction m;
    if (p > 0.5) {
        m.m_occ = 2.0 * p - 1.0;
        m.m_free = 0.0;
        m.m_theta = 2.0 - 2.0 * p;
    } else if (p < 0.5) {
        m.m_occ = 0.0;
        m.m_free = 1.0 - 2.0 * p;
        m.m_theta = 2.0 * p;
    } // p == 0.5 stays vacuous (0, 0, 1)
    return m;
}

/// Pignistic readout for the binary frame; inverse of prob_to_mass.
inline double mass_to_prob(const MassFunction& m) {
    return m.m_occ + 0.5 * m.m_theta;
}

/// Dempster's rule of combination. Returns the normalized combined mass and
/// writes the unnormalized conflict K = a_occ*b_free + a_free*b_occ.
/// Total conflict (K = 1) is an error; callers map it to a vacuous mass
/// with K = 1 in conflict maps.
inline MassFunction dempster_combine(const MassFunction& a, const MassFunction& b,
                                     double& conflict) {
    conflict = a.m_occ * b.m_free + a.m_free * b.m_occ;
    if (conflict >= 1.0 - 1e-15)
        throw Error(ErrorCode::TotalConflict, "dempster_combine: total conflict (K = 1)");
    const double norm = 1.0 / (1.0 - conflict);
    MassFunction out;
    // grouping keeps the rule bit-exactly commutative
    out.m_occ = (a.m_occ * b.m_occ + (a.m_occ * b.m_theta + a.m_theta * b.m_occ)) * norm;
    out.m_free = (a.m_free * b.m_free + (a.m_free * b.m_theta + a.m_theta * b.m_free)) * norm;
    out.m_theta = a.m_theta * b.m_theta * norm;
    return out;
}

/// Fuses two rectified ISMs of the same image taken under contradicting
/// plane assumptions. Per cell: combine the two masses, emit the pignistic
/// probability and the conflict K. Totally conflicting cells emit 0.5 / K=1.
inline std::pair<IsmPatch, ConflictMap>
fuse_contradicting(const IsmPatch& patch_ground, const IsmPatch& patch_crop) {
    const auto& a = patch_ground;
    const auto& b = patch_crop;
    const bool aligned =
        a.width == b.width && a.height == b.height &&
        std::abs(a.resolution - b.resolution) <= 1e-12 &&
        std::abs(a.anchor.x - b.anchor.x) <= 1e-9 &&
        std::abs(a.anchor.y - b.anchor.y) <= 1e-9 &&
        std::abs(a.anchor.theta - b.anchor.theta) <= 1e-9;
    if (!aligned)
        throw Error(ErrorCode::MisalignedPatch, "fuse_contradicting: patches not aligned");

    IsmPatch fused(a.anchor, a.resolution, a.width, a.height, a.layer_name);
    ConflictMap conflict(a.width, a.height);
    for (int j = 0; j < a.height; ++j) {
        for (int i = 0; i < a.width; ++i) {
            const MassFunction ma = prob_to_mass(a.at(i, j));
            const MassFunction mb = prob_to_mass(b.at(i, j));
            double k = 0.0;
            try {
                const MassFunction mc = dempster_combine(ma, mb, k);
                fused.at(i, j) = mass_to_prob(mc);
                conflict.at(i, j) = k;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::TotalConflict) throw;
                fused.at(i, j) = 0.5;
                conflict.at(i, j) = 1.0;
            }
        }
    }
    return {std::move(fused), std::move(conflict)};
}

/// P5 graymap of a conflict map, pixel = round(255 * K), north row first.
inline void render_conflict_pgm(const ConflictMap& cm, std::ostream& os) {
    os << "P5\n" << cm.width << " " << cm.height << "\n255\n";
    for (int j = cm.height - 1; j >= 0; --j)
        for (int i = 0; i < cm.width; ++i)
            os.put(static_cast<char>(static_cast<int>(std::lround(255.0 * cm.at(i, j)))));
}

} // namespace sogm
