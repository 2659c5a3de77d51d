#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sogm/core/types.hpp"

namespace sogm {

/// Classified georeferenced raster in ESRI-ASCII-grid style. Cells are
/// stored south-up (row 0 southernmost) regardless of the file's
/// north-first payload order.
struct ClassifiedRaster {
    int ncols = 0;
    int nrows = 0;
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    double cellsize = 0.0;
    int nodata = -9999;
    std::vector<int> cells; // row-major, row 0 southernmost

    struct LegendEntry {
        std::string layer;
        double confidence = 0.9;
    };
    std::map<int, LegendEntry> legend;

    int label(int i, int j) const { return cells[static_cast<size_t>(j) * ncols + i]; }
};

namespace detail {

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace detail

/// Parses the ASCII raster format: case-insensitive header keys ncols,
/// nrows, xllcorner, yllcorner, cellsize, NODATA_value, then
/// whitespace-separated integer labels, row-major, north row first.
/// Parse errors carry line numbers.
inline ClassifiedRaster load_raster(std::istream& is) {
    ClassifiedRaster r;
    bool have[6] = {false, false, false, false, false, false};
    int line_no = 0;
    std::string line;
    std::vector<int> north_first;

    auto fail = [&](ErrorCode code, const std::string& msg) -> void {
        throw Error(code, "load_raster: line " + std::to_string(line_no) + ": " + msg);
    };

    // header: six key/value lines in any order
    int header_seen = 0;
    while (header_seen < 6) {
        if (!std::getline(is, line))
            fail(ErrorCode::MissingHeaderKey, "stream ends inside header");
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue; // blank line
        key = detail::lowercase(key);
        double val;
        if (!(ls >> val)) fail(ErrorCode::BadHeaderValue, "missing value for key '" + key + "'");
        if (key == "ncols") { r.ncols = static_cast<int>(val); have[0] = true; }
        else if (key == "nrows") { r.nrows = static_cast<int>(val); have[1] = true; }
        else if (key == "xllcorner") { r.xllcorner = val; have[2] = true; }
        else if (key == "yllcorner") { r.yllcorner = val; have[3] = true; }
        else if (key == "cellsize") { r.cellsize = val; have[4] = true; }
        else if (key == "nodata_value") { r.nodata = static_cast<int>(val); have[5] = true; }
        else fail(ErrorCode::MissingHeaderKey, "unexpected header key '" + key + "'");
        ++header_seen;
    }
    for (int k = 0; k < 6; ++k)
        if (!have[k]) fail(ErrorCode::MissingHeaderKey, "duplicate or missing header key");
    if (r.ncols < 1 || r.nrows < 1)
        fail(ErrorCode::BadHeaderValue, "ncols/nrows must be >= 1");
    if (!(r.cellsize > 0.0))
        fail(ErrorCode::BadHeaderValue, "cellsize must be > 0");

    const size_t expected = static_cast<size_t>(r.ncols) * r.nrows;
    north_first.reserve(expected);
    while (north_first.size() < expected && std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            size_t pos = 0;
            int v = 0;
            try {
                v = std::stoi(tok, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != tok.size())
                fail(ErrorCode::BadCellValue, "non-integer cell '" + tok + "'");
            north_first.push_back(v);
        }
    }
    if (north_first.size() != expected)
        fail(ErrorCode::CellCountMismatch,
             "expected " + std::to_string(expected) + " cells, got " +
                 std::to_string(north_first.size()) + " (missing " +
                 std::to_string(expected - std::min(expected, north_first.size())) + ")");

    // flip to south-up storage
    r.cells.resize(expected);
    for (int j = 0; j < r.nrows; ++j)
        for (int i = 0; i < r.ncols; ++i)
            r.cells[static_cast<size_t>(j) * r.ncols + i] =
                north_first[static_cast<size_t>(r.nrows - 1 - j) * r.ncols + i];
    return r;
}

inline void write_raster(const ClassifiedRaster& r, std::ostream& os) {
    os << "ncols " << r.ncols << "\n";
    os << "nrows " << r.nrows << "\n";
    os << "xllcorner " << r.xllcorner << "\n";
    os << "yllcorner " << r.yllcorner << "\n";
    os << "cellsize " << r.cellsize << "\n";
    os << "NODATA_value " << r.nodata << "\n";
    for (int j = r.nrows - 1; j >= 0; --j) {
        for (int i = 0; i < r.ncols; ++i)
            os << (i ? " " : "") << r.label(i, j);
        os << "\n";
    }
}

/// Legend sidecar: lines "label=<int> layer=<string> confidence=<decimal>".
inline void load_legend(std::istream& is, ClassifiedRaster& raster) {
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        int label = 0;
        ClassifiedRaster::LegendEntry entry;
        bool have_label = false, have_layer = false;
        while (ls >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw Error(ErrorCode::BadHeaderValue,
                            "legend: line " + std::to_string(line_no) + ": bad token '" + tok + "'");
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "label") { label = std::stoi(val); have_label = true; }
            else if (key == "layer") { entry.layer = val; have_layer = true; }
            else if (key == "name") { entry.layer = val; have_layer = true; }
            else if (key == "confidence") { entry.confidence = std::stod(val); }
        }
        if (have_label && have_layer) raster.legend[label] = entry;
    }
}

/// Decomposes a raster into one ISM patch per legend entry: confidence where
/// the raster holds the label, 0.3 where it holds a different non-nodata
/// label, 0.5 at nodata. Patches are georeferenced by the raster corner.
inline std::vector<IsmPatch> decompose_classes(const ClassifiedRaster& r) {
    std::vector<IsmPatch> patches;
    for (const auto& [label, entry] : r.legend) {
        IsmPatch patch(Pose2D(r.xllcorner, r.yllcorner, 0.0), r.cellsize,
                       r.ncols, r.nrows, entry.layer);
        for (int j = 0; j < r.nrows; ++j)
            for (int i = 0; i < r.ncols; ++i) {
                const int v = r.label(i, j);
                if (v == r.nodata) continue;
                patch.at(i, j) = (v == label) ? entry.confidence : 0.3;
            }
        patches.push_back(std::move(patch));
    }
    return patches;
}

/// Axis-aligned square window of side `extent` centered at the pose,
/// resampled nearest-neighbor to `out_resolution` (the patch's own
/// resolution by default). Cells outside the source patch are 0.5.
inline IsmPatch window_for_pose(const IsmPatch& patch, const Pose2D& pose,
                                double extent, double out_resolution = 0.0) {
    if (!(extent > 0.0))
        throw Error(ErrorCode::DomainError, "window_for_pose: extent must be > 0");
    const double res = out_resolution > 0.0 ? out_resolution : patch.resolution;
    const double x0 = std::floor((pose.x - extent / 2.0) / res) * res;
    const double y0 = std::floor((pose.y - extent / 2.0) / res) * res;
    const int n = static_cast<int>(std::ceil(extent / res));

    IsmPatch out(Pose2D(x0, y0, 0.0), res, n, n, patch.layer_name);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double wx = x0 + (i + 0.5) * res;
            const double wy = y0 + (j + 0.5) * res;
            const int si = static_cast<int>(std::floor((wx - patch.anchor.x) / patch.resolution));
            const int sj = static_cast<int>(std::floor((wy - patch.anchor.y) / patch.resolution));
            if (si < 0 || sj < 0 || si >= patch.width || sj >= patch.height) continue;
            out.at(i, j) = patch.at(si, sj);
        }
    return out;
}

} // namespace sogm
