#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sogm/core/grid.hpp"

namespace sogm {

// SOGM1 map container (little-endian):
//   magic "SOGM1\n"
//   ASCII header lines "key=value\n": width, height, layers, resolution,
//   origin_x, origin_y, then layer_name=<string> once per layer, then "end\n"
//   payload: W*H*N float32 accumulators, layer-major, row-major within a
//   layer, row 0 southernmost.

namespace detail {

inline void put_f32_le(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    char b[4] = {static_cast<char>(bits & 0xff),
                 static_cast<char>((bits >> 8) & 0xff),
                 static_cast<char>((bits >> 16) & 0xff),
                 static_cast<char>((bits >> 24) & 0xff)};
    os.write(b, 4);
}

inline bool get_f32_le(std::istream& is, float& v) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
    uint32_t bits = static_cast<uint32_t>(b[0]) |
                    (static_cast<uint32_t>(b[1]) << 8) |
                    (static_cast<uint32_t>(b[2]) << 16) |
                    (static_cast<uint32_t>(b[3]) << 24);
    std::memcpy(&v, &bits, 4);
    return true;
}

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline void save_map(const SemanticGrid& grid, std::ostream& os) {
    const GridSpec& s = grid.spec();
    os << "SOGM1\n";
    os << "width=" << s.width_cells << "\n";
    os << "height=" << s.height_cells << "\n";
    os << "layers=" << s.layers() << "\n";
    os << "resolution=" << detail::format_double(s.resolution) << "\n";
    os << "origin_x=" << detail::format_double(s.origin_x) << "\n";
    os << "origin_y=" << detail::format_double(s.origin_y) << "\n";
    for (const auto& name : s.layer_names)
        os << "layer_name=" << name << "\n";
    os << "end\n";
    for (int l = 0; l < s.layers(); ++l)
        for (double v : grid.layer(l))
            detail::put_f32_le(os, static_cast<float>(v));
}

inline SemanticGrid load_map(std::istream& is) {
    std::string magic;
    if (!std::getline(is, magic) || magic != "SOGM1")
        throw Error(ErrorCode::BadMagic, "load_map: bad magic '" + magic + "'");

    GridSpec spec;
    bool have_w = false, have_h = false, have_n = false, have_res = false,
         have_ox = false, have_oy = false;
    long declared_layers = 0;
    std::string line;
    while (true) {
        if (!std::getline(is, line))
            throw Error(ErrorCode::TruncatedPayload, "load_map: header ends before 'end'");
        if (line == "end") break;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::BadHeaderValue, "load_map: malformed header line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "width") { spec.width_cells = std::stoi(val); have_w = true; }
            else if (key == "height") { spec.height_cells = std::stoi(val); have_h = true; }
            else if (key == "layers") { declared_layers = std::stol(val); have_n = true; }
            else if (key == "resolution") { spec.resolution = std::stod(val); have_res = true; }
            else if (key == "origin_x") { spec.origin_x = std::stod(val); have_ox = true; }
            else if (key == "origin_y") { spec.origin_y = std::stod(val); have_oy = true; }
            else if (key == "layer_name") { spec.layer_names.push_back(val); }
            else throw Error(ErrorCode::BadHeaderValue, "load_map: unknown header key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::BadHeaderValue, "load_map: bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw Error(ErrorCode::BadHeaderValue, "load_map: value out of range for '" + key + "'");
        }
    }
    if (!(have_w && have_h && have_n && have_res && have_ox && have_oy))
        throw Error(ErrorCode::MissingHeaderKey, "load_map: missing required header key");
    if (declared_layers != static_cast<long>(spec.layer_names.size()))
        throw Error(ErrorCode::LayerMismatch,
                    "load_map: declared layer count does not match layer_name entries");
    if (spec.width_cells < 1 || spec.height_cells < 1 || !(spec.resolution > 0))
        throw Error(ErrorCode::BadHeaderValue, "load_map: invalid grid dimensions");

    SemanticGrid grid(spec);
    for (int l = 0; l < spec.layers(); ++l) {
        auto acc = grid.layer_mut(l);
        for (auto& v : acc) {
            float f;
            if (!detail::get_f32_le(is, f))
                throw Error(ErrorCode::TruncatedPayload, "load_map: payload shorter than W*H*N cells");
            v = static_cast<double>(f);
        }
    }
    return grid;
}

// ISMP1 patch container, same conventions as SOGM1: text header, then
// W*H float32 probabilities, row-major, row 0 southernmost.

inline void save_patch(const IsmPatch& patch, std::ostream& os) {
    os << "ISMP1\n";
    os << "width=" << patch.width << "\n";
    os << "height=" << patch.height << "\n";
    os << "resolution=" << detail::format_double(patch.resolution) << "\n";
    os << "anchor_x=" << detail::format_double(patch.anchor.x) << "\n";
    os << "anchor_y=" << detail::format_double(patch.anchor.y) << "\n";
    os << "anchor_theta=" << detail::format_double(patch.anchor.theta) << "\n";
    os << "layer_name=" << patch.layer_name << "\n";
    os << "end\n";
    for (double v : patch.cells)
        detail::put_f32_le(os, static_cast<float>(v));
}

inline IsmPatch load_patch(std::istream& is) {
    std::string magic;
    if (!std::getline(is, magic) || magic != "ISMP1")
        throw Error(ErrorCode::BadMagic, "load_patch: bad magic '" + magic + "'");
    int w = 0, h = 0;
    double res = 0.0, ax = 0.0, ay = 0.0, at = 0.0;
    std::string layer;
    std::string line;
    while (true) {
        if (!std::getline(is, line))
            throw Error(ErrorCode::TruncatedPayload, "load_patch: header ends before 'end'");
        if (line == "end") break;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::BadHeaderValue, "load_patch: malformed header line");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "width") w = std::stoi(val);
            else if (key == "height") h = std::stoi(val);
            else if (key == "resolution") res = std::stod(val);
            else if (key == "anchor_x") ax = std::stod(val);
            else if (key == "anchor_y") ay = std::stod(val);
            else if (key == "anchor_theta") at = std::stod(val);
            else if (key == "layer_name") layer = val;
            else throw Error(ErrorCode::BadHeaderValue, "load_patch: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::BadHeaderValue, "load_patch: bad value for '" + key + "'");
        }
    }
    if (w < 1 || h < 1 || !(res > 0.0) || layer.empty())
        throw Error(ErrorCode::MissingHeaderKey, "load_patch: missing or invalid header field");
    IsmPatch patch(Pose2D(ax, ay, at), res, w, h, layer);
    for (auto& v : patch.cells) {
        float f;
        if (!detail::get_f32_le(is, f))
            throw Error(ErrorCode::TruncatedPayload, "load_patch: payload shorter than W*H cells");
        v = static_cast<double>(f);
    }
    return patch;
}

/// 8-bit P5 graymap of one layer, pixel = round(255 * probability).
/// Rows are written north-first so the image is upright.
inline void render_layer_pgm(const SemanticGrid& grid, int layer, std::ostream& os) {
    const GridSpec& s = grid.spec();
    os << "P5\n" << s.width_cells << " " << s.height_cells << "\n255\n";
    for (int j = s.height_cells - 1; j >= 0; --j)
        for (int i = 0; i < s.width_cells; ++i) {
            const double p = grid.cell_probability(layer, i, j);
            os.put(static_cast<char>(static_cast<int>(std::lround(255.0 * p))));
        }
}

} // namespace sogm
