#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "sogm/geo/raster.hpp"

using namespace sogm;
using Catch::Matchers::WithinAbs;

namespace {

const char* kSample =
    "ncols 4\n"
    "nrows 3\n"
    "xllcorner 100.0\n"
    "yllcorner 200.0\n"
    "cellsize 0.5\n"
    "NODATA_value -9999\n"
    "1 1 2 2\n"
    "0 1 2 0\n"
    "0 0 -9999 0\n";

ClassifiedRaster parse(const std::string& text) {
    std::istringstream is(text);
    return load_raster(is);
}

ErrorCode code_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return ErrorCode::BadConfig;
}

} // namespace

TEST_CASE("sample raster parses with south-up storage") {
    const ClassifiedRaster r = parse(kSample);
    CHECK(r.ncols == 4);
    CHECK(r.nrows == 3);
    CHECK(r.xllcorner == 100.0);
    CHECK(r.yllcorner == 200.0);
    CHECK(r.cellsize == 0.5);
    // file's first payload row is the northernmost -> stored at j = nrows-1
    CHECK(r.label(0, 2) == 1);
    CHECK(r.label(2, 2) == 2);
    CHECK(r.label(0, 0) == 0);
    CHECK(r.label(2, 0) == -9999);
}

TEST_CASE("header keys are case-insensitive and order-free") {
    std::string shuffled =
        "NODATA_value -1\n"
        "CELLSIZE 1\n"
        "nRows 1\n"
        "NCOLS 2\n"
        "YLLCORNER 0\n"
        "xllcorner 0\n"
        "5 6\n";
    const ClassifiedRaster r = parse(shuffled);
    CHECK(r.nodata == -1);
    CHECK(r.label(1, 0) == 6);
}

TEST_CASE("parse errors carry the offending line and error class") {
    CHECK(code_of("ncols 2\nnrows 1\n") == ErrorCode::MissingHeaderKey);
    CHECK(code_of("ncols\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -1\n1 2\n") ==
          ErrorCode::BadHeaderValue);
    CHECK(code_of("bogus 3\nncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n") ==
          ErrorCode::MissingHeaderKey);
    CHECK(code_of("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 0\nNODATA_value -1\n1 2\n") ==
          ErrorCode::BadHeaderValue);
    CHECK(code_of("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -1\n1 x\n") ==
          ErrorCode::BadCellValue);
}

TEST_CASE("truncated payload names the missing cell count") {
    const std::string text =
        "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -1\n1 2 3\n4\n";
    try {
        parse(text);
        FAIL("expected CellCountMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CellCountMismatch);
        CHECK(std::string(e.what()).find("missing 2") != std::string::npos);
    }
}

TEST_CASE("write/load round-trip preserves every field") {
    ClassifiedRaster r = parse(kSample);
    std::ostringstream os;
    write_raster(r, os);
    const ClassifiedRaster r2 = parse(os.str());
    CHECK(r2.cells == r.cells);
    CHECK(r2.ncols == r.ncols);
    CHECK(r2.nrows == r.nrows);
    CHECK(r2.xllcorner == r.xllcorner);
    CHECK(r2.yllcorner == r.yllcorner);
    CHECK(r2.cellsize == r.cellsize);
    CHECK(r2.nodata == r.nodata);
}

TEST_CASE("legend sidecar parses and attaches") {
    ClassifiedRaster r = parse(kSample);
    std::istringstream legend(
        "label=1 layer=crop confidence=0.85\n"
        "label=2 layer=obstacle\n"
        "# not a legend line\n");
    CHECK_THROWS_AS(load_legend(legend, r), Error); // '#' token has no '='
    r.legend.clear();
    std::istringstream ok(
        "label=1 layer=crop confidence=0.85\n"
        "label=2 layer=obstacle\n");
    load_legend(ok, r);
    REQUIRE(r.legend.size() == 2);
    CHECK(r.legend[1].layer == "crop");
    CHECK_THAT(r.legend[1].confidence, WithinAbs(0.85, 1e-12));
    CHECK_THAT(r.legend[2].confidence, WithinAbs(0.9, 1e-12)); // default
}

TEST_CASE("decomposition partitions each cell across layers") {
    ClassifiedRaster r = parse(kSample);
    std::istringstream legend(
        "label=1 layer=crop confidence=0.8\n"
        "label=2 layer=obstacle confidence=0.7\n");
    load_legend(legend, r);
    const auto patches = decompose_classes(r);
    REQUIRE(patches.size() == 2);
    const IsmPatch& crop = patches[0];
    const IsmPatch& obs = patches[1];
    CHECK(crop.layer_name == "crop");
    CHECK(obs.layer_name == "obstacle");
    for (int j = 0; j < r.nrows; ++j)
        for (int i = 0; i < r.ncols; ++i) {
            const int v = r.label(i, j);
            if (v == r.nodata) {
                CHECK(crop.at(i, j) == 0.5);
                CHECK(obs.at(i, j) == 0.5);
            } else if (v == 1) {
                CHECK(crop.at(i, j) == 0.8);
                CHECK(obs.at(i, j) == 0.3);
            } else if (v == 2) {
                CHECK(crop.at(i, j) == 0.3);
                CHECK(obs.at(i, j) == 0.7);
            } else { // background 0: visible but neither class
                CHECK(crop.at(i, j) == 0.3);
                CHECK(obs.at(i, j) == 0.3);
            }
        }
    // georeferencing comes from the raster corner
    double wx, wy;
    crop.cell_center(0, 0, wx, wy);
    CHECK_THAT(wx, WithinAbs(100.25, 1e-12));
    CHECK_THAT(wy, WithinAbs(200.25, 1e-12));
}

TEST_CASE("window extraction at native resolution is value-preserving") {
    ClassifiedRaster r = parse(kSample);
    std::istringstream legend("label=1 layer=crop confidence=0.8\n");
    load_legend(legend, r);
    const IsmPatch src = decompose_classes(r)[0];
    const IsmPatch win = window_for_pose(src, Pose2D(101.0, 200.75, 0.0), 1.0);
    CHECK(win.resolution == src.resolution);
    for (int j = 0; j < win.height; ++j)
        for (int i = 0; i < win.width; ++i) {
            double wx, wy;
            win.cell_center(i, j, wx, wy);
            const int si = static_cast<int>(std::floor((wx - src.anchor.x) / src.resolution));
            const int sj = static_cast<int>(std::floor((wy - src.anchor.y) / src.resolution));
            const double expected =
                (si >= 0 && sj >= 0 && si < src.width && sj < src.height) ? src.at(si, sj) : 0.5;
            CHECK(win.at(i, j) == expected);
        }
    // fully outside the raster: all 0.5
    const IsmPatch off = window_for_pose(src, Pose2D(0.0, 0.0, 0.0), 2.0);
    for (double v : off.cells) CHECK(v == 0.5);
}

TEST_CASE("windowing twice at the same pose and resolution is idempotent") {
    ClassifiedRaster r = parse(kSample);
    std::istringstream legend("label=2 layer=obstacle confidence=0.7\n");
    load_legend(legend, r);
    const IsmPatch src = decompose_classes(r)[0];
    const Pose2D pose(101.0, 200.5, 0.0);
    const IsmPatch w1 = window_for_pose(src, pose, 1.5, 0.25);
    const IsmPatch w2 = window_for_pose(w1, pose, 1.5, 0.25);
    CHECK(w1.cells == w2.cells);
    CHECK(w1.anchor.x == w2.anchor.x);
    CHECK(w1.anchor.y == w2.anchor.y);
}

TEST_CASE("header fuzz: mutated headers fail with a parse error class") {
    std::mt19937_64 rng(2718);
    const std::string base(kSample);
    int rejected = 0, accepted = 0;
    for (int t = 0; t < 200; ++t) {
        std::string text = base;
        // mutate a random byte inside the header region
        const size_t header_len = base.find("-9999\n") + 6;
        std::uniform_int_distribution<size_t> pos(0, header_len - 2);
        std::uniform_int_distribution<int> ch(32, 126);
        text[pos(rng)] = static_cast<char>(ch(rng));
        try {
            parse(text);
            ++accepted; // benign mutation (e.g. digit -> digit)
        } catch (const Error& e) {
            CHECK(e.is_parse_error());
            ++rejected;
        } catch (...) {
            FAIL("non-Error exception escaped the parser");
        }
    }
    CHECK(rejected + accepted == 200);
    CHECK(rejected > 0);
}
