#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "sogm/core/map_io.hpp"

using namespace sogm;

namespace {

SemanticGrid random_grid(uint64_t seed) {
    GridSpec s;
    s.width_cells = 7;
    s.height_cells = 5;
    s.resolution = 0.25;
    s.origin_x = -3.5;
    s.origin_y = 12.0;
    s.layer_names = {"crop", "ground"};
    SemanticGrid grid(s);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(-10.0, 10.0);
    for (int l = 0; l < 2; ++l)
        for (int j = 0; j < 5; ++j)
            for (int i = 0; i < 7; ++i)
                grid.set_accumulator(l, i, j, static_cast<float>(v(rng)));
    return grid;
}

std::string serialize(const SemanticGrid& g) {
    std::ostringstream os(std::ios::binary);
    save_map(g, os);
    return os.str();
}

} // namespace

TEST_CASE("SOGM1 round-trip is bit-exact") {
    const SemanticGrid g = random_grid(3);
    const std::string bytes = serialize(g);
    std::istringstream is(bytes);
    const SemanticGrid g2 = load_map(is);
    CHECK(serialize(g2) == bytes);
    CHECK(g2.spec().layer_names == g.spec().layer_names);
    CHECK(g2.accumulator(1, 6, 4) == g.accumulator(1, 6, 4));
}

TEST_CASE("fresh 4x4x1 grid payload is 64 bytes after header") {
    GridSpec s;
    s.width_cells = 4;
    s.height_cells = 4;
    s.resolution = 1.0;
    s.layer_names = {"l"};
    const std::string bytes = serialize(SemanticGrid(s));
    const auto end_pos = bytes.find("end\n");
    REQUIRE(end_pos != std::string::npos);
    CHECK(bytes.size() - (end_pos + 4) == 64);
}

TEST_CASE("corrupted magic is a magic-mismatch error") {
    std::string bytes = serialize(random_grid(1));
    bytes[3] = 'X'; // "SOGX1"
    std::istringstream is(bytes);
    try {
        load_map(is);
        FAIL("expected BadMagic");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadMagic);
    }
}

TEST_CASE("truncated payload is detected") {
    std::string bytes = serialize(random_grid(2));
    bytes.resize(bytes.size() - 10);
    std::istringstream is(bytes);
    try {
        load_map(is);
        FAIL("expected TruncatedPayload");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TruncatedPayload);
    }
}

TEST_CASE("layer count mismatch is detected") {
    std::string bytes = serialize(random_grid(4));
    const auto pos = bytes.find("layers=2");
    REQUIRE(pos != std::string::npos);
    bytes[pos + 7] = '3';
    std::istringstream is(bytes);
    try {
        load_map(is);
        FAIL("expected LayerMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LayerMismatch);
    }
}

TEST_CASE("missing header key is detected") {
    std::string bytes = serialize(random_grid(5));
    const auto pos = bytes.find("origin_x=");
    const auto nl = bytes.find('\n', pos);
    bytes.erase(pos, nl - pos + 1);
    std::istringstream is(bytes);
    try {
        load_map(is);
        FAIL("expected MissingHeaderKey");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingHeaderKey);
    }
}

TEST_CASE("PGM render has the right header and size") {
    const SemanticGrid g = random_grid(6);
    std::ostringstream os(std::ios::binary);
    render_layer_pgm(g, 0, os);
    const std::string pgm = os.str();
    CHECK(pgm.rfind("P5\n7 5\n255\n", 0) == 0);
    CHECK(pgm.size() == std::string("P5\n7 5\n255\n").size() + 7 * 5);
}

TEST_CASE("ISMP1 patch round-trip") {
    IsmPatch p(Pose2D(1.5, -2.0, 0.3), 0.1, 4, 3, "crop");
    p.at(2, 1) = 0.875;
    std::ostringstream os(std::ios::binary);
    save_patch(p, os);
    std::istringstream is(os.str());
    const IsmPatch q = load_patch(is);
    CHECK(q.width == 4);
    CHECK(q.height == 3);
    CHECK(q.layer_name == "crop");
    CHECK(q.at(2, 1) == 0.875);
    CHECK(q.at(0, 0) == 0.5);
    CHECK_THAT(q.anchor.theta, Catch::Matchers::WithinAbs(0.3, 1e-7));
}
