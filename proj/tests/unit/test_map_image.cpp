#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "qpath/error.hpp"
#include "qpath/map_image.hpp"
#include "unit/helpers.hpp"

using namespace qpath;
namespace fs = std::filesystem;

namespace {

GrayImage uniform(int w, int h, std::uint8_t v) {
    return {w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h), v)};
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("qpath_test_" + name); }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("map_image") {

TEST_CASE("uniform images") {
    CHECK(ingest_map_image(uniform(400, 400, 255), 128, 400, 400).count() == 0);
    CHECK(ingest_map_image(uniform(400, 400, 0), 128, 400, 400).count() == 400 * 400);
}

TEST_CASE("2x2 image blocks exactly the dark pixel") {
    const GrayImage img{2, 2, {0, 255, 255, 255}};
    const BoolGrid g = ingest_map_image(img, 128, 2, 2);
    CHECK(g.at({0, 0}));
    CHECK(g.count() == 1);
}

TEST_CASE("majority rule is strict") {
    // 2 dark of 4 pixels is not more than half.
    const GrayImage img{2, 2, {0, 0, 255, 255}};
    CHECK_FALSE(ingest_map_image(img, 128, 1, 1).at({0, 0}));
    const GrayImage img3{2, 2, {0, 0, 0, 255}};
    CHECK(ingest_map_image(img3, 128, 1, 1).at({0, 0}));
    // Luminance equal to the threshold is not dark.
    CHECK_FALSE(ingest_map_image(uniform(1, 1, 128), 128, 1, 1).at({0, 0}));
}

TEST_CASE("ingesting a binary image at its own size reproduces it") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const BoolGrid mask = testing::random_grid(17 + static_cast<int>(seed), 13, 0.4, seed);
        GrayImage img{mask.width(), mask.height(), {}};
        for (std::size_t i = 0; i < mask.size(); ++i) img.pixels.push_back(mask.raw()[i] ? 0 : 255);
        CHECK(ingest_map_image(img, 128, mask.width(), mask.height()) == mask);
    }
}

TEST_CASE("parallel kernel equals the serial reference") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        GrayImage img{1 + static_cast<int>(rng.below(120)), 1 + static_cast<int>(rng.below(120)), {}};
        for (int i = 0; i < img.width * img.height; ++i) img.pixels.push_back(static_cast<std::uint8_t>(rng.below(256)));
        const int w = 1 + static_cast<int>(rng.below(150));
        const int h = 1 + static_cast<int>(rng.below(150));
        const int t = static_cast<int>(rng.below(256));
        CHECK(ingest_map_image(img, t, w, h) == ingest_map_image_serial(img, t, w, h));
    }
}

TEST_CASE("bin spans partition the source when downsampling") {
    for (int source : {7, 100, 401})
        for (int bins : {1, 3, 7, 50}) {
            if (bins > source) continue;
            int expect = 0;
            for (int i = 0; i < bins; ++i) {
                const BinSpan s = bin_span(i, bins, source);
                CHECK(s.begin == expect);
                CHECK(s.end > s.begin);
                expect = s.end;
            }
            CHECK(expect == source);
        }
    const BinSpan up = bin_span(5, 10, 3);
    CHECK(up.end - up.begin == 1);
}

TEST_CASE("error cases") {
    CHECK(code_of([] { ingest_map_image(uniform(4, 4, 0), 128, 0, 4); }) == ErrorCode::DegenerateDims);
    CHECK(code_of([] { ingest_map_image(GrayImage{}, 128, 4, 4); }) == ErrorCode::UnreadableImage);
    const fs::path junk = temp_file("junk.png");
    std::ofstream(junk) << "not an image";
    CHECK(code_of([&] { read_gray_image(junk); }) == ErrorCode::UnreadableImage);
    CHECK(code_of([] { read_gray_image("/nonexistent/map.png"); }) == ErrorCode::UnreadableImage);
}

TEST_CASE("PGM round trip, binary and ascii") {
    GrayImage img{3, 2, {0, 50, 100, 150, 200, 255}};
    const fs::path p5 = temp_file("rt.pgm");
    write_pgm(img, p5);
    const GrayImage back = read_gray_image(p5);
    CHECK(back.width == 3);
    CHECK(back.pixels == img.pixels);

    const fs::path p2 = temp_file("ascii.pgm");
    std::ofstream(p2) << "P2\n# comment\n3 2\n255\n0 50 100\n150 200 255\n";
    CHECK(read_gray_image(p2).pixels == img.pixels);
}

TEST_CASE("campus PNG landmarks") {
    const auto fixture = nlohmann::json::parse(std::ifstream(fs::path(QPATH_TEST_FIXTURES) / "campus_landmarks.json"));
    const GrayImage img = read_gray_image(fs::path(QPATH_TEST_FIXTURES) / fixture["image"].get<std::string>());
    CHECK(img.width == 400);
    CHECK(img.height == 400);
    const BoolGrid g = ingest_map_image(img, fixture["threshold"], 400, 400);
    for (const auto& l : fixture["landmarks"]) {
        INFO(l["name"].get<std::string>());
        CHECK(g.at({l["cell"][0], l["cell"][1]}) == l["blocked"].get<bool>());
    }
    // Landmarks sit inside their shapes, so a 4x downsample keeps them.
    const BoolGrid small = ingest_map_image(img, fixture["threshold"], 100, 100);
    for (const auto& l : fixture["landmarks"]) {
        INFO(l["name"].get<std::string>());
        CHECK(small.at({l["cell"][0].get<int>() / 4, l["cell"][1].get<int>() / 4}) == l["blocked"].get<bool>());
    }
}

}  // TEST_SUITE
