#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

using namespace partfuse;

namespace {

const RegionCrop& crop_of(const std::vector<RegionCrop>& crops, Region tag) {
    for (const RegionCrop& c : crops) {
        if (c.tag == tag) return c;
    }
    FAIL("region not found in crop list");
    return crops.front();
}

} // namespace

TEST_CASE("mouth crop expansion arithmetic") {
    // mouth landmarks spanning a 40x20 box centered at (100, 200)
    LandmarkSet lm = testutil::canonical_landmarks();
    for (int i = kMouthBegin; i < kMouthEnd; ++i) {
        lm.points[static_cast<std::size_t>(i)] = {100.0, 200.0};
    }
    lm.points[48] = {80.0, 200.0};
    lm.points[54] = {120.0, 200.0};
    lm.points[51] = {100.0, 190.0};
    lm.points[57] = {100.0, 210.0};

    auto crops = crop_parts4(lm, CropConfig{1.3, 224, std::nullopt});
    const RegionCrop& mouth = crop_of(crops, Region::mouth);
    CHECK(mouth.box.x0 == Catch::Approx(74.0).margin(1e-12));
    CHECK(mouth.box.y0 == Catch::Approx(174.0).margin(1e-12));
    CHECK(mouth.box.x1 == Catch::Approx(126.0).margin(1e-12));
    CHECK(mouth.box.y1 == Catch::Approx(226.0).margin(1e-12));
    CHECK(mouth.preserve_aspect);
    CHECK(mouth.pad.left == 0.0);
}

TEST_CASE("already-square point set yields a margin-scaled square on the same center") {
    LandmarkSet lm = testutil::canonical_landmarks();
    // nose points on a 30x30 square centered at (128, 130)
    for (int i = kNoseBegin; i < kNoseEnd; ++i) lm.points[static_cast<std::size_t>(i)] = {128.0, 130.0};
    lm.points[27] = {113.0, 115.0};
    lm.points[35] = {143.0, 145.0};
    auto crops = crop_parts4(lm);
    const RegionCrop& nose = crop_of(crops, Region::nose);
    CHECK(nose.box.center().x == Catch::Approx(128.0).margin(1e-9));
    CHECK(nose.box.center().y == Catch::Approx(130.0).margin(1e-9));
    CHECK(nose.box.width() == Catch::Approx(30.0 * 1.3).margin(1e-9));
    CHECK(std::abs(nose.box.width() - nose.box.height()) < 1e-6);
}

TEST_CASE("crop near the edge records pad and keeps the pre-clip box") {
    LandmarkSet lm = testutil::canonical_landmarks();
    // push the whole face towards the left border
    for (Vec2& p : lm.points) p.x -= 75.0;
    auto crops = crop_parts4(lm);
    const RegionCrop& left = crop_of(crops, Region::left_periocular);
    CHECK(left.box.x0 < 0.0);
    CHECK(left.pad.left == Catch::Approx(-left.box.x0));
    CHECK(left.pad.right == 0.0);
    CHECK(left.pad.top == 0.0);
}

TEST_CASE("parts-4 emits the four part tags") {
    auto crops = crop_parts4(testutil::canonical_landmarks());
    REQUIRE(crops.size() == 4);
    CHECK(crops[0].tag == Region::left_periocular);
    CHECK(crops[1].tag == Region::right_periocular);
    CHECK(crops[2].tag == Region::nose);
    CHECK(crops[3].tag == Region::mouth);
}

TEST_CASE("thirds anchor arithmetic") {
    LandmarkSet lm = testutil::canonical_landmarks();
    lm.points[kGlabellaLeftIndex].y = 80.0;
    lm.points[kGlabellaRightIndex].y = 80.0;
    lm.points[kSubnasaleIndex].y = 120.0;
    lm.points[kMentonIndex].y = 160.0;
    auto crops = crop_thirds3(lm);
    REQUIRE(crops.size() == 3);
    CHECK(crops[0].box.y0 == Catch::Approx(40.0).margin(1e-12));
    CHECK(crops[0].box.y1 == Catch::Approx(80.0).margin(1e-12));
    CHECK(crops[1].box.y0 == Catch::Approx(80.0).margin(1e-12));
    CHECK(crops[1].box.y1 == Catch::Approx(120.0).margin(1e-12));
    CHECK(crops[2].box.y0 == Catch::Approx(120.0).margin(1e-12));
    CHECK(crops[2].box.y1 == Catch::Approx(160.0).margin(1e-12));
    for (const auto& c : crops) CHECK_FALSE(c.preserve_aspect);
}

TEST_CASE("hairline clips at the top border and records the overflow") {
    LandmarkSet lm = testutil::canonical_landmarks();
    lm.points[kGlabellaLeftIndex].y = 30.0;
    lm.points[kGlabellaRightIndex].y = 30.0;
    lm.points[kSubnasaleIndex].y = 120.0;
    lm.points[kMentonIndex].y = 200.0;
    auto crops = crop_thirds3(lm);
    CHECK(crops[0].box.y0 == 0.0);
    CHECK(crops[0].pad.top == Catch::Approx(60.0).margin(1e-12));
}

TEST_CASE("hairline override is honored") {
    LandmarkSet lm = testutil::canonical_landmarks();
    CropConfig cfg;
    cfg.hairline_y = 50.0;
    auto crops = crop_thirds3(lm, cfg);
    CHECK(crops[0].box.y0 == 50.0);
    CHECK(crops[0].pad.top == 0.0);
}

TEST_CASE("inverted anchors are rejected") {
    LandmarkSet lm = testutil::canonical_landmarks();
    lm.points[kSubnasaleIndex].y = 90.0;
    lm.points[kMentonIndex].y = 80.0;
    try {
        crop_thirds3(lm);
        FAIL("expected inverted-anchors");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::inverted_anchors);
    }
}

TEST_CASE("geometry properties over random landmark sets") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        LandmarkSet lm = align(testutil::random_landmarks(rng)).landmarks;

        auto parts = crop_parts4(lm);
        for (const auto& c : parts) {
            CHECK(std::abs(c.box.width() - c.box.height()) < 1e-6);
        }
        RegionCrop hol = crop_holistic(lm);
        CHECK(std::abs(hol.box.width() - hol.box.height()) < 1e-6);

        auto thirds = crop_thirds3(lm);
        CHECK(thirds[0].box.y1 == thirds[1].box.y0);
        CHECK(thirds[1].box.y1 == thirds[2].box.y0);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = i + 1; j < 3; ++j) {
                double overlap = std::min(thirds[i].box.y1, thirds[j].box.y1) -
                                 std::max(thirds[i].box.y0, thirds[j].box.y0);
                CHECK(overlap <= 0.0);
            }
        }

        // translation equivariance
        double dx = 17.0, dy = 23.0;
        LandmarkSet moved = lm;
        for (Vec2& p : moved.points) p = p + Vec2{dx, dy};
        moved.image_width += static_cast<int>(dx);
        moved.image_height += static_cast<int>(dy);
        auto moved_parts = crop_parts4(moved);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            CHECK(moved_parts[i].box.x0 == Catch::Approx(parts[i].box.x0 + dx).margin(1e-9));
            CHECK(moved_parts[i].box.y0 == Catch::Approx(parts[i].box.y0 + dy).margin(1e-9));
            CHECK(moved_parts[i].box.x1 == Catch::Approx(parts[i].box.x1 + dx).margin(1e-9));
            CHECK(moved_parts[i].box.y1 == Catch::Approx(parts[i].box.y1 + dy).margin(1e-9));
        }
    }
}

TEST_CASE("mirroring swaps the periocular crops to mirror positions") {
    Rng rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        LandmarkSet lm = testutil::random_landmarks(rng);
        LandmarkSet mirrored = testutil::mirrored_landmarks(lm);
        double w = lm.image_width;

        auto crops = crop_parts4(align(lm).landmarks);
        auto mirrored_crops = crop_parts4(align(mirrored).landmarks);

        std::map<Region, Region> swapped = {{Region::left_periocular, Region::right_periocular},
                                            {Region::right_periocular, Region::left_periocular},
                                            {Region::nose, Region::nose},
                                            {Region::mouth, Region::mouth}};
        for (const auto& c : crops) {
            for (const auto& mc : mirrored_crops) {
                if (mc.tag != swapped[c.tag]) continue;
                CHECK(std::abs(mc.box.x0 - (w - c.box.x1)) < 1e-6);
                CHECK(std::abs(mc.box.x1 - (w - c.box.x0)) < 1e-6);
                CHECK(std::abs(mc.box.y0 - c.box.y0) < 1e-6);
                CHECK(std::abs(mc.box.y1 - c.box.y1) < 1e-6);
            }
        }
    }
}
