#pragma once

#include "partfuse/common.hpp"
#include "partfuse/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace partfuse {

struct Box {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Vec2 center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
};

/// Out-of-image overflow of a box, per edge. A component is positive exactly
/// when the pre-clip box crossed that image boundary.
struct Padding {
    double left = 0, top = 0, right = 0, bottom = 0;
};

struct RegionCrop {
    Region tag = Region::holistic;
    Box box;
    Padding pad;
    int resize_to = 224;
    bool preserve_aspect = true;
};

struct CropConfig {
    double margin = 1.3;
    int resize_to = 224;
    /// Per-image override for the estimated hairline row.
    std::optional<double> hairline_y;
};

namespace detail {

inline Box tight_box(const LandmarkSet& lm, std::initializer_list<std::pair<int, int>> ranges) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (auto [begin, end] : ranges) {
        for (int i = begin; i < end; ++i) {
            const Vec2& p = lm.points[static_cast<std::size_t>(i)];
            x0 = std::min(x0, p.x);
            y0 = std::min(y0, p.y);
            x1 = std::max(x1, p.x);
            y1 = std::max(y1, p.y);
        }
    }
    return {x0, y0, x1, y1};
}

inline Padding overflow_of(const Box& b, int width, int height) {
    Padding pad;
    pad.left = std::max(0.0, -b.x0);
    pad.top = std::max(0.0, -b.y0);
    pad.right = std::max(0.0, b.x1 - width);
    pad.bottom = std::max(0.0, b.y1 - height);
    return pad;
}

/// Tight box -> square (expand the short axis about its center) -> margin
/// scale about the same center.
inline Box expanded_square(const Box& tight, double margin) {
    Vec2 c = tight.center();
    double half = std::max(tight.width(), tight.height()) * margin / 2.0;
    return {c.x - half, c.y - half, c.x + half, c.y + half};
}

inline RegionCrop square_crop(Region tag, const LandmarkSet& lm, const Box& tight,
                              const CropConfig& cfg) {
    RegionCrop crop;
    crop.tag = tag;
    crop.box = expanded_square(tight, cfg.margin);
    crop.pad = overflow_of(crop.box, lm.image_width, lm.image_height);
    crop.resize_to = cfg.resize_to;
    crop.preserve_aspect = true;
    return crop;
}

} // namespace detail

/// Whole-face crop: the same square-expansion rule as the parts, applied to
/// all 68 points.
inline RegionCrop crop_holistic(const LandmarkSet& aligned, const CropConfig& cfg = {}) {
    return detail::square_crop(Region::holistic, aligned,
                               detail::tight_box(aligned, {{0, kLandmarkCount}}), cfg);
}

/**
 * Four fiducial parts: left periocular (brow + eye), right periocular, nose
 * and mouth. Each is the tight landmark box expanded to a margin-scaled
 * square; crops may overlap and may cross image borders (recorded in pad).
 */
inline std::vector<RegionCrop> crop_parts4(const LandmarkSet& aligned, const CropConfig& cfg = {}) {
    std::vector<RegionCrop> crops;
    crops.reserve(4);
    crops.push_back(detail::square_crop(
        Region::left_periocular, aligned,
        detail::tight_box(aligned, {{kLeftBrowBegin, kLeftBrowEnd}, {kLeftEyeBegin, kLeftEyeEnd}}), cfg));
    crops.push_back(detail::square_crop(
        Region::right_periocular, aligned,
        detail::tight_box(aligned, {{kRightBrowBegin, kRightBrowEnd}, {kRightEyeBegin, kRightEyeEnd}}),
        cfg));
    crops.push_back(detail::square_crop(Region::nose, aligned,
                                        detail::tight_box(aligned, {{kNoseBegin, kNoseEnd}}), cfg));
    crops.push_back(detail::square_crop(Region::mouth, aligned,
                                        detail::tight_box(aligned, {{kMouthBegin, kMouthEnd}}), cfg));
    return crops;
}

/**
 * Three vertically stacked facial thirds with disjoint interiors:
 * hairline->glabella, glabella->subnasale, subnasale->menton. The 68-point
 * set has no hairline landmark, so the hairline is estimated by reflecting
 * the middle third upwards (overridable via CropConfig::hairline_y) and
 * clipped at the top border; the clipped amount is recorded as pad.top.
 */
inline std::vector<RegionCrop> crop_thirds3(const LandmarkSet& aligned, const CropConfig& cfg = {}) {
    double glabella_y = (aligned.points[kGlabellaLeftIndex].y + aligned.points[kGlabellaRightIndex].y) / 2.0;
    double subnasale_y = aligned.points[kSubnasaleIndex].y;
    double menton_y = aligned.points[kMentonIndex].y;

    double raw_hairline = cfg.hairline_y ? *cfg.hairline_y : glabella_y - (subnasale_y - glabella_y);
    double hairline_y = std::max(0.0, raw_hairline);

    if (!(hairline_y < glabella_y && glabella_y < subnasale_y && subnasale_y < menton_y)) {
        fail(Errc::inverted_anchors, "facial-third anchors not strictly increasing for image " +
                                         aligned.image_id);
    }

    Box jaw = detail::tight_box(aligned, {{kJawBegin, kJawEnd}});
    auto make = [&](Region tag, double top, double bottom, double pre_clip_top) {
        RegionCrop crop;
        crop.tag = tag;
        crop.box = {jaw.x0, top, jaw.x1, bottom};
        crop.pad = detail::overflow_of(crop.box, aligned.image_width, aligned.image_height);
        crop.pad.top = std::max(crop.pad.top, top - pre_clip_top);
        crop.resize_to = cfg.resize_to;
        crop.preserve_aspect = false;
        return crop;
    };

    std::vector<RegionCrop> crops;
    crops.reserve(3);
    crops.push_back(make(Region::third_upper, hairline_y, glabella_y, raw_hairline));
    crops.push_back(make(Region::third_middle, glabella_y, subnasale_y, glabella_y));
    crops.push_back(make(Region::third_lower, subnasale_y, menton_y, subnasale_y));
    return crops;
}

} // namespace partfuse
