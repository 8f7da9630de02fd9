#pragma once

#include "partfuse/common.hpp"
#include "partfuse/csv.hpp"

#include <array>
#include <cmath>
#include <string>

namespace partfuse {

inline constexpr int kLandmarkCount = 68;

// iBUG-68 index groups.
inline constexpr int kJawBegin = 0, kJawEnd = 17;
inline constexpr int kLeftBrowBegin = 17, kLeftBrowEnd = 22;
inline constexpr int kRightBrowBegin = 22, kRightBrowEnd = 27;
inline constexpr int kNoseBegin = 27, kNoseEnd = 36;
inline constexpr int kLeftEyeBegin = 36, kLeftEyeEnd = 42;
inline constexpr int kRightEyeBegin = 42, kRightEyeEnd = 48;
inline constexpr int kMouthBegin = 48, kMouthEnd = 68;

// Anchor landmarks for the facial thirds.
inline constexpr int kMentonIndex = 8;
inline constexpr int kGlabellaLeftIndex = 21;
inline constexpr int kGlabellaRightIndex = 22;
inline constexpr int kSubnasaleIndex = 33;

/// 68 named image points plus the dimensions of the image they were
/// estimated on. Points may fall outside the image; detectors overshoot.
struct LandmarkSet {
    std::string subject_id;
    std::string image_id;
    int image_width = 0;
    int image_height = 0;
    std::array<Vec2, kLandmarkCount> points{};
};

/**
 * Parses the landmark file format: line 1 carries
 * `subject_id,image_id,image_width,image_height`, followed by exactly 68
 * lines `idx,x,y` with idx ascending from 0.
 */
inline LandmarkSet parse_landmarks(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty()) fail(Errc::malformed_file, "empty landmark file");

    auto head = split_fields(lines[0]);
    if (head.size() != 4) {
        fail(Errc::malformed_file, "landmark header needs 4 fields, got " + std::to_string(head.size()));
    }
    LandmarkSet lm;
    lm.subject_id = std::string(trim(head[0]));
    lm.image_id = std::string(trim(head[1]));
    lm.image_width = static_cast<int>(parse_long(head[2], "image_width"));
    lm.image_height = static_cast<int>(parse_long(head[3], "image_height"));
    if (lm.image_width <= 0 || lm.image_height <= 0) {
        fail(Errc::bad_image_dims, "non-positive image dimensions in landmark file for " + lm.image_id);
    }

    if (lines.size() - 1 != kLandmarkCount) {
        fail(Errc::wrong_point_count,
             "expected 68 landmark rows, got " + std::to_string(lines.size() - 1));
    }
    for (int i = 0; i < kLandmarkCount; ++i) {
        auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
        if (fields.size() != 3) {
            fail(Errc::malformed_file, "landmark row " + std::to_string(i) + " needs 3 fields");
        }
        long idx = parse_long(fields[0], "landmark index");
        if (idx != i) {
            fail(Errc::malformed_file, "landmark indices must ascend 0..67, row " + std::to_string(i) +
                                           " has index " + std::to_string(idx));
        }
        double x = parse_double(fields[1], "landmark x");
        double y = parse_double(fields[2], "landmark y");
        if (!std::isfinite(x) || !std::isfinite(y)) {
            fail(Errc::malformed_file, "non-finite landmark coordinate at row " + std::to_string(i));
        }
        lm.points[static_cast<std::size_t>(i)] = Vec2{x, y};
    }
    return lm;
}

inline std::string format_landmarks(const LandmarkSet& lm) {
    std::string out;
    out += lm.subject_id + "," + lm.image_id + "," + std::to_string(lm.image_width) + "," +
           std::to_string(lm.image_height) + "\n";
    for (int i = 0; i < kLandmarkCount; ++i) {
        const Vec2& p = lm.points[static_cast<std::size_t>(i)];
        out += std::to_string(i) + "," + fmt_double(p.x) + "," + fmt_double(p.y) + "\n";
    }
    return out;
}

inline LandmarkSet load_landmarks(const std::filesystem::path& path) {
    return parse_landmarks(read_file(path));
}

} // namespace partfuse
