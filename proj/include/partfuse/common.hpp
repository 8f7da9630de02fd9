#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace partfuse {

/// Error categories surfaced by the library. The CLI maps these onto its
/// exit-code contract (usage = 1, data = 2, numerical = 3).
enum class Errc {
    usage,
    malformed_file,
    wrong_point_count,
    bad_image_dims,
    degenerate_eyes,
    inverted_anchors,
    empty_intersection,
    dimension_mismatch,
    duplicate_key,
    non_finite_component,
    zero_norm,
    region_mismatch,
    provider_mismatch,
    missing_provider,
    missing_embedding,
    label_mismatch,
    single_class_input,
    region_order_mismatch,
    unsupported_mode,
    fold_too_small,
    provider_failure,
    io_failure,
    not_converged,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
};

/// Facial regions handled by the pipeline. The four fiducial parts overlap
/// freely; the three thirds form a vertical partition of the face.
enum class Region : int {
    holistic = 0,
    left_periocular,
    right_periocular,
    nose,
    mouth,
    third_upper,
    third_middle,
    third_lower,
};

inline constexpr std::array<Region, 8> kAllRegions = {
    Region::holistic,     Region::left_periocular, Region::right_periocular,
    Region::nose,         Region::mouth,           Region::third_upper,
    Region::third_middle, Region::third_lower,
};

inline constexpr std::array<Region, 4> kPartRegions = {
    Region::left_periocular,
    Region::right_periocular,
    Region::nose,
    Region::mouth,
};

inline constexpr std::array<Region, 3> kThirdRegions = {
    Region::third_upper,
    Region::third_middle,
    Region::third_lower,
};

inline std::string_view to_string(Region r) {
    switch (r) {
    case Region::holistic: return "holistic";
    case Region::left_periocular: return "left_periocular";
    case Region::right_periocular: return "right_periocular";
    case Region::nose: return "nose";
    case Region::mouth: return "mouth";
    case Region::third_upper: return "third_upper";
    case Region::third_middle: return "third_middle";
    case Region::third_lower: return "third_lower";
    }
    return "unknown";
}

inline std::optional<Region> region_from_string(std::string_view name) {
    for (Region r : kAllRegions) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

} // namespace partfuse
