#pragma once

#include "partfuse/common.hpp"
#include "partfuse/landmarks.hpp"

#include <array>
#include <cmath>

namespace partfuse {

/// Canonical inter-eye distance after alignment, in pixels.
inline constexpr double kCanonicalInterEye = 64.0;

/// 2x3 similarity transform (rotation + uniform scale + translation),
/// row-major: x' = m0*x + m1*y + m2, y' = m3*x + m4*y + m5.
struct AlignmentTransform {
    std::array<double, 6> m{1, 0, 0, 0, 1, 0};

    static AlignmentTransform identity() { return {}; }

    Vec2 operator()(Vec2 p) const {
        return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
    }

    double linear_determinant() const { return m[0] * m[4] - m[1] * m[3]; }

    AlignmentTransform inverse() const {
        double det = linear_determinant();
        AlignmentTransform inv;
        inv.m[0] = m[4] / det;
        inv.m[1] = -m[1] / det;
        inv.m[3] = -m[3] / det;
        inv.m[4] = m[0] / det;
        inv.m[2] = -(inv.m[0] * m[2] + inv.m[1] * m[5]);
        inv.m[5] = -(inv.m[3] * m[2] + inv.m[4] * m[5]);
        return inv;
    }
};

inline Vec2 mean_of(const LandmarkSet& lm, int begin, int end) {
    Vec2 sum{};
    for (int i = begin; i < end; ++i) sum = sum + lm.points[static_cast<std::size_t>(i)];
    return (1.0 / (end - begin)) * sum;
}

inline Vec2 left_eye_center(const LandmarkSet& lm) { return mean_of(lm, kLeftEyeBegin, kLeftEyeEnd); }
inline Vec2 right_eye_center(const LandmarkSet& lm) { return mean_of(lm, kRightEyeBegin, kRightEyeEnd); }

struct AlignResult {
    AlignmentTransform transform;
    LandmarkSet landmarks;
};

/**
 * Similarity alignment from the eye centers: rotates the inter-eye vector
 * onto the horizontal axis and scales it to `inter_eye` pixels. The eye
 * midpoint is the fixed point, so a face that is already horizontal at the
 * canonical distance maps through the identity.
 */
inline AlignResult align(const LandmarkSet& lm, double inter_eye = kCanonicalInterEye) {
    Vec2 left = left_eye_center(lm);
    Vec2 right = right_eye_center(lm);
    Vec2 d = right - left;
    double dist = std::hypot(d.x, d.y);
    if (dist < 1e-9) {
        fail(Errc::degenerate_eyes, "eye centers coincide for image " + lm.image_id);
    }
    double cos_t = d.x / dist;
    double sin_t = d.y / dist;
    double s = inter_eye / dist;

    AlignmentTransform t;
    t.m[0] = s * cos_t;
    t.m[1] = s * sin_t;
    t.m[3] = -s * sin_t;
    t.m[4] = s * cos_t;
    Vec2 c = 0.5 * (left + right);
    t.m[2] = c.x - (t.m[0] * c.x + t.m[1] * c.y);
    t.m[5] = c.y - (t.m[3] * c.x + t.m[4] * c.y);

    AlignResult res;
    res.transform = t;
    res.landmarks = lm;
    for (Vec2& p : res.landmarks.points) p = t(p);
    return res;
}

} // namespace partfuse
