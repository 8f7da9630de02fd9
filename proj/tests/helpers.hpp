#pragma once

#include "partfuse/partfuse.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace testutil {

using namespace partfuse;

/// Mirror-symmetric 68-point template on a 256x256 image: horizontal eyes
/// exactly 64 px apart, anthropometrically plausible anchor rows.
inline LandmarkSet canonical_landmarks() {
    LandmarkSet lm;
    lm.subject_id = "subA";
    lm.image_id = "imgA";
    lm.image_width = 256;
    lm.image_height = 256;
    auto& p = lm.points;
    const double cx = 128.0;

    // jaw 0..16: semicircle, ears at y=128, menton at (128, 203)
    for (int i = 0; i <= 16; ++i) {
        double a = std::numbers::pi * (1.0 - i / 16.0);
        p[i] = {cx + 60.0 * std::cos(a), 128.0 + 75.0 * std::sin(a)};
    }
    // left brow 17..21 (outer -> inner), right brow mirrored
    const double brow_x[5] = {78, 86, 94, 102, 110};
    const double brow_y[5] = {108, 105, 103, 104, 106};
    for (int i = 0; i < 5; ++i) {
        p[17 + i] = {brow_x[i], brow_y[i]};
        p[26 - i] = {2 * cx - brow_x[i], brow_y[i]};
    }
    // nose bridge 27..30 and floor 31..35 (33 = subnasale)
    for (int i = 0; i < 4; ++i) p[27 + i] = {cx, 114.0 + 8.0 * i};
    const double floor_dx[5] = {-12, -6, 0, 6, 12};
    const double floor_dy[5] = {-2, -1, 0, -1, -2};
    for (int i = 0; i < 5; ++i) p[31 + i] = {cx + floor_dx[i], 148.0 + floor_dy[i]};
    // eyes: hexagons centered (96, 118) and (160, 118), inter-eye 64
    const double ex[6] = {-10, -5, 5, 10, 5, -5};
    const double ey[6] = {0, -4, -4, 0, 4, 4};
    for (int i = 0; i < 6; ++i) p[36 + i] = {96.0 + ex[i], 118.0 + ey[i]};
    // right eye written as the exact mirror so the iBUG pairing holds
    p[42] = {2 * cx - p[39].x, p[39].y};
    p[43] = {2 * cx - p[38].x, p[38].y};
    p[44] = {2 * cx - p[37].x, p[37].y};
    p[45] = {2 * cx - p[36].x, p[36].y};
    p[46] = {2 * cx - p[41].x, p[41].y};
    p[47] = {2 * cx - p[40].x, p[40].y};
    // mouth outer 48..59: ellipse centered (128, 172), rx 24, ry 10
    const double mcx = cx, mcy = 172, rx = 24, ry = 10;
    p[48] = {mcx - rx, mcy};
    for (int k = 1; k <= 5; ++k) {
        double a = std::numbers::pi - k * std::numbers::pi / 6.0;
        p[48 + k] = {mcx + rx * std::cos(a), mcy - ry * std::sin(a)};
    }
    p[54] = {mcx + rx, mcy};
    for (int k = 1; k <= 5; ++k) {
        double a = k * std::numbers::pi / 6.0;
        p[54 + k] = {mcx + rx * std::cos(a), mcy + ry * std::sin(a)};
    }
    // mouth inner 60..67: rx 14, ry 4
    const double rx2 = 14, ry2 = 4;
    p[60] = {mcx - rx2, mcy};
    p[61] = {mcx - rx2 / 2, mcy - ry2};
    p[62] = {mcx, mcy - ry2};
    p[63] = {mcx + rx2 / 2, mcy - ry2};
    p[64] = {mcx + rx2, mcy};
    p[65] = {mcx + rx2 / 2, mcy + ry2};
    p[66] = {mcx, mcy + ry2};
    p[67] = {mcx - rx2 / 2, mcy + ry2};
    return lm;
}

/// iBUG-68 horizontal mirror permutation: entry i holds the index whose
/// mirrored point becomes point i.
inline std::array<int, 68> mirror_permutation() {
    std::array<int, 68> perm{};
    auto swap_range = [&](int begin, int end) {
        for (int i = begin; i <= end; ++i) perm[i] = end - (i - begin);
    };
    swap_range(0, 16);   // jaw
    swap_range(17, 26);  // brows
    for (int i = 27; i <= 30; ++i) perm[i] = i;  // nose bridge
    swap_range(31, 35);  // nose floor
    const int eye_pairs[6][2] = {{36, 45}, {37, 44}, {38, 43}, {39, 42}, {40, 47}, {41, 46}};
    for (auto [a, b] : eye_pairs) {
        perm[a] = b;
        perm[b] = a;
    }
    swap_range(48, 54);  // outer mouth top
    swap_range(55, 59);  // outer mouth bottom
    swap_range(60, 64);  // inner mouth top
    swap_range(65, 67);  // inner mouth bottom
    return perm;
}

inline LandmarkSet mirrored_landmarks(const LandmarkSet& lm) {
    LandmarkSet out = lm;
    auto perm = mirror_permutation();
    for (int i = 0; i < 68; ++i) {
        const Vec2& src = lm.points[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        out.points[static_cast<std::size_t>(i)] = {lm.image_width - src.x, src.y};
    }
    return out;
}

/// Random plausible face: the canonical template under a random similarity
/// transform plus small per-point jitter.
inline LandmarkSet random_landmarks(Rng& rng) {
    LandmarkSet lm = canonical_landmarks();
    double angle = rng.uniform(-0.5, 0.5);
    double scale = rng.uniform(0.7, 1.3);
    double tx = rng.uniform(-40.0, 40.0);
    double ty = rng.uniform(-40.0, 40.0);
    double c = std::cos(angle), s = std::sin(angle);
    for (Vec2& p : lm.points) {
        double x = p.x - 128.0, y = p.y - 128.0;
        p.x = scale * (c * x - s * y) + 128.0 + tx + rng.uniform(-1.5, 1.5);
        p.y = scale * (s * x + c * y) + 128.0 + ty + rng.uniform(-1.5, 1.5);
    }
    return lm;
}

inline ScoredTrials make_scored(const std::vector<Region>& regions,
                                const std::vector<std::pair<std::vector<double>, bool>>& rows) {
    ScoredTrials st;
    st.region_order = regions;
    int i = 0;
    for (const auto& [scores, genuine] : rows) {
        TrialScoreVector t;
        t.trial.image_a = "a" + std::to_string(i);
        t.trial.image_b = "b" + std::to_string(i);
        t.trial.genuine = genuine;
        t.scores = scores;
        st.trials.push_back(std::move(t));
        ++i;
    }
    return st;
}

/// The 2-region / 8-trial fusion fixture; classes overlap, so the optimum is
/// finite.
inline ScoredTrials fusion_fixture() {
    return make_scored({Region::holistic, Region::nose}, {
                                                             {{0.8, 0.7}, true},
                                                             {{0.6, 0.9}, true},
                                                             {{0.7, 0.4}, true},
                                                             {{0.5, 0.6}, true},
                                                             {{0.3, 0.2}, false},
                                                             {{0.65, 0.55}, false},
                                                             {{0.2, 0.3}, false},
                                                             {{0.6, 0.1}, false},
                                                         });
}

// Scenario definitions shared between the unit suite and the acceptance
// runner. All eight region tags are populated: holistic heavily perturbed
// by makeup, the two periocular regions clean, the rest moderately hit.
inline ScenarioSpec holistic_degraded_scenario(std::uint64_t seed, int n_subjects = 200) {
    ScenarioSpec s;
    s.n_subjects = n_subjects;
    s.dim = 64;
    s.seed = seed;
    s.dataset_id = "bench";
    for (Region r : kAllRegions) {
        s.region_noise[r] = 0.15;
        s.makeup_shift[r] = 1.2;
    }
    s.region_noise[Region::holistic] = 0.08;
    s.makeup_shift[Region::holistic] = 2.5;
    s.makeup_shift[Region::left_periocular] = 0.0;
    s.makeup_shift[Region::right_periocular] = 0.0;
    return s;
}

/// All regions identically perturbed: fusion has no complementary signal to
/// exploit and must not substantially hurt.
inline ScenarioSpec uniform_degraded_scenario(std::uint64_t seed, int n_subjects = 200) {
    ScenarioSpec s;
    s.n_subjects = n_subjects;
    s.dim = 64;
    s.seed = seed;
    s.dataset_id = "bench";
    for (Region r : kAllRegions) {
        s.region_noise[r] = 0.15;
        s.makeup_shift[r] = 1.5;
    }
    return s;
}

inline std::vector<Region> all_regions_vec() {
    return {kAllRegions.begin(), kAllRegions.end()};
}

inline ProtocolConfig synth_protocol_config(const std::vector<Region>& regions, bool fusion) {
    ProtocolConfig cfg;
    cfg.regions = regions;
    for (Region r : regions) cfg.providers[r] = std::string(kSynthProvider);
    cfg.fusion = fusion;
    return cfg;
}

inline std::string scenario_text(const ScenarioSpec& spec) {
    std::string out;
    out += "n_subjects = " + std::to_string(spec.n_subjects) + "\n";
    out += "dim = " + std::to_string(spec.dim) + "\n";
    out += "seed = " + std::to_string(spec.seed) + "\n";
    out += "dataset_id = " + spec.dataset_id + "\n";
    for (const auto& [r, v] : spec.region_noise) {
        out += "noise." + std::string(to_string(r)) + " = " + fmt_double(v) + "\n";
    }
    for (const auto& [r, v] : spec.makeup_shift) {
        out += "shift." + std::string(to_string(r)) + " = " + fmt_double(v) + "\n";
    }
    return out;
}

} // namespace testutil
