#pragma once

#include "partfuse/common.hpp"
#include "partfuse/csv.hpp"
#include "partfuse/embeddings.hpp"
#include "partfuse/manifest.hpp"
#include "partfuse/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace partfuse {

inline constexpr std::string_view kSynthProvider = "synth";

/**
 * Synthetic population description. Every listed region gets, per subject, a
 * random unit identity vector; the before embedding adds isotropic Gaussian
 * noise of the region's sigma, the after embedding additionally moves by the
 * region's delta along a random direction (the makeup perturbation).
 */
struct ScenarioSpec {
    int n_subjects = 0;
    int dim = 0;
    std::uint64_t seed = 0;
    std::string dataset_id = "synth";
    std::map<Region, double> region_noise;  // sigma per region
    std::map<Region, double> makeup_shift;  // delta per region
};

inline void validate_scenario(const ScenarioSpec& spec) {
    if (spec.n_subjects < 2) fail(Errc::malformed_file, "scenario needs at least 2 subjects");
    if (spec.dim < 2) fail(Errc::malformed_file, "scenario needs dim >= 2");
    if (spec.region_noise.empty()) fail(Errc::malformed_file, "scenario lists no regions");
    for (const auto& [r, v] : spec.region_noise) {
        if (!(v >= 0) || !std::isfinite(v)) fail(Errc::malformed_file, "noise must be finite and >= 0");
    }
    for (const auto& [r, v] : spec.makeup_shift) {
        if (!(v >= 0) || !std::isfinite(v)) fail(Errc::malformed_file, "shift must be finite and >= 0");
        if (!spec.region_noise.count(r)) {
            fail(Errc::malformed_file, "shift given for region without noise entry: " +
                                           std::string(to_string(r)));
        }
    }
}

/// Key=value scenario file: n_subjects, dim, seed, dataset_id, and per
/// region `noise.<region>` / `shift.<region>` entries.
inline ScenarioSpec parse_scenario(std::string_view text) {
    ScenarioSpec spec;
    auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = trim(lines[li]);
        if (line.empty() || line.front() == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(Errc::malformed_file, "scenario line " + std::to_string(li + 1) + " is not key=value");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string_view value = trim(line.substr(eq + 1));
        if (key == "n_subjects") {
            spec.n_subjects = static_cast<int>(parse_long(value, key));
        } else if (key == "dim") {
            spec.dim = static_cast<int>(parse_long(value, key));
        } else if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_long(value, key));
        } else if (key == "dataset_id") {
            spec.dataset_id = std::string(value);
        } else if (key.rfind("noise.", 0) == 0 || key.rfind("shift.", 0) == 0) {
            auto region = region_from_string(key.substr(6));
            if (!region) fail(Errc::malformed_file, "unknown region in scenario key '" + key + "'");
            auto& map = key[0] == 'n' ? spec.region_noise : spec.makeup_shift;
            map[*region] = parse_double(value, key);
        } else {
            fail(Errc::malformed_file, "unknown scenario key '" + key + "'");
        }
    }
    validate_scenario(spec);
    return spec;
}

struct SyntheticData {
    DatasetManifest manifest;
    EmbeddingStore store;
};

/// Deterministic generation: one RNG stream, subjects in index order and
/// regions in enum order, so identical specs reproduce stores bit-exactly.
inline SyntheticData generate(const ScenarioSpec& spec) {
    validate_scenario(spec);
    Rng rng(mix_seed(spec.seed, 0x5e17));

    SyntheticData data;
    data.manifest.dataset_id = spec.dataset_id;

    int id_width = 1;
    for (int v = spec.n_subjects; v >= 10; v /= 10) ++id_width;

    for (int s = 0; s < spec.n_subjects; ++s) {
        std::string num = std::to_string(s + 1);
        // dataset-qualified ids let several generated datasets share a store
        std::string subject =
            spec.dataset_id + "_s" + std::string(static_cast<std::size_t>(id_width) - num.size(), '0') + num;
        std::string before_id = subject + "_b";
        std::string after_id = subject + "_a";
        data.manifest.entries.push_back({subject, before_id, MakeupState::before, "", ""});
        data.manifest.entries.push_back({subject, after_id, MakeupState::after, "", ""});

        for (Region r : kAllRegions) {
            auto noise_it = spec.region_noise.find(r);
            if (noise_it == spec.region_noise.end()) continue;
            double sigma = noise_it->second;
            auto shift_it = spec.makeup_shift.find(r);
            double delta = shift_it == spec.makeup_shift.end() ? 0.0 : shift_it->second;

            std::vector<double> identity = rng.unit_vector(spec.dim);

            EmbeddingRecord before;
            before.subject_id = subject;
            before.image_id = before_id;
            before.region = r;
            before.provider_id = std::string(kSynthProvider);
            before.values = identity;
            for (double& v : before.values) v += sigma * rng.normal();

            EmbeddingRecord after;
            after.subject_id = subject;
            after.image_id = after_id;
            after.region = r;
            after.provider_id = std::string(kSynthProvider);
            after.values = identity;
            for (double& v : after.values) v += sigma * rng.normal();
            if (delta > 0) {
                std::vector<double> dir = rng.unit_vector(spec.dim);
                for (int i = 0; i < spec.dim; ++i) {
                    after.values[static_cast<std::size_t>(i)] += delta * dir[static_cast<std::size_t>(i)];
                }
            }

            data.store.insert(std::move(before));
            data.store.insert(std::move(after));
        }
    }
    return data;
}

} // namespace partfuse
