#pragma once

#include "partfuse/common.hpp"
#include "partfuse/csv.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace partfuse {

enum class MakeupState { before, after };

inline std::string_view to_string(MakeupState s) { return s == MakeupState::before ? "before" : "after"; }

inline MakeupState makeup_state_from_string(std::string_view s) {
    if (s == "before") return MakeupState::before;
    if (s == "after") return MakeupState::after;
    fail(Errc::malformed_file, "makeup_state must be before or after, got '" + std::string(s) + "'");
}

struct ManifestEntry {
    std::string subject_id;
    std::string image_id;
    MakeupState state = MakeupState::before;
    std::string landmark_file;
    std::string image_file;
};

/// One dataset's images. The well-known pair datasets carry exactly one
/// before and one after shot per subject; the four-shot dataset carries two
/// of each; anything else is free-form.
struct DatasetManifest {
    std::string dataset_id;
    std::vector<ManifestEntry> entries;

    std::vector<std::string> subjects() const {
        std::set<std::string> ids;
        for (const auto& e : entries) ids.insert(e.subject_id);
        return {ids.begin(), ids.end()};
    }

    /// Image ids of one subject in one state, sorted.
    std::vector<std::string> images_of(const std::string& subject, MakeupState state) const {
        std::vector<std::string> out;
        for (const auto& e : entries) {
            if (e.subject_id == subject && e.state == state) out.push_back(e.image_id);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

inline bool is_pair_dataset(std::string_view id) { return id == "emfd" || id == "fam" || id == "m501"; }
inline bool is_four_shot_dataset(std::string_view id) { return id == "ymu"; }

inline void validate_manifest(const DatasetManifest& m) {
    if (m.entries.empty()) fail(Errc::malformed_file, "dataset " + m.dataset_id + " has no entries");
    std::set<std::string> images;
    std::map<std::string, std::pair<int, int>> counts; // subject -> (before, after)
    for (const auto& e : m.entries) {
        if (!images.insert(e.image_id).second) {
            fail(Errc::duplicate_key, "image " + e.image_id + " listed twice in dataset " + m.dataset_id);
        }
        auto& c = counts[e.subject_id];
        (e.state == MakeupState::before ? c.first : c.second) += 1;
    }
    for (const auto& [subject, c] : counts) {
        if (is_pair_dataset(m.dataset_id) && (c.first != 1 || c.second != 1)) {
            fail(Errc::malformed_file, "dataset " + m.dataset_id + " requires one before and one after image per subject; subject " +
                                           subject + " has " + std::to_string(c.first) + "/" +
                                           std::to_string(c.second));
        }
        if (is_four_shot_dataset(m.dataset_id) && (c.first != 2 || c.second != 2)) {
            fail(Errc::malformed_file, "dataset " + m.dataset_id + " requires two before and two after images per subject; subject " +
                                           subject + " has " + std::to_string(c.first) + "/" +
                                           std::to_string(c.second));
        }
    }
}

/// Parses the manifest CSV
/// `dataset_id,subject_id,image_id,makeup_state,landmark_file,image_file`.
/// Rows may interleave datasets; datasets come back in first-appearance
/// order, each validated.
inline std::vector<DatasetManifest> parse_manifest_csv(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "dataset_id,subject_id,image_id,makeup_state,landmark_file,image_file") {
        fail(Errc::malformed_file, "manifest file missing its header line");
    }
    std::vector<DatasetManifest> datasets;
    std::map<std::string, std::size_t> index;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto f = split_fields(lines[li]);
        if (f.size() != 6) fail(Errc::malformed_file, "manifest row " + std::to_string(li) + " needs 6 fields");
        std::string dataset_id(trim(f[0]));
        auto [it, inserted] = index.try_emplace(dataset_id, datasets.size());
        if (inserted) datasets.push_back(DatasetManifest{dataset_id, {}});
        ManifestEntry e;
        e.subject_id = std::string(trim(f[1]));
        e.image_id = std::string(trim(f[2]));
        e.state = makeup_state_from_string(trim(f[3]));
        e.landmark_file = std::string(trim(f[4]));
        e.image_file = std::string(trim(f[5]));
        datasets[it->second].entries.push_back(std::move(e));
    }
    for (const auto& m : datasets) validate_manifest(m);
    return datasets;
}

inline std::string format_manifest_csv(const std::vector<DatasetManifest>& datasets) {
    std::string out = "dataset_id,subject_id,image_id,makeup_state,landmark_file,image_file\n";
    for (const auto& m : datasets) {
        for (const auto& e : m.entries) {
            out += m.dataset_id + "," + e.subject_id + "," + e.image_id + "," +
                   std::string(to_string(e.state)) + "," + e.landmark_file + "," + e.image_file + "\n";
        }
    }
    return out;
}

} // namespace partfuse
