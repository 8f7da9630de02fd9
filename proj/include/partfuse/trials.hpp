#pragma once

#include "partfuse/common.hpp"
#include "partfuse/csv.hpp"
#include "partfuse/embeddings.hpp"
#include "partfuse/parallel.hpp"

#include <map>
#include <string>
#include <vector>

namespace partfuse {

/// One comparison pair. Genuine means both images belong to one subject.
struct TrialPair {
    std::string image_a;
    std::string image_b;
    bool genuine = false;
};

struct TrialScoreVector {
    TrialPair trial;
    std::vector<double> scores;
};

/// Per-trial region scores with the region order they were computed in.
struct ScoredTrials {
    std::vector<Region> region_order;
    std::vector<TrialScoreVector> trials;

    std::size_t genuine_count() const {
        std::size_t n = 0;
        for (const auto& t : trials) n += t.trial.genuine ? 1 : 0;
        return n;
    }
    std::size_t impostor_count() const { return trials.size() - genuine_count(); }
};

/// Chooses the embedding provider for each region.
using ProviderMap = std::map<Region, std::string>;

inline std::vector<TrialPair> parse_trials_csv(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "image_a,image_b,label") {
        fail(Errc::malformed_file, "trial file must start with header image_a,image_b,label");
    }
    std::vector<TrialPair> out;
    out.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto f = split_fields(lines[li]);
        if (f.size() != 3) fail(Errc::malformed_file, "trial row " + std::to_string(li) + " needs 3 fields");
        TrialPair t;
        t.image_a = std::string(trim(f[0]));
        t.image_b = std::string(trim(f[1]));
        auto label = trim(f[2]);
        if (label == "genuine") {
            t.genuine = true;
        } else if (label == "impostor") {
            t.genuine = false;
        } else {
            fail(Errc::malformed_file, "trial label must be genuine or impostor, got '" + std::string(label) + "'");
        }
        if (t.image_a == t.image_b) {
            fail(Errc::malformed_file, "trial row " + std::to_string(li) + " compares an image with itself");
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline std::string format_trials_csv(const std::vector<TrialPair>& trials) {
    std::string out = "image_a,image_b,label\n";
    for (const TrialPair& t : trials) {
        out += t.image_a + "," + t.image_b + "," + (t.genuine ? "genuine" : "impostor") + "\n";
    }
    return out;
}

/// Parses the region->provider key=value file ('#' comments allowed).
inline ProviderMap parse_provider_map(std::string_view text) {
    ProviderMap map;
    auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = trim(lines[li]);
        if (line.empty() || line.front() == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(Errc::malformed_file, "provider map line " + std::to_string(li + 1) + " is not key=value");
        }
        auto region = region_from_string(trim(line.substr(0, eq)));
        if (!region) {
            fail(Errc::malformed_file, "unknown region in provider map line " + std::to_string(li + 1));
        }
        std::string provider(trim(line.substr(eq + 1)));
        if (provider.empty()) {
            fail(Errc::malformed_file, "empty provider in provider map line " + std::to_string(li + 1));
        }
        if (!map.emplace(*region, std::move(provider)).second) {
            fail(Errc::malformed_file, "region mapped twice in provider map");
        }
    }
    return map;
}

/**
 * Scores every trial on every requested region with the mapped provider.
 * The output order equals the trial order; scoring parallelizes over trials
 * without affecting it. Labels are checked against the subject ids recorded
 * in the store.
 */
inline ScoredTrials score_trials(const EmbeddingStore& store, const std::vector<TrialPair>& trials,
                                 const std::vector<Region>& regions, const ProviderMap& providers) {
    if (regions.empty()) fail(Errc::usage, "no regions requested");
    for (Region r : regions) {
        if (!providers.count(r)) {
            fail(Errc::missing_provider, "no provider mapped for region " + std::string(to_string(r)));
        }
    }

    ScoredTrials out;
    out.region_order = regions;
    out.trials.resize(trials.size());
    parallel_for(trials.size(), [&](std::size_t i) {
        const TrialPair& t = trials[i];
        if (t.image_a == t.image_b) {
            fail(Errc::malformed_file, "trial compares image " + t.image_a + " with itself");
        }
        bool same_subject = store.subject_of(t.image_a) == store.subject_of(t.image_b);
        if (same_subject != t.genuine) {
            fail(Errc::label_mismatch, "trial (" + t.image_a + ", " + t.image_b + ") labelled " +
                                           (t.genuine ? "genuine" : "impostor") +
                                           " but subject ids say otherwise");
        }
        TrialScoreVector tsv;
        tsv.trial = t;
        tsv.scores.reserve(regions.size());
        for (Region r : regions) {
            const std::string& provider = providers.at(r);
            const EmbeddingRecord& a = store.require(t.image_a, r, provider);
            const EmbeddingRecord& b = store.require(t.image_b, r, provider);
            tsv.scores.push_back(cosine_score(a, b));
        }
        out.trials[i] = std::move(tsv);
    });
    return out;
}

inline std::string format_scores_csv(const ScoredTrials& scored) {
    std::string out = "image_a,image_b,label";
    for (Region r : scored.region_order) {
        out += ",";
        out += to_string(r);
    }
    out += "\n";
    for (const TrialScoreVector& t : scored.trials) {
        out += t.trial.image_a + "," + t.trial.image_b + "," + (t.trial.genuine ? "genuine" : "impostor");
        for (double s : t.scores) {
            out += ",";
            out += fmt_double(s);
        }
        out += "\n";
    }
    return out;
}

/// Fused-score file: one calibrated scalar per trial.
struct FusedTrials {
    std::vector<TrialPair> trials;
    std::vector<double> scores;
};

inline std::string format_fused_csv(const std::vector<TrialPair>& trials,
                                    const std::vector<double>& scores) {
    if (trials.size() != scores.size()) {
        fail(Errc::dimension_mismatch, "fused score count disagrees with trial count");
    }
    std::string out = "image_a,image_b,label,score\n";
    for (std::size_t i = 0; i < trials.size(); ++i) {
        out += trials[i].image_a + "," + trials[i].image_b + "," +
               (trials[i].genuine ? "genuine" : "impostor") + "," + fmt_double(scores[i]) + "\n";
    }
    return out;
}

inline FusedTrials parse_fused_csv(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "image_a,image_b,label,score") {
        fail(Errc::malformed_file, "fused file must start with header image_a,image_b,label,score");
    }
    FusedTrials out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto f = split_fields(lines[li]);
        if (f.size() != 4) fail(Errc::malformed_file, "fused row " + std::to_string(li) + " needs 4 fields");
        TrialPair t;
        t.image_a = std::string(trim(f[0]));
        t.image_b = std::string(trim(f[1]));
        auto label = trim(f[2]);
        if (label != "genuine" && label != "impostor") {
            fail(Errc::malformed_file, "bad label in fused row " + std::to_string(li));
        }
        t.genuine = label == "genuine";
        out.trials.push_back(std::move(t));
        out.scores.push_back(parse_double(f[3], "fused score"));
    }
    return out;
}

inline ScoredTrials parse_scores_csv(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty()) fail(Errc::malformed_file, "empty score file");
    auto head = split_fields(lines[0]);
    if (head.size() < 4 || head[0] != "image_a" || head[1] != "image_b" || head[2] != "label") {
        fail(Errc::malformed_file, "score file header must be image_a,image_b,label,<regions...>");
    }
    ScoredTrials out;
    for (std::size_t i = 3; i < head.size(); ++i) {
        auto region = region_from_string(trim(head[i]));
        if (!region) fail(Errc::malformed_file, "unknown region column '" + std::string(head[i]) + "'");
        out.region_order.push_back(*region);
    }
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto f = split_fields(lines[li]);
        if (f.size() != head.size()) {
            fail(Errc::malformed_file, "score row " + std::to_string(li) + " column count mismatch");
        }
        TrialScoreVector t;
        t.trial.image_a = std::string(trim(f[0]));
        t.trial.image_b = std::string(trim(f[1]));
        auto label = trim(f[2]);
        if (label != "genuine" && label != "impostor") {
            fail(Errc::malformed_file, "bad label in score row " + std::to_string(li));
        }
        t.trial.genuine = label == "genuine";
        for (std::size_t i = 3; i < f.size(); ++i) t.scores.push_back(parse_double(f[i], "score"));
        out.trials.push_back(std::move(t));
    }
    return out;
}

} // namespace partfuse
