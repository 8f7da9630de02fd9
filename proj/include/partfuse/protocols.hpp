#pragma once

#include "partfuse/common.hpp"
#include "partfuse/embeddings.hpp"
#include "partfuse/fusion.hpp"
#include "partfuse/manifest.hpp"
#include "partfuse/metrics.hpp"
#include "partfuse/rng.hpp"
#include "partfuse/trials.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace partfuse {

enum class TrialMode { before_vs_after, before_vs_before, after_vs_after };

inline std::string_view to_string(TrialMode m) {
    switch (m) {
    case TrialMode::before_vs_after: return "before_vs_after";
    case TrialMode::before_vs_before: return "before_vs_before";
    case TrialMode::after_vs_after: return "after_vs_after";
    }
    return "unknown";
}

inline std::optional<TrialMode> trial_mode_from_string(std::string_view s) {
    for (TrialMode m : {TrialMode::before_vs_after, TrialMode::before_vs_before, TrialMode::after_vs_after}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

/**
 * Builds the full trial list for a dataset and mode. Genuine trials are all
 * same-subject pairs of the two states; impostor trials are all
 * cross-subject pairs (directed for the cross-state mode, since the before
 * image of one subject vs the after image of another is a distinct pair
 * from the reverse; deduplicated unordered pairs within a state).
 * Deterministic: subjects and images are enumerated in sorted order.
 */
inline std::vector<TrialPair> build_trials(const DatasetManifest& manifest, TrialMode mode) {
    MakeupState state_a = mode == TrialMode::after_vs_after ? MakeupState::after : MakeupState::before;
    MakeupState state_b = mode == TrialMode::before_vs_before ? MakeupState::before : MakeupState::after;
    bool within_state = mode != TrialMode::before_vs_after;

    std::vector<std::string> subjects = manifest.subjects();
    std::vector<std::vector<std::string>> imgs_a(subjects.size()), imgs_b(subjects.size());
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        imgs_a[s] = manifest.images_of(subjects[s], state_a);
        imgs_b[s] = manifest.images_of(subjects[s], state_b);
        std::size_t needed = within_state ? 2 : 1;
        if (imgs_a[s].size() < needed || imgs_b[s].size() < (within_state ? 2 : 1)) {
            fail(Errc::unsupported_mode, "dataset " + manifest.dataset_id + " does not support mode " +
                                             std::string(to_string(mode)) + ": subject " + subjects[s] +
                                             " lacks images");
        }
    }

    std::vector<TrialPair> trials;
    // genuine
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        if (within_state) {
            for (std::size_t i = 0; i < imgs_a[s].size(); ++i) {
                for (std::size_t j = i + 1; j < imgs_a[s].size(); ++j) {
                    trials.push_back({imgs_a[s][i], imgs_a[s][j], true});
                }
            }
        } else {
            for (const auto& a : imgs_a[s]) {
                for (const auto& b : imgs_b[s]) trials.push_back({a, b, true});
            }
        }
    }
    // impostor
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        for (std::size_t t = within_state ? s + 1 : 0; t < subjects.size(); ++t) {
            if (t == s) continue;
            for (const auto& a : imgs_a[s]) {
                for (const auto& b : (within_state ? imgs_a : imgs_b)[t]) {
                    trials.push_back({a, b, false});
                }
            }
        }
    }
    return trials;
}

/// Subject-disjoint cross-validation folds: a seeded shuffle of the sorted
/// subject list cut into contiguous test chunks.
struct FoldPlan {
    int n_folds = 5;
    std::uint64_t seed = 42;
    struct Fold {
        std::vector<std::string> train_subjects;
        std::vector<std::string> test_subjects;
    };
    std::vector<Fold> folds;
};

inline FoldPlan make_folds(const std::vector<std::string>& subjects, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) fail(Errc::fold_too_small, "need at least 2 folds");
    if (static_cast<std::size_t>(n_folds) > subjects.size()) {
        fail(Errc::fold_too_small, "more folds than subjects");
    }
    std::vector<std::string> shuffled = subjects;
    std::sort(shuffled.begin(), shuffled.end());
    Rng rng(mix_seed(seed, 17));
    rng.shuffle(shuffled);

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    std::size_t n = shuffled.size();
    std::size_t offset = 0;
    for (int f = 0; f < n_folds; ++f) {
        std::size_t size = n / static_cast<std::size_t>(n_folds) +
                           (static_cast<std::size_t>(f) < n % static_cast<std::size_t>(n_folds) ? 1 : 0);
        FoldPlan::Fold fold;
        fold.test_subjects.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(offset),
                                  shuffled.begin() + static_cast<std::ptrdiff_t>(offset + size));
        fold.train_subjects.reserve(n - size);
        for (std::size_t i = 0; i < n; ++i) {
            if (i < offset || i >= offset + size) fold.train_subjects.push_back(shuffled[i]);
        }
        std::sort(fold.test_subjects.begin(), fold.test_subjects.end());
        std::sort(fold.train_subjects.begin(), fold.train_subjects.end());
        plan.folds.push_back(std::move(fold));
        offset += size;
    }
    return plan;
}

struct ProtocolConfig {
    std::vector<Region> regions;
    ProviderMap providers;
    bool fusion = true;
    /// Train fusion on the whole dataset (the optimistic convention used for
    /// literature comparison) instead of leak-free subject-disjoint folds.
    bool paper_mode = false;
    int folds = 5;
    std::uint64_t seed = 42;
    double l2 = 0.0;
    /// Treat a non-converged fusion fit as a numerical failure.
    bool require_convergence = false;
    std::function<void(const std::string&)> warn;
};

namespace detail {

inline std::map<std::string, std::string> image_subjects(const DatasetManifest& m) {
    std::map<std::string, std::string> out;
    for (const auto& e : m.entries) out.emplace(e.image_id, e.subject_id);
    return out;
}

inline ScoredTrials subset(const ScoredTrials& scored, const std::vector<std::size_t>& indices) {
    ScoredTrials out;
    out.region_order = scored.region_order;
    out.trials.reserve(indices.size());
    for (std::size_t i : indices) out.trials.push_back(scored.trials[i]);
    return out;
}

inline TrainConfig train_config(const ProtocolConfig& cfg, const std::string& dataset_id) {
    TrainConfig tc;
    tc.l2 = cfg.l2;
    tc.dataset_id = dataset_id;
    tc.warn = cfg.warn;
    return tc;
}

inline FusionModel train_for_protocol(const ScoredTrials& scored, const ProtocolConfig& cfg,
                                      const std::string& dataset_id) {
    FusionModel model = train_llr(scored, train_config(cfg, dataset_id));
    if (cfg.require_convergence && !model.meta.converged) {
        fail(Errc::not_converged, "fusion training on " + dataset_id + " stopped after " +
                                      std::to_string(model.meta.iterations) +
                                      " iterations without reaching the gradient tolerance");
    }
    return model;
}

inline ScoreSet raw_single_region(const ScoredTrials& scored) {
    ScoreSet set;
    for (const auto& t : scored.trials) {
        (t.trial.genuine ? set.genuine : set.impostor).push_back(t.scores[0]);
    }
    return set;
}

inline void check_disjoint(const FoldPlan::Fold& fold) {
    std::set<std::string> train(fold.train_subjects.begin(), fold.train_subjects.end());
    for (const auto& s : fold.test_subjects) {
        if (train.count(s)) fail(Errc::fold_too_small, "subject " + s + " appears in both fold halves");
    }
}

} // namespace detail

struct SingleDatasetResult {
    EvalReport report;
    std::optional<FusionModel> model; // present in paper mode
};

/**
 * Single-dataset EER. With fusion off the single requested region's cosine
 * scores are evaluated directly. With fusion on the model is either trained
 * on everything (paper mode) or trained per subject-disjoint fold with the
 * pooled held-out fused scores evaluated once.
 */
inline SingleDatasetResult run_single_dataset_eer(const DatasetManifest& manifest,
                                                  const EmbeddingStore& store,
                                                  const ProtocolConfig& cfg) {
    std::vector<TrialPair> trials = build_trials(manifest, TrialMode::before_vs_after);
    ScoredTrials scored = score_trials(store, trials, cfg.regions, cfg.providers);

    SingleDatasetResult result;
    if (!cfg.fusion) {
        if (cfg.regions.size() != 1) {
            fail(Errc::usage, "without fusion exactly one region must be requested");
        }
        result.report = evaluate(detail::raw_single_region(scored));
        return result;
    }

    if (cfg.paper_mode) {
        FusionModel model = detail::train_for_protocol(scored, cfg, manifest.dataset_id);
        result.report = evaluate(split_scores(scored, apply_fusion(model, scored)));
        result.model = std::move(model);
        return result;
    }

    auto subject_of = detail::image_subjects(manifest);
    FoldPlan plan = make_folds(manifest.subjects(), cfg.folds, cfg.seed);
    ScoreSet fused_pool;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const auto& fold = plan.folds[f];
        detail::check_disjoint(fold);
        std::set<std::string> train(fold.train_subjects.begin(), fold.train_subjects.end());
        std::set<std::string> test(fold.test_subjects.begin(), fold.test_subjects.end());
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < scored.trials.size(); ++i) {
            const TrialPair& t = scored.trials[i].trial;
            const std::string& sa = subject_of.at(t.image_a);
            const std::string& sb = subject_of.at(t.image_b);
            if (train.count(sa) && train.count(sb)) train_idx.push_back(i);
            if (test.count(sa) && test.count(sb)) test_idx.push_back(i);
        }
        ScoredTrials train_scored = detail::subset(scored, train_idx);
        ScoredTrials test_scored = detail::subset(scored, test_idx);
        FusionModel model = detail::train_for_protocol(train_scored, cfg, manifest.dataset_id);
        std::vector<double> fused = apply_fusion(model, test_scored);
        for (std::size_t i = 0; i < fused.size(); ++i) {
            (test_scored.trials[i].trial.genuine ? fused_pool.genuine : fused_pool.impostor)
                .push_back(fused[i]);
        }
    }
    result.report = evaluate(fused_pool);
    return result;
}

struct CrossRow {
    std::string source;
    double source_eer = 0;
    double threshold = 0;
    std::optional<FusionModel> model;
    std::vector<std::pair<std::string, double>> hter; // target id -> HTER, manifest order
    double mean = 0;
    double stddev = 0; // sample standard deviation
    double max = 0;
};

/**
 * Cross-dataset threshold transfer: per source dataset, fusion weights are
 * trained on all of the source's trials and the decision threshold fixed at
 * the source's fused EER point; every dataset (the source included) is then
 * measured in HTER at that threshold. Row statistics cover all targets.
 */
inline std::vector<CrossRow> run_cross_dataset(const std::vector<DatasetManifest>& manifests,
                                               const EmbeddingStore& store, const ProtocolConfig& cfg,
                                               const std::optional<std::string>& only_source = std::nullopt) {
    if (manifests.empty()) fail(Errc::usage, "cross-dataset protocol needs at least one dataset");
    if (!cfg.fusion && cfg.regions.size() != 1) {
        fail(Errc::usage, "without fusion exactly one region must be requested");
    }

    std::vector<ScoredTrials> scored;
    scored.reserve(manifests.size());
    for (const auto& m : manifests) {
        scored.push_back(score_trials(store, build_trials(m, TrialMode::before_vs_after), cfg.regions,
                                      cfg.providers));
    }

    std::vector<CrossRow> rows;
    for (std::size_t s = 0; s < manifests.size(); ++s) {
        if (only_source && manifests[s].dataset_id != *only_source) continue;
        CrossRow row;
        row.source = manifests[s].dataset_id;

        std::optional<FusionModel> model;
        if (cfg.fusion) {
            model = detail::train_for_protocol(scored[s], cfg, row.source);
        }
        auto fused_of = [&](std::size_t t) {
            return cfg.fusion ? split_scores(scored[t], apply_fusion(*model, scored[t]))
                              : detail::raw_single_region(scored[t]);
        };

        ScoreSet source_set = fused_of(s);
        EerResult source_eer = eer(source_set);
        row.source_eer = source_eer.eer;
        row.threshold = source_eer.threshold;

        double sum = 0, max = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < manifests.size(); ++t) {
            ScoreSet target_set = fused_of(t);
            FarFrr e = far_frr_at(target_set, row.threshold);
            double hter = (e.far + e.frr) / 2;
            row.hter.emplace_back(manifests[t].dataset_id, hter);
            sum += hter;
            max = std::max(max, hter);
        }
        row.model = std::move(model);
        row.mean = sum / static_cast<double>(row.hter.size());
        double ss = 0;
        for (const auto& [id, h] : row.hter) ss += (h - row.mean) * (h - row.mean);
        row.stddev = row.hter.size() > 1 ? std::sqrt(ss / static_cast<double>(row.hter.size() - 1)) : 0.0;
        row.max = max;
        rows.push_back(std::move(row));
    }
    if (rows.empty() && only_source) {
        fail(Errc::usage, "source dataset '" + *only_source + "' not present in manifest");
    }
    return rows;
}

struct KfoldResult {
    double mean_accuracy = 0;
    std::vector<double> fold_accuracy;
    std::vector<double> fold_threshold;
    FoldPlan plan;
};

/**
 * Subject-disjoint k-fold balanced accuracy. Per fold: the fusion model and
 * the maximum-accuracy threshold come from the training subjects' trials;
 * the test set takes every genuine trial of the held-out subjects plus an
 * equal-size impostor sample drawn seeded and without replacement.
 */
inline KfoldResult run_kfold_accuracy(const DatasetManifest& manifest, const EmbeddingStore& store,
                                      const ProtocolConfig& cfg) {
    std::vector<TrialPair> trials = build_trials(manifest, TrialMode::before_vs_after);
    ScoredTrials scored = score_trials(store, trials, cfg.regions, cfg.providers);
    auto subject_of = detail::image_subjects(manifest);

    KfoldResult result;
    result.plan = make_folds(manifest.subjects(), cfg.folds, cfg.seed);
    for (std::size_t f = 0; f < result.plan.folds.size(); ++f) {
        const auto& fold = result.plan.folds[f];
        detail::check_disjoint(fold);
        std::set<std::string> train(fold.train_subjects.begin(), fold.train_subjects.end());
        std::set<std::string> test(fold.test_subjects.begin(), fold.test_subjects.end());

        std::vector<std::size_t> train_idx, test_genuine, test_impostor_pool;
        for (std::size_t i = 0; i < scored.trials.size(); ++i) {
            const TrialPair& t = scored.trials[i].trial;
            const std::string& sa = subject_of.at(t.image_a);
            const std::string& sb = subject_of.at(t.image_b);
            if (train.count(sa) && train.count(sb)) train_idx.push_back(i);
            if (test.count(sa) && test.count(sb)) {
                (t.genuine ? test_genuine : test_impostor_pool).push_back(i);
            }
        }
        if (test_genuine.empty()) {
            fail(Errc::fold_too_small, "fold " + std::to_string(f) + " has no genuine test trials");
        }
        if (test_impostor_pool.size() < test_genuine.size()) {
            fail(Errc::fold_too_small, "fold " + std::to_string(f) +
                                           " cannot balance impostor trials against " +
                                           std::to_string(test_genuine.size()) + " genuine trials");
        }

        ScoredTrials train_scored = detail::subset(scored, train_idx);
        FusionModel model = detail::train_for_protocol(train_scored, cfg, manifest.dataset_id);
        double threshold = max_accuracy_threshold(split_scores(train_scored, apply_fusion(model, train_scored)));

        Rng rng(mix_seed(cfg.seed, 1000 + f));
        std::vector<std::size_t> picks = rng.sample_indices(test_impostor_pool.size(), test_genuine.size());
        std::vector<std::size_t> test_idx = test_genuine;
        for (std::size_t p : picks) test_idx.push_back(test_impostor_pool[p]);

        ScoredTrials test_scored = detail::subset(scored, test_idx);
        ScoreSet test_set = split_scores(test_scored, apply_fusion(model, test_scored));
        result.fold_accuracy.push_back(accuracy_at(test_set, threshold));
        result.fold_threshold.push_back(threshold);
    }
    double sum = 0;
    for (double a : result.fold_accuracy) sum += a;
    result.mean_accuracy = sum / static_cast<double>(result.fold_accuracy.size());
    return result;
}

struct YmuMatrixResult {
    EvalReport before_vs_before;
    EvalReport after_vs_after;
    EvalReport before_vs_after;
    std::optional<FusionModel> model;
};

/**
 * The four-shot dataset's own protocol: EER for B-vs-B, A-vs-A and A-vs-B
 * matching. One coherent model per run, trained on the cross-state trials,
 * is applied to all three modes.
 */
inline YmuMatrixResult run_ymu_matrix(const DatasetManifest& manifest, const EmbeddingStore& store,
                                      const ProtocolConfig& cfg) {
    if (!cfg.fusion && cfg.regions.size() != 1) {
        fail(Errc::usage, "without fusion exactly one region must be requested");
    }
    ScoredTrials cross = score_trials(store, build_trials(manifest, TrialMode::before_vs_after),
                                      cfg.regions, cfg.providers);
    YmuMatrixResult result;
    if (cfg.fusion) {
        result.model = detail::train_for_protocol(cross, cfg, manifest.dataset_id);
    }
    auto report_of = [&](TrialMode mode) {
        ScoredTrials scored = mode == TrialMode::before_vs_after
                                  ? cross
                                  : score_trials(store, build_trials(manifest, mode), cfg.regions,
                                                 cfg.providers);
        ScoreSet set = cfg.fusion ? split_scores(scored, apply_fusion(*result.model, scored))
                                  : detail::raw_single_region(scored);
        return evaluate(set);
    };
    result.before_vs_before = report_of(TrialMode::before_vs_before);
    result.after_vs_after = report_of(TrialMode::after_vs_after);
    result.before_vs_after = report_of(TrialMode::before_vs_after);
    return result;
}

struct BestCombination {
    ProviderMap providers;
    double training_eer = 0;
};

/**
 * Exhaustive search over per-region provider choices, selected by the
 * training EER of the fused scores (model trained on all trials of this
 * dataset). Ties go to the lexicographically smallest provider assignment.
 */
inline BestCombination search_best_combination(const DatasetManifest& manifest,
                                               const EmbeddingStore& store,
                                               const std::vector<Region>& regions,
                                               const std::map<Region, std::vector<std::string>>& candidates,
                                               const ProtocolConfig& cfg) {
    if (regions.empty()) fail(Errc::usage, "no regions requested");
    std::vector<TrialPair> trials = build_trials(manifest, TrialMode::before_vs_after);

    // one scored column per (region, candidate provider)
    std::map<Region, std::vector<std::pair<std::string, ScoredTrials>>> columns;
    for (Region r : regions) {
        auto it = candidates.find(r);
        if (it == candidates.end() || it->second.empty()) {
            fail(Errc::missing_provider, "no candidate providers for region " + std::string(to_string(r)));
        }
        for (const std::string& p : it->second) {
            ProviderMap pm{{r, p}};
            columns[r].emplace_back(p, score_trials(store, trials, {r}, pm));
        }
    }

    BestCombination best;
    bool first = true;
    std::vector<std::size_t> choice(regions.size(), 0);
    while (true) {
        ScoredTrials combined;
        combined.region_order = regions;
        combined.trials.resize(trials.size());
        for (std::size_t i = 0; i < trials.size(); ++i) {
            combined.trials[i].trial = trials[i];
            combined.trials[i].scores.reserve(regions.size());
            for (std::size_t r = 0; r < regions.size(); ++r) {
                combined.trials[i].scores.push_back(
                    columns[regions[r]][choice[r]].second.trials[i].scores[0]);
            }
        }
        FusionModel model = detail::train_for_protocol(combined, cfg, manifest.dataset_id);
        double e = eer(split_scores(combined, apply_fusion(model, combined))).eer;

        ProviderMap pm;
        for (std::size_t r = 0; r < regions.size(); ++r) {
            pm[regions[r]] = columns[regions[r]][choice[r]].first;
        }
        if (first || e < best.training_eer || (e == best.training_eer && pm < best.providers)) {
            best.training_eer = e;
            best.providers = std::move(pm);
            first = false;
        }

        std::size_t pos = 0;
        while (pos < regions.size()) {
            if (++choice[pos] < columns[regions[pos]].size()) break;
            choice[pos] = 0;
            ++pos;
        }
        if (pos == regions.size()) break;
    }
    return best;
}

} // namespace partfuse
