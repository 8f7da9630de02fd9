#pragma once

#include "partfuse/common.hpp"
#include "partfuse/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace partfuse {

/// Similarity scores for the two trial classes. Higher means more genuine;
/// the decision rule everywhere is accept iff score >= threshold.
struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> impostor;
};

struct FarFrr {
    double far = 0;
    double frr = 0;
};

struct EerResult {
    double eer = 0;
    double threshold = 0;
};

struct EvalReport {
    double eer = 0;
    double eer_threshold = 0;
    double far = 0;
    double frr = 0;
    double hter = 0;
    std::optional<double> accuracy;
    long genuine_count = 0;
    long impostor_count = 0;
};

namespace detail {

inline void check_scores(const ScoreSet& set) {
    if (set.genuine.empty() || set.impostor.empty()) {
        fail(Errc::single_class_input, "score set needs at least one genuine and one impostor score");
    }
    for (double s : set.genuine) {
        if (!std::isfinite(s)) fail(Errc::non_finite_component, "non-finite genuine score");
    }
    for (double s : set.impostor) {
        if (!std::isfinite(s)) fail(Errc::non_finite_component, "non-finite impostor score");
    }
}

} // namespace detail

inline FarFrr far_frr_at(const ScoreSet& set, double t) {
    detail::check_scores(set);
    std::size_t accepted_impostors = 0;
    for (double s : set.impostor) accepted_impostors += s >= t ? 1 : 0;
    std::size_t rejected_genuine = 0;
    for (double s : set.genuine) rejected_genuine += s < t ? 1 : 0;
    return {static_cast<double>(accepted_impostors) / static_cast<double>(set.impostor.size()),
            static_cast<double>(rejected_genuine) / static_cast<double>(set.genuine.size())};
}

/// The full sweep grid: -inf, every distinct observed score, the midpoints
/// between adjacent distinct scores, and +inf. FAR and FRR are step
/// functions that only change at observed scores, so this grid realizes
/// every achievable operating point.
inline std::vector<double> candidate_thresholds(const ScoreSet& set) {
    std::vector<double> scores;
    scores.reserve(set.genuine.size() + set.impostor.size());
    scores.insert(scores.end(), set.genuine.begin(), set.genuine.end());
    scores.insert(scores.end(), set.impostor.begin(), set.impostor.end());
    std::sort(scores.begin(), scores.end());
    scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

    std::vector<double> cands;
    cands.reserve(2 * scores.size() + 2);
    cands.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (i > 0) cands.push_back(scores[i - 1] + (scores[i] - scores[i - 1]) / 2);
        cands.push_back(scores[i]);
    }
    cands.push_back(std::numeric_limits<double>::infinity());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    return cands;
}

namespace detail {

struct SortedScores {
    std::vector<double> genuine;
    std::vector<double> impostor;

    explicit SortedScores(const ScoreSet& set) : genuine(set.genuine), impostor(set.impostor) {
        std::sort(genuine.begin(), genuine.end());
        std::sort(impostor.begin(), impostor.end());
    }

    FarFrr at(double t) const {
        auto below_imp = std::lower_bound(impostor.begin(), impostor.end(), t) - impostor.begin();
        auto below_gen = std::lower_bound(genuine.begin(), genuine.end(), t) - genuine.begin();
        return {static_cast<double>(impostor.size() - static_cast<std::size_t>(below_imp)) /
                    static_cast<double>(impostor.size()),
                static_cast<double>(below_gen) / static_cast<double>(genuine.size())};
    }
};

} // namespace detail

/**
 * Discrete equal error rate: the sweep threshold minimizing |FAR - FRR|,
 * ties broken by smaller (FAR + FRR) / 2, then by smaller threshold; the
 * reported rate is the mean of FAR and FRR there.
 */
inline EerResult eer(const ScoreSet& set) {
    detail::check_scores(set);
    detail::SortedScores sorted(set);
    double best_diff = std::numeric_limits<double>::infinity();
    double best_mean = std::numeric_limits<double>::infinity();
    double best_t = std::numeric_limits<double>::infinity();
    for (double t : candidate_thresholds(set)) {
        FarFrr e = sorted.at(t);
        double diff = std::abs(e.far - e.frr);
        double mean = (e.far + e.frr) / 2;
        if (diff < best_diff || (diff == best_diff && (mean < best_mean || (mean == best_mean && t < best_t)))) {
            best_diff = diff;
            best_mean = mean;
            best_t = t;
        }
    }
    return {best_mean, best_t};
}

/// FAR, FRR and their mean at an externally fixed threshold, e.g. another
/// dataset's EER point. The embedded eer fields describe this set itself.
inline EvalReport hter_at(const ScoreSet& set, double t) {
    detail::check_scores(set);
    EvalReport report;
    EerResult own = eer(set);
    report.eer = own.eer;
    report.eer_threshold = own.threshold;
    FarFrr e = far_frr_at(set, t);
    report.far = e.far;
    report.frr = e.frr;
    report.hter = (e.far + e.frr) / 2;
    report.genuine_count = static_cast<long>(set.genuine.size());
    report.impostor_count = static_cast<long>(set.impostor.size());
    return report;
}

inline double accuracy_at(const ScoreSet& set, double t) {
    detail::check_scores(set);
    std::size_t correct = 0;
    for (double s : set.genuine) correct += s >= t ? 1 : 0;
    for (double s : set.impostor) correct += s < t ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(set.genuine.size() + set.impostor.size());
}

/// Threshold maximizing accuracy over the sweep grid; ties broken like eer
/// (smaller (FAR+FRR)/2, then smaller threshold). Accuracy is compared on
/// integer counts so ties are exact.
inline double max_accuracy_threshold(const ScoreSet& set) {
    detail::check_scores(set);
    detail::SortedScores sorted(set);
    std::size_t g = set.genuine.size();
    std::size_t i = set.impostor.size();
    std::size_t best_correct = 0;
    double best_mean = std::numeric_limits<double>::infinity();
    double best_t = std::numeric_limits<double>::infinity();
    bool first = true;
    for (double t : candidate_thresholds(set)) {
        auto below_gen = static_cast<std::size_t>(
            std::lower_bound(sorted.genuine.begin(), sorted.genuine.end(), t) - sorted.genuine.begin());
        auto below_imp = static_cast<std::size_t>(
            std::lower_bound(sorted.impostor.begin(), sorted.impostor.end(), t) - sorted.impostor.begin());
        std::size_t correct = (g - below_gen) + below_imp;
        double mean = (static_cast<double>(i - below_imp) / static_cast<double>(i) +
                       static_cast<double>(below_gen) / static_cast<double>(g)) /
                      2;
        if (first || correct > best_correct ||
            (correct == best_correct && (mean < best_mean || (mean == best_mean && t < best_t)))) {
            best_correct = correct;
            best_mean = mean;
            best_t = t;
            first = false;
        }
    }
    return best_t;
}

struct DetPoint {
    double threshold = 0;
    double far = 0;
    double frr = 0;
};

/// Operating points over the sweep grid, ascending in threshold: far is
/// nonincreasing and frr nondecreasing along the curve.
inline std::vector<DetPoint> det_curve(const ScoreSet& set) {
    detail::check_scores(set);
    detail::SortedScores sorted(set);
    std::vector<double> cands = candidate_thresholds(set);
    std::vector<DetPoint> out(cands.size());
    parallel_for(cands.size(), [&](std::size_t i) {
        FarFrr e = sorted.at(cands[i]);
        out[i] = {cands[i], e.far, e.frr};
    });
    return out;
}

/// Full report at a fixed threshold, accuracy included.
inline EvalReport evaluate_at(const ScoreSet& set, double t) {
    EvalReport report = hter_at(set, t);
    report.accuracy = accuracy_at(set, t);
    return report;
}

/// Full report at the set's own EER threshold.
inline EvalReport evaluate(const ScoreSet& set) {
    EerResult own = eer(set);
    return evaluate_at(set, own.threshold);
}

} // namespace partfuse
