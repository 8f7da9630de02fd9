#pragma once

#include "partfuse/fusion.hpp"
#include "partfuse/metrics.hpp"
#include "partfuse/protocols.hpp"

#include <json.hpp>

#include <cmath>
#include <string>

namespace partfuse {

namespace detail {

/// Thresholds can legitimately sit at the sweep's infinities; JSON has no
/// inf, so non-finite values serialize as the strings "inf"/"-inf".
inline nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

} // namespace detail

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j;
    j["eer"] = r.eer;
    j["eer_threshold"] = detail::json_number(r.eer_threshold);
    j["far"] = r.far;
    j["frr"] = r.frr;
    j["hter"] = r.hter;
    if (r.accuracy) j["accuracy"] = *r.accuracy;
    j["counts"] = {{"G", r.genuine_count}, {"I", r.impostor_count}};
    return j;
}

inline nlohmann::json to_json(const FusionModel& m) {
    nlohmann::json j;
    nlohmann::json regions = nlohmann::json::array();
    for (Region r : m.region_order) regions.push_back(std::string(to_string(r)));
    j["region_order"] = regions;
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["train_meta"] = {{"iterations", m.meta.iterations},
                       {"final_loss", m.meta.final_loss},
                       {"converged", m.meta.converged},
                       {"dataset_id", m.meta.dataset_id}};
    return j;
}

inline nlohmann::json to_json(const CrossRow& row) {
    nlohmann::json j;
    j["source"] = row.source;
    j["source_eer"] = row.source_eer;
    j["threshold"] = detail::json_number(row.threshold);
    nlohmann::json hter = nlohmann::json::array();
    for (const auto& [target, value] : row.hter) {
        hter.push_back({{"target", target}, {"hter", value}});
    }
    j["hter"] = hter;
    j["mean"] = row.mean;
    j["stddev"] = row.stddev;
    j["max"] = row.max;
    if (row.model) j["model"] = to_json(*row.model);
    return j;
}

inline nlohmann::json to_json(const KfoldResult& r) {
    nlohmann::json j;
    j["mean_accuracy"] = r.mean_accuracy;
    j["fold_accuracy"] = r.fold_accuracy;
    nlohmann::json thresholds = nlohmann::json::array();
    for (double t : r.fold_threshold) thresholds.push_back(detail::json_number(t));
    j["fold_threshold"] = thresholds;
    j["folds"] = r.plan.n_folds;
    j["seed"] = r.plan.seed;
    return j;
}

inline nlohmann::json to_json(const YmuMatrixResult& r) {
    nlohmann::json j;
    j["before_vs_before"] = to_json(r.before_vs_before);
    j["after_vs_after"] = to_json(r.after_vs_after);
    j["before_vs_after"] = to_json(r.before_vs_after);
    if (r.model) j["model"] = to_json(*r.model);
    return j;
}

/// Canonical report bytes: 2-space indent, sorted keys (nlohmann's default
/// object ordering), trailing newline. Byte-stable for identical inputs.
inline std::string dump_report(const nlohmann::json& j) { return j.dump(2) + "\n"; }

} // namespace partfuse
