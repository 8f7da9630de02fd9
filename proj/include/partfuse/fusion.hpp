#pragma once

#include "partfuse/common.hpp"
#include "partfuse/csv.hpp"
#include "partfuse/metrics.hpp"
#include "partfuse/trials.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace partfuse {

struct TrainMeta {
    int iterations = 0;
    double final_loss = 0;
    bool converged = false;
    std::string dataset_id;
};

/// Affine score-fusion model: fused = weights . scores + bias.
struct FusionModel {
    std::vector<Region> region_order;
    std::vector<double> weights;
    double bias = 0;
    TrainMeta meta;
};

struct TrainConfig {
    double l2 = 0.0; // on weights only, never the bias
    int max_iterations = 200;
    double gradient_tolerance = 1e-8;
    std::string dataset_id;
    /// Receives one message per degenerate (constant) score column.
    std::function<void(const std::string&)> warn;
};

namespace detail {

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

inline double softplus(double z) {
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

/// In-place Cholesky solve of A x = rhs for a symmetric matrix; returns
/// false when A is not positive definite.
inline bool cholesky_solve(std::vector<double>& a, std::vector<double>& rhs, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 1e-300)) return false;
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * rhs[k];
        rhs[i] = v / a[i * n + i];
    }
    for (std::size_t ii = n; ii > 0; --ii) {
        std::size_t i = ii - 1;
        double v = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= a[k * n + i] * rhs[k];
        rhs[i] = v / a[i * n + i];
    }
    return true;
}

struct LlrData {
    std::size_t n = 0, k = 0;
    std::vector<double> x;      // n rows of k scores
    std::vector<double> margin; // +1 genuine, -1 impostor
    std::vector<double> weight; // 1/(2G) or 1/(2I)
};

inline LlrData llr_data(const ScoredTrials& scored) {
    LlrData d;
    d.n = scored.trials.size();
    d.k = scored.region_order.size();
    std::size_t g = scored.genuine_count();
    std::size_t i = scored.trials.size() - g;
    if (g == 0 || i == 0) {
        fail(Errc::single_class_input, "fusion training needs both genuine and impostor trials");
    }
    d.x.reserve(d.n * d.k);
    for (const TrialScoreVector& t : scored.trials) {
        if (t.scores.size() != d.k) {
            fail(Errc::dimension_mismatch, "trial score vector length disagrees with region order");
        }
        for (double s : t.scores) {
            if (!std::isfinite(s)) fail(Errc::non_finite_component, "non-finite score in fusion training");
            d.x.push_back(s);
        }
        d.margin.push_back(t.trial.genuine ? 1.0 : -1.0);
        d.weight.push_back(t.trial.genuine ? 1.0 / (2.0 * static_cast<double>(g))
                                           : 1.0 / (2.0 * static_cast<double>(i)));
    }
    return d;
}

} // namespace detail

/**
 * Class-balanced logistic loss of (weights, bias) on the scored trials:
 * the genuine and impostor classes each contribute with total prior 1/2,
 * regardless of their counts. Exposed for gradient checking.
 */
inline double llr_loss(const ScoredTrials& scored, std::span<const double> weights, double bias,
                       double l2 = 0.0) {
    detail::LlrData d = detail::llr_data(scored);
    if (weights.size() != d.k) fail(Errc::dimension_mismatch, "weight vector length disagrees with regions");
    double loss = 0;
    for (std::size_t r = 0; r < d.n; ++r) {
        double z = bias;
        for (std::size_t j = 0; j < d.k; ++j) z += weights[j] * d.x[r * d.k + j];
        loss += d.weight[r] * detail::softplus(-d.margin[r] * z);
    }
    for (double w : weights) loss += 0.5 * l2 * w * w;
    return loss;
}

/// Analytic gradient of llr_loss, laid out as (d/dw_0 .. d/dw_{k-1}, d/db).
inline std::vector<double> llr_gradient(const ScoredTrials& scored, std::span<const double> weights,
                                        double bias, double l2 = 0.0) {
    detail::LlrData d = detail::llr_data(scored);
    if (weights.size() != d.k) fail(Errc::dimension_mismatch, "weight vector length disagrees with regions");
    std::vector<double> grad(d.k + 1, 0.0);
    for (std::size_t r = 0; r < d.n; ++r) {
        double z = bias;
        for (std::size_t j = 0; j < d.k; ++j) z += weights[j] * d.x[r * d.k + j];
        double coeff = d.weight[r] * -d.margin[r] * detail::sigmoid(-d.margin[r] * z);
        for (std::size_t j = 0; j < d.k; ++j) grad[j] += coeff * d.x[r * d.k + j];
        grad[d.k] += coeff;
    }
    for (std::size_t j = 0; j < d.k; ++j) grad[j] += l2 * weights[j];
    return grad;
}

/**
 * Trains the fusion weights by damped Newton iteration on the class-balanced
 * logistic loss, starting from zero. Deterministic: no randomness, fixed
 * iteration order. A score column that is constant across all trials cannot
 * be separated from the bias; its weight is pinned to zero and a warning is
 * emitted through the config callback.
 */
inline FusionModel train_llr(const ScoredTrials& scored, const TrainConfig& cfg = {}) {
    detail::LlrData d = detail::llr_data(scored);

    // active := columns with any variation
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < d.k; ++j) {
        double lo = d.x[j], hi = d.x[j];
        for (std::size_t r = 1; r < d.n; ++r) {
            lo = std::min(lo, d.x[r * d.k + j]);
            hi = std::max(hi, d.x[r * d.k + j]);
        }
        if (lo == hi) {
            if (cfg.warn) {
                cfg.warn("score column " + std::string(to_string(scored.region_order[j])) +
                         " is constant across all trials; weight pinned to 0");
            }
        } else {
            active.push_back(j);
        }
    }

    std::size_t m = active.size() + 1; // active weights + bias
    std::vector<double> theta(m, 0.0);

    auto eval_loss = [&](const std::vector<double>& th) {
        double loss = 0;
        for (std::size_t r = 0; r < d.n; ++r) {
            double z = th[m - 1];
            for (std::size_t j = 0; j < active.size(); ++j) z += th[j] * d.x[r * d.k + active[j]];
            loss += d.weight[r] * detail::softplus(-d.margin[r] * z);
        }
        for (std::size_t j = 0; j < active.size(); ++j) loss += 0.5 * cfg.l2 * th[j] * th[j];
        return loss;
    };

    double loss = eval_loss(theta);
    int iterations = 0;
    bool converged = false;
    std::vector<double> grad(m), hess(m * m), step(m), trial(m);

    for (; iterations < cfg.max_iterations; ++iterations) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t r = 0; r < d.n; ++r) {
            double z = theta[m - 1];
            for (std::size_t j = 0; j < active.size(); ++j) z += theta[j] * d.x[r * d.k + active[j]];
            double p = detail::sigmoid(z);
            double coeff = d.weight[r] * -d.margin[r] * detail::sigmoid(-d.margin[r] * z);
            double curv = d.weight[r] * p * (1.0 - p);
            for (std::size_t j = 0; j < m; ++j) {
                double xj = j + 1 == m ? 1.0 : d.x[r * d.k + active[j]];
                grad[j] += coeff * xj;
                for (std::size_t l = 0; l <= j; ++l) {
                    double xl = l + 1 == m ? 1.0 : d.x[r * d.k + active[l]];
                    hess[j * m + l] += curv * xj * xl;
                }
            }
        }
        for (std::size_t j = 0; j + 1 < m; ++j) {
            grad[j] += cfg.l2 * theta[j];
            hess[j * m + j] += cfg.l2;
        }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t l = j + 1; l < m; ++l) hess[j * m + l] = hess[l * m + j];
        }

        double gmax = 0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax < cfg.gradient_tolerance) {
            converged = true;
            break;
        }

        step = grad;
        for (double& s : step) s = -s;
        std::vector<double> chol = hess;
        bool newton = detail::cholesky_solve(chol, step, m);
        if (!newton) {
            // fall back to plain gradient descent on a flat Hessian
            step = grad;
            for (double& s : step) s = -s;
        }

        double slope = 0;
        for (std::size_t j = 0; j < m; ++j) slope += grad[j] * step[j];
        if (!(slope < 0)) { // numerically stalled
            break;
        }
        double t = 1.0;
        double new_loss = loss;
        bool moved = false;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t j = 0; j < m; ++j) trial[j] = theta[j] + t * step[j];
            new_loss = eval_loss(trial);
            if (new_loss <= loss + 1e-4 * t * slope) {
                moved = true;
                break;
            }
            t /= 2;
        }
        if (!moved) break;
        theta = trial;
        loss = new_loss;
    }

    FusionModel model;
    model.region_order = scored.region_order;
    model.weights.assign(d.k, 0.0);
    for (std::size_t j = 0; j < active.size(); ++j) model.weights[active[j]] = theta[j];
    model.bias = theta[m - 1];
    model.meta.iterations = iterations;
    model.meta.final_loss = loss;
    model.meta.converged = converged;
    model.meta.dataset_id = cfg.dataset_id;
    return model;
}

/// Fused score of one trial's region scores; lengths must agree.
inline double fuse(const FusionModel& model, std::span<const double> scores) {
    if (scores.size() != model.weights.size()) {
        fail(Errc::region_order_mismatch, "score vector length does not match the fusion model");
    }
    double z = model.bias;
    for (std::size_t j = 0; j < scores.size(); ++j) z += model.weights[j] * scores[j];
    return z;
}

/// Applies the model to every trial; the scored region order must equal the
/// model's region order exactly.
inline std::vector<double> apply_fusion(const FusionModel& model, const ScoredTrials& scored) {
    if (scored.region_order != model.region_order) {
        fail(Errc::region_order_mismatch, "scored regions do not match the fusion model's region order");
    }
    std::vector<double> out;
    out.reserve(scored.trials.size());
    for (const TrialScoreVector& t : scored.trials) out.push_back(fuse(model, t.scores));
    return out;
}

/// Splits per-trial fused scores into the two label classes, trial order
/// preserved within each class.
inline ScoreSet split_scores(const ScoredTrials& scored, const std::vector<double>& fused) {
    if (fused.size() != scored.trials.size()) {
        fail(Errc::dimension_mismatch, "fused score count disagrees with trial count");
    }
    ScoreSet set;
    for (std::size_t i = 0; i < fused.size(); ++i) {
        (scored.trials[i].trial.genuine ? set.genuine : set.impostor).push_back(fused[i]);
    }
    return set;
}

// --- model file (flat text, 17-significant-digit round-trip) ---

inline std::string format_fusion_model(const FusionModel& model) {
    std::string out = "partfuse fusion model v1\n";
    out += "region_order ";
    for (std::size_t i = 0; i < model.region_order.size(); ++i) {
        if (i) out += ",";
        out += to_string(model.region_order[i]);
    }
    out += "\nweights";
    for (double w : model.weights) out += " " + fmt_double17(w);
    out += "\nbias " + fmt_double17(model.bias);
    out += "\niterations " + std::to_string(model.meta.iterations);
    out += "\nfinal_loss " + fmt_double17(model.meta.final_loss);
    out += std::string("\nconverged ") + (model.meta.converged ? "true" : "false");
    out += "\ndataset_id " + model.meta.dataset_id + "\n";
    return out;
}

inline FusionModel parse_fusion_model(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "partfuse fusion model v1") {
        fail(Errc::malformed_file, "not a partfuse fusion model file");
    }
    FusionModel model;
    bool saw_weights = false, saw_bias = false;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        std::size_t sp = line.find(' ');
        std::string_view key = line.substr(0, sp);
        std::string_view rest = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
        if (key == "region_order") {
            for (auto name : split_fields(rest)) {
                auto region = region_from_string(trim(name));
                if (!region) fail(Errc::malformed_file, "unknown region in model file");
                model.region_order.push_back(*region);
            }
        } else if (key == "weights") {
            for (auto field : split_fields(rest, ' ')) {
                if (trim(field).empty()) continue;
                model.weights.push_back(parse_double(field, "model weight"));
            }
            saw_weights = true;
        } else if (key == "bias") {
            model.bias = parse_double(rest, "model bias");
            saw_bias = true;
        } else if (key == "iterations") {
            model.meta.iterations = static_cast<int>(parse_long(rest, "iterations"));
        } else if (key == "final_loss") {
            model.meta.final_loss = parse_double(rest, "final_loss");
        } else if (key == "converged") {
            model.meta.converged = trim(rest) == "true";
        } else if (key == "dataset_id") {
            model.meta.dataset_id = std::string(trim(rest));
        } else {
            fail(Errc::malformed_file, "unknown model file key '" + std::string(key) + "'");
        }
    }
    if (!saw_weights || !saw_bias || model.region_order.empty() ||
        model.weights.size() != model.region_order.size()) {
        fail(Errc::malformed_file, "incomplete fusion model file");
    }
    return model;
}

} // namespace partfuse
