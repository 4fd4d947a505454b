// Copyright 2026 The ReHear Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rehear/filters.hpp"

#include "rehear/errors.hpp"

#include <cmath>

namespace rehear::filters {

std::string_view to_string(FilterReason r) {
    switch (r) {
        case FilterReason::ok: return "ok";
        case FilterReason::cer_exceeded: return "cer_exceeded";
        case FilterReason::length_ratio: return "length_ratio";
        case FilterReason::low_unique_ratio: return "low_unique_ratio";
        case FilterReason::digit_mismatch: return "digit_mismatch";
        case FilterReason::low_confidence: return "low_confidence";
        case FilterReason::speaking_rate: return "speaking_rate";
        case FilterReason::compression_ratio: return "compression_ratio";
        case FilterReason::model_reject: return "model_reject";
    }
    return "unknown";
}

FilterDecision rule_filter_decide(const metrics::FeatureRecord& features,
                                  const RuleThresholds& thresholds) {
    FilterDecision d;
    d.features = features;
    d.accept = false;
    if (!features.length_ratio.has_value()) {
        // Empty hypothesis: the ratio is undefined, which is a violation.
        d.reason = FilterReason::length_ratio;
    } else if (features.cer > thresholds.max_cer) {
        d.reason = FilterReason::cer_exceeded;
    } else if (*features.length_ratio < thresholds.min_length_ratio ||
               *features.length_ratio > thresholds.max_length_ratio) {
        d.reason = FilterReason::length_ratio;
    } else if (!features.unique_token_ratio.has_value() ||
               *features.unique_token_ratio < thresholds.min_unique_ratio) {
        d.reason = FilterReason::low_unique_ratio;
    } else if (features.digit_mismatch > thresholds.max_digit_mismatch) {
        d.reason = FilterReason::digit_mismatch;
    } else {
        d.accept = true;
        d.reason = FilterReason::ok;
    }
    return d;
}

FilterDecision rule_filter_correction(const TokenSeq& hyp, const TokenSeq& corr,
                                      const RuleThresholds& thresholds) {
    return rule_filter_decide(metrics::features(hyp, corr), thresholds);
}

FilterDecision ipl_filter_decide(const metrics::FeatureRecord& features,
                                 const IplThresholds& thresholds) {
    FilterDecision d;
    d.features = features;
    d.accept = false;
    const double confidence = features.confidence.value_or(0.0);
    if (confidence < thresholds.min_confidence) {
        d.reason = FilterReason::low_confidence;
    } else if (!features.speaking_rate.has_value() ||
               *features.speaking_rate < thresholds.min_speaking_rate ||
               *features.speaking_rate > thresholds.max_speaking_rate) {
        d.reason = FilterReason::speaking_rate;
    } else if (!features.compression_ratio.has_value() ||
               *features.compression_ratio < thresholds.min_compression_ratio) {
        d.reason = FilterReason::compression_ratio;
    } else {
        d.accept = true;
        d.reason = FilterReason::ok;
    }
    return d;
}

FilterDecision ipl_filter(const backends::Hypothesis& hyp, double duration_s,
                          const IplThresholds& thresholds) {
    if (duration_s <= 0.0) throw ValidationError("ipl_filter: duration must be positive");
    // The pseudo-label under test is the hypothesis itself.
    metrics::FeatureRecord features =
        metrics::features(hyp.tokens, hyp.tokens, hyp.confidence, duration_s);
    return ipl_filter_decide(features, thresholds);
}

namespace {

std::array<double, ModelFilter::kFeatureCount> feature_vector(const TokenSeq& hyp,
                                                              const TokenSeq& corr,
                                                              double confidence) {
    const metrics::FeatureRecord f = metrics::features(hyp, corr, confidence);
    return {
        f.cer,
        f.length_ratio.value_or(0.0),
        f.unique_token_ratio.value_or(0.0),
        static_cast<double>(f.digit_mismatch),
        confidence,
        static_cast<double>(corr.size()),
    };
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

ModelFilter model_filter_train(const std::vector<ModelFilterExample>& examples, uint64_t seed) {
    if (examples.size() < 2)
        throw ValidationError("model_filter_train: need at least 2 examples");

    const size_t n = examples.size();
    std::vector<std::array<double, ModelFilter::kFeatureCount>> x(n);
    std::vector<double> y(n);
    size_t positives = 0;
    for (size_t i = 0; i < n; ++i) {
        const auto& ex = examples[i];
        x[i] = feature_vector(ex.hypothesis, ex.correction, ex.confidence);
        const double hyp_wer = metrics::wer_detailed(ex.truth, ex.hypothesis).value;
        const double corr_wer = metrics::wer_detailed(ex.truth, ex.correction).value;
        y[i] = corr_wer < hyp_wer ? 1.0 : 0.0;
        positives += y[i] > 0.5 ? 1 : 0;
    }
    if (positives == 0 || positives == n)
        throw ValidationError("model_filter_train: training labels are single-class");

    ModelFilter filter;
    filter.seed = seed;
    for (size_t k = 0; k < ModelFilter::kFeatureCount; ++k) {
        double mean = 0.0;
        for (size_t i = 0; i < n; ++i) mean += x[i][k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (size_t i = 0; i < n; ++i) var += (x[i][k] - mean) * (x[i][k] - mean);
        var /= static_cast<double>(n);
        filter.feature_mean[k] = mean;
        filter.feature_scale[k] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    for (auto& row : x)
        for (size_t k = 0; k < ModelFilter::kFeatureCount; ++k)
            row[k] = (row[k] - filter.feature_mean[k]) / filter.feature_scale[k];

    constexpr double kStep = 0.1;
    constexpr int kSteps = 500;
    for (int step = 0; step < kSteps; ++step) {
        std::array<double, ModelFilter::kFeatureCount> grad{};
        double grad_bias = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double z = filter.bias;
            for (size_t k = 0; k < ModelFilter::kFeatureCount; ++k)
                z += filter.weights[k] * x[i][k];
            const double err = sigmoid(z) - y[i];
            for (size_t k = 0; k < ModelFilter::kFeatureCount; ++k) grad[k] += err * x[i][k];
            grad_bias += err;
        }
        for (size_t k = 0; k < ModelFilter::kFeatureCount; ++k)
            filter.weights[k] -= kStep * grad[k] / static_cast<double>(n);
        filter.bias -= kStep * grad_bias / static_cast<double>(n);
    }
    return filter;
}

double model_filter_score(const ModelFilter& filter, const TokenSeq& hyp, const TokenSeq& corr,
                          double confidence) {
    const auto raw = feature_vector(hyp, corr, confidence);
    double z = filter.bias;
    for (size_t k = 0; k < ModelFilter::kFeatureCount; ++k)
        z += filter.weights[k] * (raw[k] - filter.feature_mean[k]) / filter.feature_scale[k];
    return sigmoid(z);
}

FilterDecision model_filter_apply(const ModelFilter& filter, const TokenSeq& hyp,
                                  const TokenSeq& corr, double confidence) {
    FilterDecision d;
    d.features = metrics::features(hyp, corr, confidence);
    const double score = model_filter_score(filter, hyp, corr, confidence);
    d.accept = score >= 0.5;
    d.reason = d.accept ? FilterReason::ok : FilterReason::model_reject;
    return d;
}

}  // namespace rehear::filters
