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

#pragma once

#include "rehear/backends.hpp"
#include "rehear/metrics.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace rehear::filters {

using textnorm::TokenSeq;

enum class FilterReason {
    ok,
    cer_exceeded,
    length_ratio,
    low_unique_ratio,
    digit_mismatch,
    low_confidence,
    speaking_rate,
    compression_ratio,
    model_reject,
};

std::string_view to_string(FilterReason r);

struct FilterDecision {
    bool accept = false;
    FilterReason reason = FilterReason::ok;
    metrics::FeatureRecord features;
};

// Boundary values accept; rules are checked in the listed order and the
// first violation is reported.
struct RuleThresholds {
    double max_cer = 0.15;
    double min_length_ratio = 0.95;
    double max_length_ratio = 1.15;
    double min_unique_ratio = 0.40;
    int max_digit_mismatch = 2;
};

struct IplThresholds {
    double min_confidence = 0.95;
    double min_speaking_rate = 2.0;
    double max_speaking_rate = 5.0;
    double min_compression_ratio = 0.5;
};

// Threshold application over a precomputed feature record; the *_decide
// functions exist so the boundary table can be tested bit-exactly.
FilterDecision rule_filter_decide(const metrics::FeatureRecord& features,
                                  const RuleThresholds& thresholds = {});
FilterDecision rule_filter_correction(const TokenSeq& hyp, const TokenSeq& corr,
                                      const RuleThresholds& thresholds = {});

FilterDecision ipl_filter_decide(const metrics::FeatureRecord& features,
                                 const IplThresholds& thresholds = {});
FilterDecision ipl_filter(const backends::Hypothesis& hyp, double duration_s,
                          const IplThresholds& thresholds = {});

// Linear stand-in for the learned correction-quality classifier: logistic
// regression over (cer, length_ratio, unique_token_ratio, digit_mismatch,
// hypothesis confidence, |corr|), full-batch gradient descent with fixed
// step 0.1 for 500 steps on standardized features. Accepts at score >= 0.5.
struct ModelFilter {
    static constexpr size_t kFeatureCount = 6;
    std::array<double, kFeatureCount> weights{};
    double bias = 0.0;
    std::array<double, kFeatureCount> feature_mean{};
    std::array<double, kFeatureCount> feature_scale{};
    uint64_t seed = 0;
};

struct ModelFilterExample {
    TokenSeq hypothesis;
    TokenSeq correction;
    TokenSeq truth;
    double confidence = 1.0;
};

// Labels each example 1 iff wer(truth, correction) < wer(truth, hypothesis)
// and fits the classifier; refuses single-class training sets.
ModelFilter model_filter_train(const std::vector<ModelFilterExample>& examples, uint64_t seed);

double model_filter_score(const ModelFilter& filter, const TokenSeq& hyp, const TokenSeq& corr,
                          double confidence);
FilterDecision model_filter_apply(const ModelFilter& filter, const TokenSeq& hyp,
                                  const TokenSeq& corr, double confidence);

}  // namespace rehear::filters
