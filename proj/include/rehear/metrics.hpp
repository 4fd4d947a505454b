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

#include "rehear/textnorm.hpp"

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace rehear::metrics {

using textnorm::TokenSeq;

// Result of a unit-cost Levenshtein alignment. `pairs` walks both
// sequences monotonically; kGap marks an unmatched side.
struct Alignment {
    static constexpr int kGap = -1;

    int substitutions = 0;
    int deletions = 0;
    int insertions = 0;
    int correct = 0;
    std::vector<std::pair<int, int>> pairs;  // (ref index | kGap, hyp index | kGap)

    int distance() const { return substitutions + deletions + insertions; }
};

// Minimum-edit alignment with backtrace preference
// correct > substitution > deletion > insertion on cost ties.
Alignment edit_alignment(const TokenSeq& ref, const TokenSeq& hyp);
Alignment edit_alignment_chars(std::string_view ref, std::string_view hyp);

struct ErrorRate {
    double value = 0.0;
    // Set when the reference was empty but the hypothesis was not; the
    // value is then |hyp| / 1 so batch evaluation never aborts.
    bool degenerate = false;
};

ErrorRate wer_detailed(const TokenSeq& ref, const TokenSeq& hyp);
double wer(const TokenSeq& ref, const TokenSeq& hyp);

ErrorRate cer_detailed(std::string_view ref, std::string_view hyp);
double cer(std::string_view ref, std::string_view hyp);

// Scalar features of a (hypothesis, candidate label) pair. Fields that
// have no defined value for the inputs stay empty rather than zero.
struct FeatureRecord {
    double wer = 0.0;
    double cer = 0.0;
    std::optional<double> length_ratio;        // chars(corr) / chars(hyp)
    std::optional<double> unique_token_ratio;  // distinct(corr) / |corr|
    int digit_mismatch = 0;
    std::optional<double> compression_ratio;   // deflated / raw bytes, clamped to 1
    std::optional<double> speaking_rate;       // |corr| / duration_s
    std::optional<double> confidence;          // hypothesis confidence, when known
};

FeatureRecord features(const TokenSeq& hyp, const TokenSeq& corr,
                       std::optional<double> confidence = std::nullopt,
                       std::optional<double> duration_s = std::nullopt);

// DEFLATE (level 6) size over raw size, clamped to (0, 1]. Short inputs
// expand under DEFLATE, hence the clamp; only threshold comparisons are
// contractual.
double deflate_ratio(std::string_view text);

}  // namespace rehear::metrics
