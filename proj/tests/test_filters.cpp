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
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace rehear;
using namespace rehear::filters;

namespace {

backends::Hypothesis hyp_with(double confidence, size_t n_tokens) {
    textnorm::TokenSeq tokens;
    for (size_t i = 0; i < n_tokens; ++i) tokens.tokens.push_back("tok" + std::to_string(i));
    return backends::Hypothesis::from_confidences(std::move(tokens),
                                                  std::vector<double>(n_tokens, confidence));
}

metrics::FeatureRecord record(double cer, double length_ratio, double unique_ratio,
                              int digit_mismatch) {
    metrics::FeatureRecord f;
    f.cer = cer;
    f.length_ratio = length_ratio;
    f.unique_token_ratio = unique_ratio;
    f.digit_mismatch = digit_mismatch;
    return f;
}

}  // namespace

TEST_CASE("rule filter accepts identity corrections") {
    const auto d = rule_filter_correction(textnorm::tokenize("hello there world"),
                                          textnorm::tokenize("hello there world"));
    CHECK(d.accept);
    CHECK(d.reason == FilterReason::ok);
}

TEST_CASE("rule filter worked example: length ratio rejection") {
    const auto d = rule_filter_correction(textnorm::tokenize("hello world"),
                                          textnorm::tokenize("hello word"));
    CHECK_FALSE(d.accept);
    CHECK(d.reason == FilterReason::length_ratio);  // cer 1/11 passes first
    CHECK(*d.features.length_ratio == doctest::Approx(10.0 / 11.0));
}

TEST_CASE("rule filter worked example: repetition loop") {
    // Char-similar and equal length, so cer and length both pass; the
    // unique-token rule is what fires on the 5x repeat.
    const auto d = rule_filter_correction(textnorm::tokenize("yes yes yes yes yet"),
                                          textnorm::tokenize("yes yes yes yes yes"));
    CHECK_FALSE(d.accept);
    CHECK(d.reason == FilterReason::low_unique_ratio);
    CHECK(*d.features.unique_token_ratio == doctest::Approx(0.2));
}

TEST_CASE("rule filter boundary table is bit-exact") {
    // CER exactly 0.15 accepts; the smallest constructible step above rejects.
    CHECK(rule_filter_decide(record(0.15, 1.0, 1.0, 0)).accept);
    CHECK_FALSE(rule_filter_decide(record(std::nextafter(0.15, 1.0), 1.0, 1.0, 0)).accept);
    CHECK(rule_filter_decide(record(std::nextafter(0.15, 1.0), 1.0, 1.0, 0)).reason ==
          FilterReason::cer_exceeded);

    CHECK(rule_filter_decide(record(0.0, 0.95, 1.0, 0)).accept);
    CHECK(rule_filter_decide(record(0.0, 1.15, 1.0, 0)).accept);
    CHECK_FALSE(rule_filter_decide(record(0.0, std::nextafter(0.95, 0.0), 1.0, 0)).accept);
    CHECK_FALSE(rule_filter_decide(record(0.0, std::nextafter(1.15, 2.0), 1.0, 0)).accept);

    CHECK(rule_filter_decide(record(0.0, 1.0, 0.40, 0)).accept);
    CHECK_FALSE(rule_filter_decide(record(0.0, 1.0, std::nextafter(0.40, 0.0), 0)).accept);

    CHECK(rule_filter_decide(record(0.0, 1.0, 1.0, 2)).accept);
    CHECK_FALSE(rule_filter_decide(record(0.0, 1.0, 1.0, 3)).accept);
    CHECK(rule_filter_decide(record(0.0, 1.0, 1.0, 3)).reason == FilterReason::digit_mismatch);
}

TEST_CASE("rule filter end-to-end boundary cases") {
    // cer = 3/20 = 0.15 exactly, equal lengths: accept.
    const auto accept = rule_filter_correction(
        textnorm::TokenSeq{"aaaaaaaaaa", "aaaaaaaaa"},   // 20 chars
        textnorm::TokenSeq{"aaaaaaabbb", "aaaaaaaaa"});  // 3 substituted chars
    CHECK(accept.accept);
    CHECK(accept.features.cer == doctest::Approx(0.15));

    // cer = 3/19 > 0.15: reject.
    const auto reject = rule_filter_correction(
        textnorm::TokenSeq{"aaaaaaaaaa", "aaaaaaaa"},   // 19 chars
        textnorm::TokenSeq{"aaaaaaabbb", "aaaaaaaa"});
    CHECK_FALSE(reject.accept);
    CHECK(reject.reason == FilterReason::cer_exceeded);

    // Digit boundary: exactly 2 mismatching digit tokens accept, 3 reject
    // (tokens padded long enough that the earlier rules pass).
    const auto digits_ok = rule_filter_correction(textnorm::TokenSeq{"2021", "57", "aaaa"},
                                                  textnorm::TokenSeq{"2021", "58", "aaaa"});
    CHECK(digits_ok.accept);
    CHECK(digits_ok.features.digit_mismatch == 2);
    const auto digits_bad =
        rule_filter_correction(textnorm::TokenSeq{"2021", "57", "aaaaaaaaaaaaaaa"},
                               textnorm::TokenSeq{"2021", "58", "aaaaaaaaaaaaaa5"});
    CHECK(digits_bad.features.cer <= 0.15);
    CHECK_FALSE(digits_bad.accept);
    CHECK(digits_bad.reason == FilterReason::digit_mismatch);
}

TEST_CASE("rule filter rejects an empty hypothesis via length_ratio") {
    const auto d = rule_filter_correction(textnorm::TokenSeq{}, textnorm::tokenize("something"));
    CHECK_FALSE(d.accept);
    CHECK(d.reason == FilterReason::length_ratio);

    const auto empty_corr = rule_filter_correction(textnorm::tokenize("something"),
                                                   textnorm::TokenSeq{});
    CHECK_FALSE(empty_corr.accept);
    CHECK(empty_corr.reason == FilterReason::cer_exceeded);  // cer = 1.0
}

TEST_CASE("ipl filter worked examples and boundaries") {
    CHECK(ipl_filter(hyp_with(0.96, 9), 3.0).accept);  // rate 3.0, varied tokens

    const auto low_conf = ipl_filter(hyp_with(0.94, 9), 3.0);
    CHECK_FALSE(low_conf.accept);
    CHECK(low_conf.reason == FilterReason::low_confidence);

    const auto fast = ipl_filter(hyp_with(0.99, 11), 2.0);  // 5.5 words/s
    CHECK_FALSE(fast.accept);
    CHECK(fast.reason == FilterReason::speaking_rate);

    CHECK_THROWS_AS(ipl_filter(hyp_with(0.99, 4), 0.0), ValidationError);
}

TEST_CASE("ipl filter boundary table is bit-exact") {
    metrics::FeatureRecord f;
    f.confidence = 0.95;
    f.speaking_rate = 2.0;
    f.compression_ratio = 0.5;
    CHECK(ipl_filter_decide(f).accept);

    f.confidence = 0.9499;
    CHECK_FALSE(ipl_filter_decide(f).accept);
    CHECK(ipl_filter_decide(f).reason == FilterReason::low_confidence);

    f.confidence = 0.95;
    f.speaking_rate = 5.0;
    CHECK(ipl_filter_decide(f).accept);
    f.speaking_rate = std::nextafter(5.0, 6.0);
    CHECK_FALSE(ipl_filter_decide(f).accept);
    f.speaking_rate = std::nextafter(2.0, 0.0);
    CHECK_FALSE(ipl_filter_decide(f).accept);

    f.speaking_rate = 3.0;
    f.compression_ratio = std::nextafter(0.5, 0.0);
    CHECK_FALSE(ipl_filter_decide(f).accept);
    CHECK(ipl_filter_decide(f).reason == FilterReason::compression_ratio);
}

TEST_CASE("property: ipl acceptance is monotone in confidence") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        metrics::FeatureRecord f;
        f.speaking_rate = 1.0 + rng.next_unit() * 5.0;
        f.compression_ratio = rng.next_unit();
        const double low = rng.next_unit();
        const double high = low + (1.0 - low) * rng.next_unit();
        f.confidence = low;
        const bool accepted_low = ipl_filter_decide(f).accept;
        f.confidence = high;
        const bool accepted_high = ipl_filter_decide(f).accept;
        if (accepted_low) CHECK(accepted_high);
    }
}

TEST_CASE("property: accepted corrections satisfy the bounds exactly") {
    Rng rng(34);
    int accepted = 0;
    for (int i = 0; i < 600; ++i) {
        auto hyp = testsupport::random_token_seq(rng, 10, 12);
        auto corr = testsupport::random_token_seq(rng, 10, 12);
        if (hyp.empty()) hyp.tokens.push_back("base");
        if (corr.empty()) corr.tokens.push_back("base");
        const auto d = rule_filter_correction(hyp, corr);
        if (!d.accept) continue;
        ++accepted;
        REQUIRE(d.features.length_ratio.has_value());
        CHECK(*d.features.length_ratio >= 0.95);
        CHECK(*d.features.length_ratio <= 1.15);
        REQUIRE(d.features.unique_token_ratio.has_value());
        CHECK(*d.features.unique_token_ratio >= 0.40);
        CHECK(d.features.cer <= 0.15);
        CHECK(d.features.digit_mismatch <= 2);
    }
    CHECK(accepted > 0);
}

TEST_CASE("property: rule filter accepts every identity correction") {
    Rng rng(32);
    for (int i = 0; i < 200; ++i) {
        auto seq = testsupport::random_token_seq(rng, 12, 30);
        if (seq.empty()) seq.tokens.push_back("solo");
        const auto d = rule_filter_correction(seq, seq);
        CHECK(d.accept);
        REQUIRE(d.features.length_ratio.has_value());
        CHECK(*d.features.length_ratio == 1.0);
    }
}

TEST_CASE("model filter learns a separable rule") {
    // Label is exactly (cer <= 0.1): build a synthetic separable set by
    // pairing truths with either near-identical or heavily-edited
    // corrections, train, and verify held-out accuracy.
    Rng rng(33);
    auto make_example = [&](bool good) {
        ModelFilterExample ex;
        const size_t len = 6 + rng.next_below(4);
        for (size_t i = 0; i < len; ++i) {
            const std::string tok = "t" + std::to_string(rng.next_below(40));
            ex.truth.tokens.push_back(tok);
            ex.hypothesis.tokens.push_back(i == 0 ? "wrong" : tok);
            ex.correction.tokens.push_back(good ? tok : "garbage" + std::to_string(i));
        }
        ex.confidence = 0.5 + 0.5 * rng.next_unit();
        return ex;
    };
    std::vector<ModelFilterExample> train_set, held_out;
    for (int i = 0; i < 60; ++i) train_set.push_back(make_example(i % 2 == 0));
    for (int i = 0; i < 40; ++i) held_out.push_back(make_example(i % 2 == 1));

    const ModelFilter filter = model_filter_train(train_set, 9);

    // Identity corrections sit with the improving class this filter was
    // trained on, so they are accepted.
    for (int i = 0; i < 10; ++i) {
        const auto ex = make_example(true);
        CHECK(model_filter_apply(filter, ex.truth, ex.truth, ex.confidence).accept);
    }

    int correct = 0;
    for (const auto& ex : held_out) {
        const bool expect = metrics::wer(ex.truth, ex.correction) < metrics::wer(ex.truth, ex.hypothesis);
        const bool got =
            model_filter_apply(filter, ex.hypothesis, ex.correction, ex.confidence).accept;
        correct += (expect == got) ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / held_out.size() >= 0.95);

    // Determinism: same data, same seed, identical weights.
    const ModelFilter again = model_filter_train(train_set, 9);
    CHECK(again.weights == filter.weights);
    CHECK(again.bias == filter.bias);
}

TEST_CASE("model filter refuses degenerate training sets") {
    std::vector<ModelFilterExample> all_good;
    for (int i = 0; i < 8; ++i) {
        ModelFilterExample ex;
        ex.truth = textnorm::tokenize("a b c d");
        ex.hypothesis = textnorm::tokenize("a x c d");
        ex.correction = ex.truth;  // always improves: single-class labels
        all_good.push_back(ex);
    }
    CHECK_THROWS_AS(model_filter_train(all_good, 1), ValidationError);
    CHECK_THROWS_AS(model_filter_train({}, 1), ValidationError);
}

TEST_CASE("model filter tie and zero-weight conventions") {
    ModelFilter zero;  // all weights and bias zero: sigmoid(0) = 0.5
    zero.feature_scale.fill(1.0);
    const auto d = model_filter_apply(zero, textnorm::tokenize("a b"), textnorm::tokenize("a b"),
                                      0.9);
    CHECK(d.accept);  // score exactly 0.5 accepts

    zero.bias = -1.0;
    CHECK_FALSE(model_filter_apply(zero, textnorm::tokenize("a b"), textnorm::tokenize("a b"), 0.9)
                    .accept);
    zero.bias = 1.0;
    CHECK(model_filter_apply(zero, textnorm::tokenize("a b"), textnorm::tokenize("a b"), 0.9)
              .accept);
}
