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

#include "rehear/corpus.hpp"

#include "rehear/errors.hpp"
#include "rehear/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

using namespace rehear;
using namespace rehear::corpus;

namespace {

Segment seg(const std::string& source, double start, double end, const std::string& text) {
    Segment s;
    s.source_id = source;
    s.start_s = start;
    s.end_s = end;
    s.transcript = text;
    return s;
}

size_t total_tokens(const std::vector<Segment>& segments) {
    size_t n = 0;
    for (const auto& s : segments) n += textnorm::tokenize(s.transcript).size();
    return n;
}

}  // namespace

TEST_CASE("merge_segments: close gap merges and pads") {
    const auto out = merge_segments({seg("s", 0.0, 10.0, "one"), seg("s", 11.5, 20.0, "two")});
    REQUIRE(out.size() == 1);
    CHECK(out[0].start_s == doctest::Approx(0.0));  // -0.1 clamped at zero
    CHECK(out[0].end_s == doctest::Approx(20.1));
    CHECK(out[0].transcript == "one two");
}

TEST_CASE("merge_segments: cap refuses an oversized merge") {
    const auto out = merge_segments({seg("s", 0.0, 20.0, "one"), seg("s", 21.0, 35.0, "two")});
    REQUIRE(out.size() == 2);  // merged span 35.2 > 30 even though gap is 1.0
    CHECK(out[0].start_s == doctest::Approx(0.0));
    CHECK(out[0].end_s == doctest::Approx(20.1));
    CHECK(out[1].start_s == doctest::Approx(20.9));
    CHECK(out[1].end_s == doctest::Approx(35.1));
}

TEST_CASE("merge_segments: single segment is just padded") {
    const auto out = merge_segments({seg("s", 5.0, 6.0, "only")});
    REQUIRE(out.size() == 1);
    CHECK(out[0].start_s == doctest::Approx(4.9));
    CHECK(out[0].end_s == doctest::Approx(6.1));
}

TEST_CASE("merge_segments: gap boundary and source boundaries") {
    // Exactly 2.0 s gap does not merge ("under 2 s").
    CHECK(merge_segments({seg("s", 0.0, 1.0, "a"), seg("s", 3.0, 4.0, "b")}).size() == 2);
    // Different sources never merge.
    CHECK(merge_segments({seg("s1", 0.0, 1.0, "a"), seg("s2", 1.2, 2.0, "b")}).size() == 2);
}

TEST_CASE("merge_segments: rejects unsorted or overlapping input") {
    CHECK_THROWS_AS(merge_segments({seg("s", 5.0, 6.0, "b"), seg("s", 0.0, 1.0, "a")}),
                    ValidationError);
    CHECK_THROWS_AS(merge_segments({seg("s", 0.0, 2.0, "a"), seg("s", 1.0, 3.0, "b")}),
                    ValidationError);
}

TEST_CASE("property: merge_segments caps durations and preserves tokens") {
    Rng rng(42);
    for (int round = 0; round < 200; ++round) {
        std::vector<Segment> input;
        double clock = 0.0;
        const int n = 1 + static_cast<int>(rng.next_below(10));
        for (int i = 0; i < n; ++i) {
            clock += rng.next_unit() * 4.0;
            const double dur = 0.2 + rng.next_unit() * 29.0;
            input.push_back(seg("s", clock, clock + dur, "tok" + std::to_string(i)));
            clock += dur;
        }
        const auto out = merge_segments(input);
        CHECK(out.size() <= input.size());
        CHECK(total_tokens(out) == total_tokens(input));
        for (const auto& m : out) CHECK(m.duration() <= 30.0 + 2 * 0.1 + 1e-9);
    }
}

TEST_CASE("filter_segments applies the duration and emptiness rules") {
    const auto norm = textnorm::NormalizationConfig::defaults();
    const auto result = filter_segments(
        {
            seg("s", 0.0, 0.04, "too short"),
            seg("s", 1.0, 32.0, "too long"),
            seg("s", 40.0, 45.0, "Um... [cough]"),  // empty once normalized
            seg("s", 0.0, 0.05, "boundary ok"),
            seg("s", 60.0, 90.0, "thirty seconds ok"),
        },
        norm);
    REQUIRE(result.kept.size() == 2);
    CHECK(result.kept[0].transcript == "boundary ok");
    REQUIRE(result.rejected.size() == 3);
    CHECK(result.rejected[0].second == SegmentRejection::too_short);
    CHECK(result.rejected[1].second == SegmentRejection::too_long);
    CHECK(result.rejected[2].second == SegmentRejection::empty);
}

TEST_CASE("partition keeps whole sources and is deterministic") {
    std::vector<Segment> segments;
    for (int src = 0; src < 10; ++src)
        for (int k = 0; k < 3; ++k)
            segments.push_back(seg("src" + std::to_string(src), k * 2.0, k * 2.0 + 1.5, "x y"));

    const std::array<double, 4> ratios{0.2, 0.6, 0.1, 0.1};
    const CorpusSplits a = partition(segments, ratios, 7);
    const CorpusSplits b = partition(segments, ratios, 7);
    CHECK(a == b);
    a.validate_disjoint_sources();

    // Every source is wholly inside one split.
    std::map<std::string, int> seen;
    for (const auto& s : a.labeled) seen[s.source_id] |= 1;
    for (const auto& s : a.unlabeled) seen[s.source_id] |= 2;
    for (const auto& s : a.validation) seen[s.source_id] |= 4;
    for (const auto& s : a.test) seen[s.source_id] |= 8;
    CHECK(seen.size() == 10);
    for (const auto& [src, mask] : seen) CHECK((mask & (mask - 1)) == 0);

    const CorpusSplits c = partition(segments, ratios, 8);
    CHECK(c != a);  // different seed shuffles differently (overwhelmingly)
}

TEST_CASE("partition validates ratios and source count") {
    std::vector<Segment> three;
    for (int src = 0; src < 3; ++src)
        three.push_back(seg("s" + std::to_string(src), 0.0, 1.0, "x"));
    CHECK_THROWS_AS(partition(three, {0.25, 0.25, 0.25, 0.25}, 1), ValidationError);
    CHECK_THROWS_AS(partition(three, {0.5, 0.6, 0.0, 0.0}, 1), ValidationError);
    CHECK_NOTHROW(partition(three, {0.4, 0.3, 0.3, 0.0}, 1));
}

TEST_CASE("synth_corpus is deterministic and leakage safe") {
    SynthConfig cfg;
    cfg.labeled_utterances = 40;
    cfg.unlabeled_utterances = 120;
    cfg.validation_utterances = 40;
    cfg.test_utterances = 80;
    cfg.seed = 99;
    const SynthCorpus a = synth_corpus(cfg);
    const SynthCorpus b = synth_corpus(cfg);
    CHECK(corpus_fingerprint(a) == corpus_fingerprint(b));
    CHECK(a.splits == b.splits);
    a.splits.validate_disjoint_sources();

    cfg.seed = 100;
    CHECK(corpus_fingerprint(synth_corpus(cfg)) != corpus_fingerprint(a));
}

TEST_CASE("synth_corpus: noiseless injective channel recovers transcripts") {
    SynthConfig cfg;
    cfg.homophone_class_count = 0;
    cfg.homophone_class_size = 0;
    cfg.acoustic_noise = 0.0;
    cfg.labeled_utterances = 30;
    cfg.unlabeled_utterances = 30;
    cfg.validation_utterances = 30;
    cfg.test_utterances = 30;
    cfg.seed = 3;
    const SynthCorpus c = synth_corpus(cfg);
    CHECK(c.vocab.observation_count == c.vocab.size());

    // Inverse observation map: with no homophones it is a bijection.
    std::vector<uint32_t> inverse(c.vocab.observation_count);
    for (uint32_t w = 0; w < c.vocab.size(); ++w) inverse[c.vocab.observation_of[w]] = w;
    auto decode = [&](const AudioRef& audio) {
        std::string text;
        for (size_t i = 0; i < audio.symbols.size(); ++i) {
            if (i > 0) text.push_back(' ');
            text += c.vocab.words[inverse[audio.symbols[i]]];
        }
        return text;
    };
    for (const auto& s : c.splits.labeled) CHECK(decode(s.audio) == s.transcript);
    for (const auto& s : c.splits.test) CHECK(decode(s.audio) == s.transcript);
}

TEST_CASE("synth_corpus: split sizes and durations track the configured counts") {
    const SynthCorpus c = synth_corpus(SynthConfig{});  // 200/600/200/400 defaults
    const double n = 200 + 600 + 200 + 400;
    auto close_to = [&](size_t actual, int target) {
        CHECK(std::abs(static_cast<double>(actual) - target) <= 0.15 * n / 4);
    };
    close_to(c.splits.labeled.size(), 200);
    close_to(c.splits.unlabeled.size(), 600);
    close_to(c.splits.validation.size(), 200);
    close_to(c.splits.test.size(), 400);

    double labeled_dur = 0.0, unlabeled_dur = 0.0;
    for (const auto& s : c.splits.labeled) labeled_dur += s.duration();
    for (const auto& s : c.splits.unlabeled) unlabeled_dur += s.duration();
    const double ratio = labeled_dur / unlabeled_dur;
    CHECK(ratio > 0.22);
    CHECK(ratio < 0.47);

    // 0.4 s per token keeps clean speech at 2.5 words/s.
    for (const auto& s : c.splits.labeled) {
        const double rate = textnorm::tokenize(s.transcript).size() / s.duration();
        CHECK(rate == doctest::Approx(2.5));
    }
}

TEST_CASE("corpus save/load round-trips losslessly") {
    SynthConfig cfg;
    cfg.labeled_utterances = 20;
    cfg.unlabeled_utterances = 40;
    cfg.validation_utterances = 20;
    cfg.test_utterances = 20;
    cfg.seed = 12;
    const SynthCorpus original = synth_corpus(cfg);

    const auto dir = std::filesystem::temp_directory_path() / "rehear_corpus_roundtrip";
    std::filesystem::remove_all(dir);
    save_corpus(original, dir);
    const SynthCorpus loaded = load_corpus(dir);
    CHECK(loaded.splits == original.splits);
    CHECK(loaded.vocab == original.vocab);
    CHECK(loaded.unigram_weights == original.unigram_weights);
    CHECK(corpus_fingerprint(loaded) == corpus_fingerprint(original));

    CHECK_THROWS_AS(save_corpus(original, dir), IoError);  // refuses without overwrite
    CHECK_NOTHROW(save_corpus(original, dir, true));
    std::filesystem::remove_all(dir);
}
