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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace rehear::corpus {

// Audio as either a simulation observation-symbol sequence or a handle to
// an external file that a real backend resolves itself.
struct AudioRef {
    std::vector<uint32_t> symbols;
    std::string path;

    bool is_external() const { return !path.empty(); }
    bool operator==(const AudioRef&) const = default;
};

struct Segment {
    std::string source_id;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string transcript;
    AudioRef audio;

    double duration() const { return end_s - start_s; }
    bool operator==(const Segment&) const = default;
};

// A transcript the training path must never read. The only accessor is
// named for its single legitimate caller; the leakage audit poisons these
// and asserts that training outputs do not move.
class HiddenTranscript {
public:
    HiddenTranscript() = default;
    static HiddenTranscript seal(std::string text) {
        HiddenTranscript h;
        h.text_ = std::move(text);
        return h;
    }
    const std::string& for_evaluation_only() const { return text_; }
    bool operator==(const HiddenTranscript&) const = default;

private:
    std::string text_;
};

struct UnlabeledSegment {
    std::string source_id;
    double start_s = 0.0;
    double end_s = 0.0;
    AudioRef audio;
    HiddenTranscript hidden_reference;

    double duration() const { return end_s - start_s; }
    bool operator==(const UnlabeledSegment&) const = default;
};

struct CorpusSplits {
    std::vector<Segment> labeled;
    std::vector<UnlabeledSegment> unlabeled;
    std::vector<Segment> validation;
    std::vector<Segment> test;

    // Throws if any source_id lands in more than one split.
    void validate_disjoint_sources() const;
    bool operator==(const CorpusSplits&) const = default;
};

// Word list plus the observation map: homophone-class members share one
// observation symbol, every other word has its own.
struct Vocabulary {
    std::vector<std::string> words;            // word id -> string
    std::vector<uint32_t> observation_of;      // word id -> observation symbol
    uint32_t observation_count = 0;

    uint32_t size() const { return static_cast<uint32_t>(words.size()); }
    uint32_t word_id(std::string_view word) const;  // throws on unknown words
    // Word ids mapped to this observation symbol, ascending.
    std::vector<std::vector<uint32_t>> words_of_observation() const;
    bool operator==(const Vocabulary&) const = default;

    void rebuild_index();

private:
    std::unordered_map<std::string, uint32_t> index_;
};

struct SynthConfig {
    int vocab_size = 200;
    int homophone_class_count = 30;
    int homophone_class_size = 2;
    // Classes draw members from ranks at or above this floor; the head of
    // the Zipf law stays injective so bulk confidence remains informative.
    int homophone_rank_floor = 40;
    double digit_token_fraction = 0.10;
    int min_utterance_tokens = 8;
    int max_utterance_tokens = 16;
    double acoustic_noise = 0.03;  // per-symbol corruption probability
    int labeled_utterances = 200;
    int unlabeled_utterances = 600;
    int validation_utterances = 200;
    int test_utterances = 400;
    int utterances_per_source = 4;
    double zipf_exponent = 1.0;
    // Token sampling mixes the unigram law with a seeded successor-affinity
    // law so context carries information a bigram LM can learn. Only words
    // ranked below markov_head_ranks carry successor preferences: frequent
    // contexts recur often enough in a small labeled set for their
    // transition statistics to be estimated well.
    double markov_blend = 0.65;
    int successor_fanout = 2;
    double successor_boost = 60.0;
    int markov_head_ranks = 30;
    double token_duration_s = 0.4;
    uint64_t seed = 1;

    void validate() const;
};

struct SynthCorpus {
    SynthConfig config;
    Vocabulary vocab;
    // Unigram sampling weights per word id, normalized. Kept with the
    // corpus so backends can build priors without reading any transcript.
    std::vector<double> unigram_weights;
    CorpusSplits splits;
};

// Greedy left-to-right merge of adjacent same-source segments whose gap is
// under gap_s, refusing any merge whose padded span would exceed
// max_chunk_s. Outputs are padded by pad_s on both ends and clamped at 0.
std::vector<Segment> merge_segments(const std::vector<Segment>& segments,
                                    double max_chunk_s = 30.0, double gap_s = 2.0,
                                    double pad_s = 0.1);

enum class SegmentRejection { too_short, too_long, empty };
std::string_view to_string(SegmentRejection r);

struct FilterSegmentsResult {
    std::vector<Segment> kept;
    std::vector<std::pair<Segment, SegmentRejection>> rejected;
};

// Keeps segments with duration in [0.05, 30] seconds and a non-empty
// normalized transcript.
FilterSegmentsResult filter_segments(const std::vector<Segment>& segments,
                                     const textnorm::NormalizationConfig& norm);

// Split order: labeled, unlabeled, validation, test.
inline constexpr std::array<std::string_view, 4> kSplitNames = {"labeled", "unlabeled",
                                                                "validation", "test"};

// Assigns whole sources to splits: sources are shuffled by seed, then each
// goes to the split with the largest remaining duration deficit.
CorpusSplits partition(const std::vector<Segment>& segments,
                       const std::array<double, 4>& ratios, uint64_t seed);

SynthCorpus synth_corpus(const SynthConfig& cfg);

// Directory layout: corpus.json (config, vocabulary, observation map,
// unigram weights) + segments.jsonl (one record per segment). Lossless
// round trip; see docs/formats.md.
void save_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir,
                 bool overwrite = false);
SynthCorpus load_corpus(const std::filesystem::path& dir);

// Stable content hash used to detect mixed-corpus reports.
std::string corpus_fingerprint(const SynthCorpus& corpus);

}  // namespace rehear::corpus
