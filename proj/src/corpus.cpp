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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace rehear::corpus {

void CorpusSplits::validate_disjoint_sources() const {
    std::map<std::string, int> owner;  // source_id -> split index
    auto claim = [&](const std::string& source, int split) {
        auto [it, inserted] = owner.emplace(source, split);
        if (!inserted && it->second != split) {
            throw ValidationError("source '" + source + "' appears in splits '" +
                                  std::string(kSplitNames[static_cast<size_t>(it->second)]) +
                                  "' and '" + std::string(kSplitNames[static_cast<size_t>(split)]) +
                                  "'");
        }
    };
    for (const auto& s : labeled) claim(s.source_id, 0);
    for (const auto& s : unlabeled) claim(s.source_id, 1);
    for (const auto& s : validation) claim(s.source_id, 2);
    for (const auto& s : test) claim(s.source_id, 3);
}

uint32_t Vocabulary::word_id(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end())
        throw ValidationError("unknown vocabulary token: '" + std::string(word) + "'");
    return it->second;
}

void Vocabulary::rebuild_index() {
    index_.clear();
    index_.reserve(words.size());
    for (uint32_t i = 0; i < words.size(); ++i) index_.emplace(words[i], i);
}

std::vector<std::vector<uint32_t>> Vocabulary::words_of_observation() const {
    std::vector<std::vector<uint32_t>> out(observation_count);
    for (uint32_t w = 0; w < words.size(); ++w) out[observation_of[w]].push_back(w);
    return out;
}

void SynthConfig::validate() const {
    if (vocab_size <= 0) throw ValidationError("synth: vocab_size must be positive");
    if (homophone_class_count < 0 || homophone_class_size < 0)
        throw ValidationError("synth: homophone class fields must be non-negative");
    if (homophone_class_count > 0 && homophone_class_size < 2)
        throw ValidationError("synth: homophone_class_size must be >= 2 when classes exist");
    if (homophone_rank_floor < 0)
        throw ValidationError("synth: homophone_rank_floor must be >= 0");
    if (homophone_class_count > 0) {
        if (homophone_rank_floor >= vocab_size)
            throw ValidationError("synth: homophone_rank_floor out of range");
        if (static_cast<long>(homophone_class_count) * homophone_class_size >
            vocab_size - homophone_rank_floor)
            throw ValidationError(
                "synth: homophone classes do not fit above homophone_rank_floor");
    }
    if (digit_token_fraction < 0.0 || digit_token_fraction > 1.0)
        throw ValidationError("synth: digit_token_fraction must be in [0, 1]");
    if (min_utterance_tokens < 1 || max_utterance_tokens < min_utterance_tokens)
        throw ValidationError("synth: utterance length range invalid");
    if (acoustic_noise < 0.0 || acoustic_noise >= 1.0)
        throw ValidationError("synth: acoustic_noise must be in [0, 1)");
    if (labeled_utterances < 1 || unlabeled_utterances < 1 || validation_utterances < 1 ||
        test_utterances < 1)
        throw ValidationError("synth: every split needs at least one utterance");
    if (utterances_per_source < 1)
        throw ValidationError("synth: utterances_per_source must be >= 1");
    if (zipf_exponent <= 0.0) throw ValidationError("synth: zipf_exponent must be positive");
    if (markov_blend < 0.0 || markov_blend >= 1.0)
        throw ValidationError("synth: markov_blend must be in [0, 1)");
    if (successor_fanout < 1) throw ValidationError("synth: successor_fanout must be >= 1");
    if (successor_boost < 0.0) throw ValidationError("synth: successor_boost must be >= 0");
    if (markov_head_ranks < 0) throw ValidationError("synth: markov_head_ranks must be >= 0");
    if (token_duration_s <= 0.0) throw ValidationError("synth: token_duration_s must be positive");
}

std::string_view to_string(SegmentRejection r) {
    switch (r) {
        case SegmentRejection::too_short: return "too_short";
        case SegmentRejection::too_long: return "too_long";
        case SegmentRejection::empty: return "empty";
    }
    return "unknown";
}

std::vector<Segment> merge_segments(const std::vector<Segment>& segments, double max_chunk_s,
                                    double gap_s, double pad_s) {
    // Validate ordering per source: sorted by start and non-overlapping.
    std::map<std::string, const Segment*> last_of_source;
    for (const auto& seg : segments) {
        if (seg.start_s < 0.0 || seg.end_s <= seg.start_s)
            throw ValidationError("merge_segments: segment with non-positive span in source '" +
                                  seg.source_id + "'");
        auto it = last_of_source.find(seg.source_id);
        if (it != last_of_source.end()) {
            if (seg.start_s < it->second->end_s)
                throw ValidationError(
                    "merge_segments: segments unsorted or overlapping in source '" +
                    seg.source_id + "'");
        }
        last_of_source[seg.source_id] = &seg;
    }

    std::vector<Segment> merged;
    merged.reserve(segments.size());
    size_t i = 0;
    while (i < segments.size()) {
        Segment group = segments[i];
        size_t j = i + 1;
        while (j < segments.size() && segments[j].source_id == group.source_id) {
            const Segment& next = segments[j];
            const double gap = next.start_s - group.end_s;
            const double merged_span = next.end_s - group.start_s + 2.0 * pad_s;
            if (gap >= gap_s || merged_span > max_chunk_s) break;
            group.end_s = next.end_s;
            group.transcript += " " + next.transcript;
            group.audio.symbols.insert(group.audio.symbols.end(), next.audio.symbols.begin(),
                                       next.audio.symbols.end());
            ++j;
        }
        group.start_s = std::max(0.0, group.start_s - pad_s);
        group.end_s += pad_s;
        merged.push_back(std::move(group));
        i = j;
    }
    return merged;
}

FilterSegmentsResult filter_segments(const std::vector<Segment>& segments,
                                     const textnorm::NormalizationConfig& norm) {
    FilterSegmentsResult out;
    for (const auto& seg : segments) {
        const double d = seg.duration();
        if (d < 0.05) {
            out.rejected.emplace_back(seg, SegmentRejection::too_short);
        } else if (d > 30.0) {
            out.rejected.emplace_back(seg, SegmentRejection::too_long);
        } else if (textnorm::normalize(seg.transcript, norm).empty()) {
            out.rejected.emplace_back(seg, SegmentRejection::empty);
        } else {
            out.kept.push_back(seg);
        }
    }
    return out;
}

CorpusSplits partition(const std::vector<Segment>& segments, const std::array<double, 4>& ratios,
                       uint64_t seed) {
    double ratio_sum = 0.0;
    for (double r : ratios) {
        if (r < 0.0) throw ValidationError("partition: ratios must be non-negative");
        ratio_sum += r;
    }
    if (std::abs(ratio_sum - 1.0) > 1e-9)
        throw ValidationError("partition: ratios must sum to 1");

    // Group whole sources; order of first appearance, then seeded shuffle.
    std::vector<std::string> source_order;
    std::map<std::string, std::vector<const Segment*>> by_source;
    for (const auto& seg : segments) {
        auto [it, inserted] = by_source.try_emplace(seg.source_id);
        if (inserted) source_order.push_back(seg.source_id);
        it->second.push_back(&seg);
    }

    int active_splits = 0;
    for (double r : ratios)
        if (r > 0.0) ++active_splits;
    if (source_order.size() < static_cast<size_t>(active_splits))
        throw ValidationError("partition: fewer sources than non-empty splits");

    double total_duration = 0.0;
    for (const auto& seg : segments) total_duration += seg.duration();

    Rng rng(derive_seed(seed, "partition"));
    rng.shuffle(source_order);

    std::array<double, 4> target{}, filled{};
    for (size_t s = 0; s < 4; ++s) target[s] = ratios[s] * total_duration;

    CorpusSplits splits;
    for (const auto& source : source_order) {
        double source_duration = 0.0;
        for (const Segment* seg : by_source[source]) source_duration += seg->duration();
        // Largest remaining deficit wins; ties go to the earliest split.
        size_t best = 0;
        double best_deficit = -1e300;
        for (size_t s = 0; s < 4; ++s) {
            if (ratios[s] <= 0.0) continue;
            const double deficit = target[s] - filled[s];
            if (deficit > best_deficit + 1e-12) {
                best_deficit = deficit;
                best = s;
            }
        }
        filled[best] += source_duration;
        for (const Segment* seg : by_source[source]) {
            switch (best) {
                case 0: splits.labeled.push_back(*seg); break;
                case 1: {
                    UnlabeledSegment u;
                    u.source_id = seg->source_id;
                    u.start_s = seg->start_s;
                    u.end_s = seg->end_s;
                    u.audio = seg->audio;
                    u.hidden_reference = HiddenTranscript::seal(seg->transcript);
                    splits.unlabeled.push_back(std::move(u));
                    break;
                }
                case 2: splits.validation.push_back(*seg); break;
                case 3: splits.test.push_back(*seg); break;
            }
        }
    }
    splits.validate_disjoint_sources();
    return splits;
}

}  // namespace rehear::corpus
