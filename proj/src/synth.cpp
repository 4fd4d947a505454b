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
#include <iomanip>
#include <set>
#include <sstream>

namespace rehear::corpus {

namespace {

std::string random_letter_word(Rng& rng) {
    const size_t len = 3 + static_cast<size_t>(rng.next_below(4));  // 3..6
    std::string w(len, 'a');
    for (auto& c : w) c = static_cast<char>('a' + rng.next_below(26));
    return w;
}

std::string random_digit_word(Rng& rng) {
    const size_t len = 1 + static_cast<size_t>(rng.next_below(4));  // 1..4
    std::string w;
    w.push_back(static_cast<char>('1' + rng.next_below(9)));
    while (w.size() < len) w.push_back(static_cast<char>('0' + rng.next_below(10)));
    return w;
}

Vocabulary build_vocabulary(const SynthConfig& cfg, Rng& rng) {
    const auto fillers = textnorm::NormalizationConfig::defaults().filler_words;
    std::set<std::string> taken(fillers.begin(), fillers.end());

    const int digit_count =
        static_cast<int>(std::lround(cfg.digit_token_fraction * cfg.vocab_size));
    std::vector<int> slots(static_cast<size_t>(cfg.vocab_size));
    for (int i = 0; i < cfg.vocab_size; ++i) slots[static_cast<size_t>(i)] = i;
    rng.shuffle(slots);
    std::set<int> digit_slots(slots.begin(), slots.begin() + digit_count);

    Vocabulary vocab;
    vocab.words.resize(static_cast<size_t>(cfg.vocab_size));
    for (int i = 0; i < cfg.vocab_size; ++i) {
        std::string w;
        do {
            w = digit_slots.count(i) ? random_digit_word(rng) : random_letter_word(rng);
        } while (!taken.insert(w).second);
        vocab.words[static_cast<size_t>(i)] = std::move(w);
    }

    // Homophone classes live at or beyond the rank floor (word ids are
    // also Zipf ranks), so the head of the law stays injective. A seeded
    // sample of eligible ranks is sorted and stride-paired, giving class
    // members comparable but not identical priors: resolving them needs
    // context on top of the shared observation.
    const uint32_t member_count =
        static_cast<uint32_t>(cfg.homophone_class_count * cfg.homophone_class_size);
    std::vector<uint32_t> eligible;
    for (uint32_t r = static_cast<uint32_t>(cfg.homophone_rank_floor);
         r < static_cast<uint32_t>(cfg.vocab_size); ++r)
        eligible.push_back(r);
    rng.shuffle(eligible);
    std::vector<uint32_t> chosen(eligible.begin(), eligible.begin() + member_count);
    std::sort(chosen.begin(), chosen.end());

    // Mixed class difficulty: the first half pairs adjacent sampled ranks
    // (near-equal priors, resolvable only through context), the second half
    // stride-pairs across the sample (skewed priors).
    vocab.observation_of.assign(static_cast<size_t>(cfg.vocab_size), 0);
    std::vector<bool> in_class(static_cast<size_t>(cfg.vocab_size), false);
    uint32_t next_symbol = 0;
    const int adjacent_classes = cfg.homophone_class_count / 2;
    size_t cursor = 0;
    for (int c = 0; c < adjacent_classes; ++c) {
        for (int k = 0; k < cfg.homophone_class_size; ++k) {
            const uint32_t w = chosen[cursor++];
            vocab.observation_of[w] = next_symbol;
            in_class[w] = true;
        }
        ++next_symbol;
    }
    const int stride_classes = cfg.homophone_class_count - adjacent_classes;
    const size_t base = cursor;
    for (int c = 0; c < stride_classes; ++c) {
        for (int k = 0; k < cfg.homophone_class_size; ++k) {
            const uint32_t w = chosen[base + static_cast<size_t>(k * stride_classes + c)];
            vocab.observation_of[w] = next_symbol;
            in_class[w] = true;
        }
        ++next_symbol;
    }
    for (uint32_t w = 0; w < static_cast<uint32_t>(cfg.vocab_size); ++w) {
        if (!in_class[w]) vocab.observation_of[w] = next_symbol++;
    }
    vocab.observation_count = next_symbol;
    vocab.rebuild_index();
    return vocab;
}

// Draws from a cumulative weight table; cum.back() is the total mass.
uint32_t draw_from_cumulative(const std::vector<double>& cum, Rng& rng) {
    const double u = rng.next_unit() * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return static_cast<uint32_t>(std::min<size_t>(
        static_cast<size_t>(it - cum.begin()), cum.size() - 1));
}

}  // namespace

SynthCorpus synth_corpus(const SynthConfig& cfg) {
    cfg.validate();

    SynthCorpus corpus;
    corpus.config = cfg;

    Rng vocab_rng(derive_seed(cfg.seed, "vocabulary"));
    corpus.vocab = build_vocabulary(cfg, vocab_rng);
    const uint32_t vocab_size = corpus.vocab.size();

    // Zipf-like unigram law over word ids.
    corpus.unigram_weights.resize(vocab_size);
    double total = 0.0;
    for (uint32_t i = 0; i < vocab_size; ++i) {
        corpus.unigram_weights[i] = 1.0 / std::pow(static_cast<double>(i + 1), cfg.zipf_exponent);
        total += corpus.unigram_weights[i];
    }
    for (auto& w : corpus.unigram_weights) w /= total;

    std::vector<double> unigram_cum(vocab_size);
    double acc = 0.0;
    for (uint32_t i = 0; i < vocab_size; ++i) {
        acc += corpus.unigram_weights[i];
        unigram_cum[i] = acc;
    }

    // Successor sets exist for head-ranked words (whose transition
    // statistics a small labeled set estimates well) and for homophone
    // class members (whose collocations are what makes them resolvable in
    // context at all).
    const uint32_t markov_heads =
        std::min<uint32_t>(static_cast<uint32_t>(cfg.markov_head_ranks), vocab_size);
    const auto obs_members = corpus.vocab.words_of_observation();
    std::vector<bool> has_successors(vocab_size, false);
    for (uint32_t w = 0; w < vocab_size; ++w) {
        const bool shares_observation = obs_members[corpus.vocab.observation_of[w]].size() > 1;
        has_successors[w] = w < markov_heads || shares_observation;
    }
    Rng succ_rng(derive_seed(cfg.seed, "successors"));
    std::vector<std::vector<uint32_t>> successors(vocab_size);
    std::vector<std::vector<double>> successor_cum(vocab_size);
    std::vector<double> successor_mass(vocab_size, 0.0);
    for (uint32_t w = 0; w < vocab_size; ++w) {
        if (!has_successors[w]) continue;
        std::set<uint32_t> s;
        while (s.size() < static_cast<size_t>(cfg.successor_fanout))
            s.insert(draw_from_cumulative(unigram_cum, succ_rng));
        double m = 0.0;
        for (uint32_t v : s) {
            successors[w].push_back(v);
            m += corpus.unigram_weights[v];
            successor_cum[w].push_back(m);
        }
        successor_mass[w] = m;
    }

    // next | prev  ~  (1 - blend) * unigram + blend * q(. | prev), where
    // q boosts prev's successor set by successor_boost and renormalizes.
    // Prevs without successor sets draw from the unigram law.
    auto draw_next = [&](uint32_t prev, Rng& rng) -> uint32_t {
        if (has_successors[prev] && cfg.markov_blend > 0.0 &&
            rng.next_unit() < cfg.markov_blend) {
            const double z = 1.0 + cfg.successor_boost * successor_mass[prev];
            const double boosted = cfg.successor_boost * successor_mass[prev] / z;
            if (rng.next_unit() < boosted)
                return successors[prev][draw_from_cumulative(successor_cum[prev], rng)];
        }
        return draw_from_cumulative(unigram_cum, rng);
    };

    const int total_utterances = cfg.labeled_utterances + cfg.unlabeled_utterances +
                                 cfg.validation_utterances + cfg.test_utterances;
    const int span = cfg.max_utterance_tokens - cfg.min_utterance_tokens + 1;

    std::vector<Segment> segments;
    segments.reserve(static_cast<size_t>(total_utterances));
    double source_clock = 0.0;
    for (int u = 0; u < total_utterances; ++u) {
        Rng rng(derive_seed(cfg.seed, "utterance", static_cast<uint64_t>(u)));
        const int source_index = u / cfg.utterances_per_source;
        if (u % cfg.utterances_per_source == 0) source_clock = 0.0;

        const int len = cfg.min_utterance_tokens + static_cast<int>(rng.next_below(
                                                       static_cast<uint64_t>(span)));
        std::vector<uint32_t> word_ids(static_cast<size_t>(len));
        word_ids[0] = draw_from_cumulative(unigram_cum, rng);
        for (int i = 1; i < len; ++i)
            word_ids[static_cast<size_t>(i)] = draw_next(word_ids[static_cast<size_t>(i - 1)], rng);

        Segment seg;
        {
            std::ostringstream sid;
            sid << "src" << std::setw(5) << std::setfill('0') << source_index;
            seg.source_id = sid.str();
        }
        seg.start_s = source_clock;
        seg.end_s = source_clock + cfg.token_duration_s * len;
        source_clock = seg.end_s;

        std::string transcript;
        seg.audio.symbols.reserve(static_cast<size_t>(len));
        for (int i = 0; i < len; ++i) {
            const uint32_t w = word_ids[static_cast<size_t>(i)];
            if (i > 0) transcript.push_back(' ');
            transcript += corpus.vocab.words[w];
            uint32_t obs = corpus.vocab.observation_of[w];
            if (cfg.acoustic_noise > 0.0 && rng.next_unit() < cfg.acoustic_noise)
                obs = static_cast<uint32_t>(rng.next_below(corpus.vocab.observation_count));
            seg.audio.symbols.push_back(obs);
        }
        seg.transcript = std::move(transcript);
        segments.push_back(std::move(seg));
    }

    const double n = static_cast<double>(total_utterances);
    const std::array<double, 4> ratios = {
        cfg.labeled_utterances / n,
        cfg.unlabeled_utterances / n,
        cfg.validation_utterances / n,
        cfg.test_utterances / n,
    };
    corpus.splits = partition(segments, ratios, derive_seed(cfg.seed, "splits"));
    return corpus;
}

}  // namespace rehear::corpus
