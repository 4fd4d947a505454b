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

#include "rehear/corpus.hpp"
#include "rehear/textnorm.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

namespace rehear::backends {

using corpus::AudioRef;
using corpus::Vocabulary;
using textnorm::TokenSeq;

// Recognizer output. confidence is the geometric mean of the per-token
// confidences; an empty hypothesis gets 1.0 by convention and is flagged.
struct Hypothesis {
    TokenSeq tokens;
    std::vector<double> token_confidences;
    double confidence = 1.0;
    bool empty_convention = false;

    static Hypothesis from_confidences(TokenSeq tokens, std::vector<double> confidences);
    bool operator==(const Hypothesis&) const = default;
};

// Noisy-channel recognizer: a counts table over (observation, word) with
// add-alpha smoothing, plus inference-time length noise.
struct StudentModel {
    std::shared_ptr<const Vocabulary> vocab;
    std::vector<std::vector<double>> counts;  // [observation][word id]
    std::vector<double> row_totals;           // cached per-observation count sums
    double alpha = 0.01;
    double p_del = 0.0;
    double p_ins = 0.0;

    static StudentModel uniform(std::shared_ptr<const Vocabulary> vocab, double alpha,
                                double p_del, double p_ins);

    double prob(uint32_t observation, uint32_t word) const;
    uint32_t argmax(uint32_t observation) const;  // ties: lowest word id
    void add_count(uint32_t observation, uint32_t word, double amount);
};

// Synthesizes the "pretrained but domain-mismatched" starting recognizer:
// every word supports its own observation with count_scale mass, and a
// seeded fraction of observation symbols carries a stronger count toward
// one wrong word, which self-training must unlearn.
struct BaseStudentParams {
    double count_scale = 20.0;
    double bias_fraction = 0.50;
    double bias_ratio = 6.0;  // wrong-word count = ratio * true mass of the symbol
    // Only observations whose words all rank inside [floor, ceiling) are
    // bias-eligible; a pretrained model is not confidently wrong on the
    // most common words.
    int bias_rank_floor = 30;
    int bias_rank_ceiling = 1000000;
    double alpha = 0.003;
    double p_del = 0.015;
    double p_ins = 0.015;
};

StudentModel make_base_student(std::shared_ptr<const Vocabulary> vocab,
                               const BaseStudentParams& params, uint64_t seed);

// Per position emits argmax P(w | o) with that probability as the token
// confidence, then applies seeded length noise: delete with p_del,
// duplicate with p_ins (duplicate confidence halved).
Hypothesis student_transcribe(const StudentModel& model, const AudioRef& audio, uint64_t rng_key);

// Positionwise argmax decode with no length noise; |result| == |audio|.
std::vector<uint32_t> student_greedy_decode(const StudentModel& model,
                                            const std::vector<uint32_t>& symbols);

struct TrainingPair {
    AudioRef audio;
    TokenSeq target;
    double weight = 1.0;
};

// One epoch aligns each target against the greedy decode of its audio and
// adds eta * weight at every substitution/correct-aligned observation
// position; epochs repeat the pass (re-decoding against updated counts).
// Within an epoch all alignments see the epoch-start model, so results do
// not depend on example order and epochs=2 equals two epochs=1 calls.
StudentModel student_train(StudentModel model, const std::vector<TrainingPair>& examples,
                           double eta, int epochs);

enum class CorrectorMode { audio_aware, text_only };
std::string_view to_string(CorrectorMode mode);
CorrectorMode corrector_mode_from_string(std::string_view name);

struct DecodingSpec {
    enum class Strategy { greedy, beam, sample };
    Strategy strategy = Strategy::greedy;
    int beam_width = 1;        // beam only; beam(1) is bit-identical to greedy
    double temperature = 0.7;  // sample only

    void validate() const;
    bool operator==(const DecodingSpec&) const = default;
};

DecodingSpec::Strategy decoding_strategy_from_string(std::string_view name);
std::string_view to_string(DecodingSpec::Strategy s);

struct CorrectorParams {
    double alpha = 0.1;      // add-alpha smoothing of channel rows
    double lm_weight = 0.3;  // weight of the bigram LM term
};

// Sparse count row with a cached total.
struct SparseRow {
    std::unordered_map<uint32_t, double> counts;
    double total = 0.0;

    void add(uint32_t key, double amount) {
        counts[key] += amount;
        total += amount;
    }
    double get(uint32_t key) const {
        auto it = counts.find(key);
        return it == counts.end() ? 0.0 : it->second;
    }
};

// Correction channel: P(word | observation, hypothesis token) with backoff
// to P(word | observation), then P(word | hypothesis token), then uniform,
// combined with a bigram LM over the training truths. text_only mode never
// touches observations.
struct CorrectorModel {
    std::shared_ptr<const Vocabulary> vocab;
    CorrectorMode mode = CorrectorMode::audio_aware;
    CorrectorParams params;
    std::unordered_map<uint64_t, SparseRow> channel;   // (observation << 32 | hyp word)
    std::unordered_map<uint32_t, SparseRow> obs_backoff;
    std::unordered_map<uint32_t, SparseRow> hyp_backoff;
    std::vector<SparseRow> lm;  // [prev word id]; last row is sentence start
    bool trained = false;

    uint32_t sentence_start() const { return vocab->size(); }
};

struct CorrectionTriplet {
    AudioRef audio;
    Hypothesis hypothesis;
    TokenSeq truth;
};

// Builds a fresh corrector from scratch on the given triplets (replacement
// semantics; nothing carries over between training calls).
CorrectorModel corrector_train(const std::vector<CorrectionTriplet>& triplets,
                               std::shared_ptr<const Vocabulary> vocab, CorrectorMode mode,
                               const CorrectorParams& params);

// Substitution-only correction: output length equals hypothesis length.
// Position score is log P_channel + lm_weight * log P_LM(w | prev), decoded
// per spec. The beam keeps top-N last-word states (prefixes merging on
// their last word) and always retains the greedy chain, so a wider beam
// never scores below greedy.
TokenSeq corrector_correct(const CorrectorModel& model, const std::optional<AudioRef>& audio,
                           const Hypothesis& hyp, const DecodingSpec& dec, uint64_t rng_key);

// Total path score of a candidate under the corrector's scoring function.
double corrector_sequence_score(const CorrectorModel& model, const std::optional<AudioRef>& audio,
                                const Hypothesis& hyp, const TokenSeq& candidate);

// Backend interfaces the loop drives. Simulation and external-process
// implementations are interchangeable behind these.
class Recognizer {
public:
    virtual ~Recognizer() = default;
    virtual Hypothesis transcribe(const AudioRef& audio, uint64_t rng_key) const = 0;
    virtual void train(const std::vector<TrainingPair>& examples, double eta, int epochs) = 0;
    // Restore the pre-loop base model (reset_student runs). Optional.
    virtual void reset();
};

class Corrector {
public:
    virtual ~Corrector() = default;
    virtual TokenSeq correct(const std::optional<AudioRef>& audio, const Hypothesis& hyp,
                             uint64_t rng_key) const = 0;
    virtual void train(const std::vector<CorrectionTriplet>& triplets) = 0;
};

class SimRecognizer : public Recognizer {
public:
    explicit SimRecognizer(StudentModel model) : model_(std::move(model)), base_(model_) {}

    Hypothesis transcribe(const AudioRef& audio, uint64_t rng_key) const override;
    void train(const std::vector<TrainingPair>& examples, double eta, int epochs) override;
    void reset() override { model_ = base_; }

    const StudentModel& model() const { return model_; }

private:
    StudentModel model_;
    StudentModel base_;
};

class SimCorrector : public Corrector {
public:
    SimCorrector(std::shared_ptr<const Vocabulary> vocab, CorrectorMode mode,
                 CorrectorParams params, DecodingSpec decoding)
        : vocab_(std::move(vocab)), mode_(mode), params_(params), decoding_(decoding) {}

    TokenSeq correct(const std::optional<AudioRef>& audio, const Hypothesis& hyp,
                     uint64_t rng_key) const override;
    void train(const std::vector<CorrectionTriplet>& triplets) override;

    const CorrectorModel& model() const { return model_; }
    const DecodingSpec& decoding() const { return decoding_; }

private:
    std::shared_ptr<const Vocabulary> vocab_;
    CorrectorMode mode_;
    CorrectorParams params_;
    DecodingSpec decoding_;
    CorrectorModel model_;
};

}  // namespace rehear::backends
