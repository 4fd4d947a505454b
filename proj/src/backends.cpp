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

#include "rehear/backends.hpp"

#include "rehear/errors.hpp"
#include "rehear/metrics.hpp"
#include "rehear/rng.hpp"

#include <algorithm>
#include <cmath>

namespace rehear::backends {

Hypothesis Hypothesis::from_confidences(TokenSeq tokens, std::vector<double> confidences) {
    if (tokens.size() != confidences.size())
        throw ValidationError("hypothesis: token/confidence length mismatch");
    Hypothesis h;
    h.tokens = std::move(tokens);
    h.token_confidences = std::move(confidences);
    if (h.token_confidences.empty()) {
        h.confidence = 1.0;
        h.empty_convention = true;
    } else {
        double log_sum = 0.0;
        for (double c : h.token_confidences) {
            if (c <= 0.0 || c > 1.0)
                throw ValidationError("hypothesis: token confidence outside (0, 1]");
            log_sum += std::log(c);
        }
        h.confidence = std::exp(log_sum / static_cast<double>(h.token_confidences.size()));
    }
    return h;
}

StudentModel StudentModel::uniform(std::shared_ptr<const Vocabulary> vocab, double alpha,
                                   double p_del, double p_ins) {
    if (alpha <= 0.0) throw ValidationError("student: alpha must be positive");
    if (p_del < 0.0 || p_del >= 1.0 || p_ins < 0.0 || p_ins >= 1.0)
        throw ValidationError("student: p_del/p_ins must be in [0, 1)");
    StudentModel m;
    m.vocab = std::move(vocab);
    m.alpha = alpha;
    m.p_del = p_del;
    m.p_ins = p_ins;
    m.counts.assign(m.vocab->observation_count, std::vector<double>(m.vocab->size(), 0.0));
    m.row_totals.assign(m.vocab->observation_count, 0.0);
    return m;
}

double StudentModel::prob(uint32_t observation, uint32_t word) const {
    const auto& row = counts[observation];
    const double denom = row_totals[observation] + alpha * static_cast<double>(row.size());
    return (row[word] + alpha) / denom;
}

uint32_t StudentModel::argmax(uint32_t observation) const {
    const auto& row = counts[observation];
    uint32_t best = 0;
    for (uint32_t w = 1; w < row.size(); ++w) {
        if (row[w] > row[best]) best = w;
    }
    return best;
}

void StudentModel::add_count(uint32_t observation, uint32_t word, double amount) {
    counts[observation][word] += amount;
    row_totals[observation] += amount;
}

StudentModel make_base_student(std::shared_ptr<const Vocabulary> vocab,
                               const BaseStudentParams& params, uint64_t seed) {
    if (params.count_scale <= 0.0)
        throw ValidationError("base student: count_scale must be positive");
    if (params.bias_fraction < 0.0 || params.bias_fraction > 1.0)
        throw ValidationError("base student: bias_fraction must be in [0, 1]");
    if (params.bias_ratio < 0.0)
        throw ValidationError("base student: bias_ratio must be non-negative");

    StudentModel m = StudentModel::uniform(vocab, params.alpha, params.p_del, params.p_ins);
    const auto& v = *m.vocab;
    for (uint32_t w = 0; w < v.size(); ++w)
        m.add_count(v.observation_of[w], w, params.count_scale);

    const auto members = v.words_of_observation();
    Rng rng(derive_seed(seed, "base-bias"));
    for (uint32_t o = 0; o < v.observation_count; ++o) {
        // Two draws per symbol regardless of outcome keep the stream
        // aligned, so changing the knobs moves only the affected rows.
        const double gate = rng.next_unit();
        const uint32_t pick = static_cast<uint32_t>(rng.next_below(v.size()));
        if (gate >= params.bias_fraction) continue;
        bool eligible = true;
        for (uint32_t w : members[o])
            eligible &= w >= static_cast<uint32_t>(params.bias_rank_floor) &&
                        w < static_cast<uint32_t>(params.bias_rank_ceiling);
        if (!eligible) continue;
        uint32_t wrong = pick;
        while (v.observation_of[wrong] == o) wrong = (wrong + 1) % v.size();
        m.add_count(o, wrong, params.bias_ratio * m.row_totals[o]);
    }
    return m;
}

std::vector<uint32_t> student_greedy_decode(const StudentModel& model,
                                            const std::vector<uint32_t>& symbols) {
    std::vector<uint32_t> out(symbols.size());
    for (size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i] >= model.vocab->observation_count)
            throw ValidationError("unknown observation symbol: " + std::to_string(symbols[i]));
        out[i] = model.argmax(symbols[i]);
    }
    return out;
}

Hypothesis student_transcribe(const StudentModel& model, const AudioRef& audio,
                              uint64_t rng_key) {
    if (audio.is_external())
        throw ValidationError("simulation recognizer cannot read external audio: " + audio.path);
    const std::vector<uint32_t> decoded = student_greedy_decode(model, audio.symbols);

    TokenSeq tokens;
    std::vector<double> confidences;
    Rng rng(rng_key);
    for (size_t i = 0; i < decoded.size(); ++i) {
        const double conf = model.prob(audio.symbols[i], decoded[i]);
        if (rng.next_unit() < model.p_del) continue;
        tokens.tokens.push_back(model.vocab->words[decoded[i]]);
        confidences.push_back(conf);
        if (rng.next_unit() < model.p_ins) {
            tokens.tokens.push_back(model.vocab->words[decoded[i]]);
            confidences.push_back(conf / 2.0);
        }
    }
    return Hypothesis::from_confidences(std::move(tokens), std::move(confidences));
}

StudentModel student_train(StudentModel model, const std::vector<TrainingPair>& examples,
                           double eta, int epochs) {
    if (eta <= 0.0) throw ValidationError("student_train: eta must be positive");
    if (epochs < 1) throw ValidationError("student_train: epochs must be >= 1");

    for (int epoch = 0; epoch < epochs; ++epoch) {
        // Alignments are computed against the epoch-start model; increments
        // apply afterwards in example order.
        std::vector<std::tuple<uint32_t, uint32_t, double>> increments;
        for (const auto& ex : examples) {
            const std::vector<uint32_t> decoded = student_greedy_decode(model, ex.audio.symbols);
            TokenSeq decoded_tokens;
            decoded_tokens.tokens.reserve(decoded.size());
            for (uint32_t w : decoded) decoded_tokens.tokens.push_back(model.vocab->words[w]);
            const metrics::Alignment align = metrics::edit_alignment(ex.target, decoded_tokens);
            for (const auto& [ref_i, hyp_j] : align.pairs) {
                if (ref_i == metrics::Alignment::kGap || hyp_j == metrics::Alignment::kGap)
                    continue;
                const uint32_t target_id =
                    model.vocab->word_id(ex.target[static_cast<size_t>(ref_i)]);
                increments.emplace_back(ex.audio.symbols[static_cast<size_t>(hyp_j)], target_id,
                                        eta * ex.weight);
            }
        }
        for (const auto& [obs, word, amount] : increments) model.add_count(obs, word, amount);
    }
    return model;
}

std::string_view to_string(CorrectorMode mode) {
    return mode == CorrectorMode::audio_aware ? "audio_aware" : "text_only";
}

CorrectorMode corrector_mode_from_string(std::string_view name) {
    if (name == "audio_aware") return CorrectorMode::audio_aware;
    if (name == "text_only") return CorrectorMode::text_only;
    throw ValidationError("unknown corrector mode: '" + std::string(name) + "'");
}

void DecodingSpec::validate() const {
    if (strategy == Strategy::beam && beam_width < 1)
        throw ValidationError("decoding: beam width must be >= 1");
    if (strategy == Strategy::sample && temperature <= 0.0)
        throw ValidationError("decoding: temperature must be positive");
}

DecodingSpec::Strategy decoding_strategy_from_string(std::string_view name) {
    if (name == "greedy") return DecodingSpec::Strategy::greedy;
    if (name == "beam") return DecodingSpec::Strategy::beam;
    if (name == "sample") return DecodingSpec::Strategy::sample;
    throw ValidationError("unknown decoding strategy: '" + std::string(name) + "'");
}

std::string_view to_string(DecodingSpec::Strategy s) {
    switch (s) {
        case DecodingSpec::Strategy::greedy: return "greedy";
        case DecodingSpec::Strategy::beam: return "beam";
        case DecodingSpec::Strategy::sample: return "sample";
    }
    return "unknown";
}

CorrectorModel corrector_train(const std::vector<CorrectionTriplet>& triplets,
                               std::shared_ptr<const Vocabulary> vocab, CorrectorMode mode,
                               const CorrectorParams& params) {
    if (triplets.empty()) throw ValidationError("corrector_train: empty triplet list");

    CorrectorModel m;
    m.vocab = std::move(vocab);
    m.mode = mode;
    m.params = params;
    m.lm.assign(m.vocab->size() + 1, SparseRow{});

    for (const auto& triplet : triplets) {
        std::vector<uint32_t> hyp_ids(triplet.hypothesis.tokens.size());
        for (size_t j = 0; j < hyp_ids.size(); ++j)
            hyp_ids[j] = m.vocab->word_id(triplet.hypothesis.tokens[j]);
        std::vector<uint32_t> truth_ids(triplet.truth.size());
        for (size_t i = 0; i < truth_ids.size(); ++i)
            truth_ids[i] = m.vocab->word_id(triplet.truth[i]);

        const metrics::Alignment align =
            metrics::edit_alignment(triplet.truth, triplet.hypothesis.tokens);
        for (const auto& [ref_i, hyp_j] : align.pairs) {
            if (ref_i == metrics::Alignment::kGap || hyp_j == metrics::Alignment::kGap) continue;
            const uint32_t truth_word = truth_ids[static_cast<size_t>(ref_i)];
            const uint32_t hyp_word = hyp_ids[static_cast<size_t>(hyp_j)];
            if (mode == CorrectorMode::audio_aware &&
                static_cast<size_t>(hyp_j) < triplet.audio.symbols.size()) {
                const uint32_t obs = triplet.audio.symbols[static_cast<size_t>(hyp_j)];
                m.channel[(static_cast<uint64_t>(obs) << 32) | hyp_word].add(truth_word, 1.0);
                m.obs_backoff[obs].add(truth_word, 1.0);
            }
            m.hyp_backoff[hyp_word].add(truth_word, 1.0);
        }

        uint32_t prev = m.sentence_start();
        for (uint32_t t : truth_ids) {
            m.lm[prev].add(t, 1.0);
            prev = t;
        }
    }
    m.trained = true;
    return m;
}

namespace {

// Per-position channel scores, independent of the LM chain. Falls back
// (o, h) -> o -> h -> uniform on the first context with any mass.
std::vector<double> channel_log_probs(const CorrectorModel& m, std::optional<uint32_t> obs,
                                      uint32_t hyp_word) {
    const uint32_t vocab_size = m.vocab->size();
    const SparseRow* row = nullptr;
    if (obs.has_value()) {
        auto ch = m.channel.find((static_cast<uint64_t>(*obs) << 32) | hyp_word);
        if (ch != m.channel.end() && ch->second.total > 0.0) row = &ch->second;
        if (row == nullptr) {
            auto ob = m.obs_backoff.find(*obs);
            if (ob != m.obs_backoff.end() && ob->second.total > 0.0) row = &ob->second;
        }
    }
    if (row == nullptr) {
        auto hb = m.hyp_backoff.find(hyp_word);
        if (hb != m.hyp_backoff.end() && hb->second.total > 0.0) row = &hb->second;
    }

    std::vector<double> out(vocab_size);
    if (row == nullptr) {
        const double uniform = -std::log(static_cast<double>(vocab_size));
        std::fill(out.begin(), out.end(), uniform);
        return out;
    }
    const double denom = row->total + m.params.alpha * static_cast<double>(vocab_size);
    for (uint32_t w = 0; w < vocab_size; ++w)
        out[w] = std::log((row->get(w) + m.params.alpha) / denom);
    return out;
}

double lm_log_prob(const CorrectorModel& m, uint32_t prev, uint32_t word) {
    const SparseRow& row = m.lm[prev];
    const double vocab_size = static_cast<double>(m.vocab->size());
    return std::log((row.get(word) + 1.0) / (row.total + vocab_size));
}

struct PositionContext {
    std::optional<uint32_t> observation;
    uint32_t hyp_word = 0;
};

std::vector<PositionContext> build_contexts(const CorrectorModel& m,
                                            const std::optional<AudioRef>& audio,
                                            const Hypothesis& hyp) {
    if (m.mode == CorrectorMode::audio_aware && !audio.has_value())
        throw ValidationError("corrector: audio_aware mode requires audio");
    std::vector<PositionContext> contexts(hyp.tokens.size());
    for (size_t j = 0; j < hyp.tokens.size(); ++j) {
        contexts[j].hyp_word = m.vocab->word_id(hyp.tokens[j]);
        if (m.mode == CorrectorMode::audio_aware && j < audio->symbols.size())
            contexts[j].observation = audio->symbols[j];
    }
    return contexts;
}

std::vector<uint32_t> decode_greedy(const CorrectorModel& m,
                                    const std::vector<std::vector<double>>& base) {
    std::vector<uint32_t> out(base.size());
    uint32_t prev = m.sentence_start();
    for (size_t j = 0; j < base.size(); ++j) {
        uint32_t best = 0;
        double best_score = -1e300;
        for (uint32_t w = 0; w < m.vocab->size(); ++w) {
            const double s = base[j][w] + m.params.lm_weight * lm_log_prob(m, prev, w);
            if (s > best_score) {
                best_score = s;
                best = w;
            }
        }
        out[j] = best;
        prev = best;
    }
    return out;
}

struct BeamState {
    std::vector<uint32_t> tokens;
    uint32_t last;
    double score;
};

std::vector<uint32_t> decode_beam(const CorrectorModel& m,
                                  const std::vector<std::vector<double>>& base, int width) {
    const uint32_t vocab_size = m.vocab->size();
    // The greedy chain is tracked alongside the beam and re-inserted if
    // pruned, so widening the beam never returns a lower-scoring path.
    std::vector<uint32_t> greedy = decode_greedy(m, base);
    double greedy_score = 0.0;
    {
        uint32_t prev = m.sentence_start();
        for (size_t j = 0; j < greedy.size(); ++j) {
            greedy_score += base[j][greedy[j]] + m.params.lm_weight * lm_log_prob(m, prev, greedy[j]);
            prev = greedy[j];
        }
    }

    std::vector<BeamState> beam{{{}, m.sentence_start(), 0.0}};
    double greedy_prefix_score = 0.0;
    for (size_t j = 0; j < base.size(); ++j) {
        // Recombine on last word: futures depend only on it, so per word we
        // keep the best-scoring prefix (earliest parent on ties).
        std::vector<int> best_parent(vocab_size, -1);
        std::vector<double> best_score(vocab_size, -1e300);
        for (size_t p = 0; p < beam.size(); ++p) {
            for (uint32_t w = 0; w < vocab_size; ++w) {
                const double s =
                    beam[p].score + base[j][w] + m.params.lm_weight * lm_log_prob(m, beam[p].last, w);
                if (s > best_score[w]) {
                    best_score[w] = s;
                    best_parent[w] = static_cast<int>(p);
                }
            }
        }
        std::vector<uint32_t> order;
        order.reserve(vocab_size);
        for (uint32_t w = 0; w < vocab_size; ++w)
            if (best_parent[w] >= 0) order.push_back(w);
        std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (best_score[a] != best_score[b]) return best_score[a] > best_score[b];
            return a < b;
        });
        if (order.size() > static_cast<size_t>(width)) order.resize(static_cast<size_t>(width));

        greedy_prefix_score += base[j][greedy[j]] +
                               m.params.lm_weight *
                                   lm_log_prob(m, j == 0 ? m.sentence_start() : greedy[j - 1],
                                               greedy[j]);

        std::vector<BeamState> next;
        next.reserve(order.size() + 1);
        bool greedy_present = false;
        for (uint32_t w : order) {
            BeamState s;
            s.tokens = beam[static_cast<size_t>(best_parent[w])].tokens;
            s.tokens.push_back(w);
            s.last = w;
            s.score = best_score[w];
            if (!greedy_present && s.tokens.size() == j + 1 &&
                std::equal(s.tokens.begin(), s.tokens.end(), greedy.begin()))
                greedy_present = true;
            next.push_back(std::move(s));
        }
        if (!greedy_present) {
            BeamState s;
            s.tokens.assign(greedy.begin(), greedy.begin() + static_cast<long>(j + 1));
            s.last = greedy[j];
            s.score = greedy_prefix_score;
            next.push_back(std::move(s));
        }
        beam = std::move(next);
    }

    const BeamState* best = &beam.front();
    for (const auto& s : beam)
        if (s.score > best->score) best = &s;
    if (greedy_score > best->score) return greedy;
    return best->tokens;
}

std::vector<uint32_t> decode_sample(const CorrectorModel& m,
                                    const std::vector<std::vector<double>>& base,
                                    double temperature, uint64_t rng_key) {
    const uint32_t vocab_size = m.vocab->size();
    Rng rng(rng_key);
    std::vector<uint32_t> out(base.size());
    uint32_t prev = m.sentence_start();
    std::vector<double> scores(vocab_size);
    for (size_t j = 0; j < base.size(); ++j) {
        double max_score = -1e300;
        for (uint32_t w = 0; w < vocab_size; ++w) {
            scores[w] = (base[j][w] + m.params.lm_weight * lm_log_prob(m, prev, w)) / temperature;
            max_score = std::max(max_score, scores[w]);
        }
        double total = 0.0;
        for (uint32_t w = 0; w < vocab_size; ++w) {
            scores[w] = std::exp(scores[w] - max_score);
            total += scores[w];
        }
        const double u = rng.next_unit() * total;
        double acc = 0.0;
        uint32_t chosen = vocab_size - 1;
        for (uint32_t w = 0; w < vocab_size; ++w) {
            acc += scores[w];
            if (u < acc) {
                chosen = w;
                break;
            }
        }
        out[j] = chosen;
        prev = chosen;
    }
    return out;
}

}  // namespace

TokenSeq corrector_correct(const CorrectorModel& model, const std::optional<AudioRef>& audio,
                           const Hypothesis& hyp, const DecodingSpec& dec, uint64_t rng_key) {
    if (!model.trained) throw ValidationError("corrector: model is not trained");
    dec.validate();
    const auto contexts = build_contexts(model, audio, hyp);

    std::vector<std::vector<double>> base(contexts.size());
    for (size_t j = 0; j < contexts.size(); ++j)
        base[j] = channel_log_probs(model, contexts[j].observation, contexts[j].hyp_word);

    std::vector<uint32_t> ids;
    switch (dec.strategy) {
        case DecodingSpec::Strategy::greedy: ids = decode_greedy(model, base); break;
        case DecodingSpec::Strategy::beam: ids = decode_beam(model, base, dec.beam_width); break;
        case DecodingSpec::Strategy::sample:
            ids = decode_sample(model, base, dec.temperature, rng_key);
            break;
    }

    TokenSeq out;
    out.tokens.reserve(ids.size());
    for (uint32_t w : ids) out.tokens.push_back(model.vocab->words[w]);
    return out;
}

double corrector_sequence_score(const CorrectorModel& model, const std::optional<AudioRef>& audio,
                                const Hypothesis& hyp, const TokenSeq& candidate) {
    if (candidate.size() != hyp.tokens.size())
        throw ValidationError("sequence score: candidate length must match hypothesis");
    const auto contexts = build_contexts(model, audio, hyp);
    double score = 0.0;
    uint32_t prev = model.sentence_start();
    for (size_t j = 0; j < contexts.size(); ++j) {
        const uint32_t w = model.vocab->word_id(candidate[j]);
        const auto base = channel_log_probs(model, contexts[j].observation, contexts[j].hyp_word);
        score += base[w] + model.params.lm_weight * lm_log_prob(model, prev, w);
        prev = w;
    }
    return score;
}

void Recognizer::reset() {
    throw ValidationError("this recognizer backend does not support reset_student");
}

Hypothesis SimRecognizer::transcribe(const AudioRef& audio, uint64_t rng_key) const {
    return student_transcribe(model_, audio, rng_key);
}

void SimRecognizer::train(const std::vector<TrainingPair>& examples, double eta, int epochs) {
    model_ = student_train(std::move(model_), examples, eta, epochs);
}

TokenSeq SimCorrector::correct(const std::optional<AudioRef>& audio, const Hypothesis& hyp,
                               uint64_t rng_key) const {
    // text_only scoring never dereferences audio; passing it is harmless.
    return corrector_correct(model_, audio, hyp, decoding_, rng_key);
}

void SimCorrector::train(const std::vector<CorrectionTriplet>& triplets) {
    model_ = corrector_train(triplets, vocab_, mode_, params_);
}

}  // namespace rehear::backends
