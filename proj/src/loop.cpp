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

#include "rehear/loop.hpp"

#include "rehear/errors.hpp"
#include "rehear/metrics.hpp"
#include "rehear/parallel.hpp"
#include "rehear/rng.hpp"

#include <algorithm>
#include <cmath>

namespace rehear::loop {

using backends::CorrectionTriplet;
using backends::Hypothesis;
using backends::TrainingPair;
using textnorm::TokenSeq;

Method method_from_string(std::string_view name) {
    if (name == "isl") return Method::isl;
    if (name == "ipl") return Method::ipl;
    if (name == "ipl_rule" || name == "ipl+rule") return Method::ipl_rule;
    if (name == "rehear") return Method::rehear;
    if (name == "rehear_rule" || name == "rehear+rule") return Method::rehear_rule;
    if (name == "rehear_model" || name == "rehear+model") return Method::rehear_model;
    throw ValidationError("unknown method: '" + std::string(name) + "'");
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::isl: return "isl";
        case Method::ipl: return "ipl";
        case Method::ipl_rule: return "ipl_rule";
        case Method::rehear: return "rehear";
        case Method::rehear_rule: return "rehear_rule";
        case Method::rehear_model: return "rehear_model";
    }
    return "unknown";
}

void LoopConfig::validate() const {
    if (max_iterations < 1) throw ValidationError("loop: max_iterations must be >= 1");
    if (initial_eta <= 0.0) throw ValidationError("loop: initial_eta must be positive");
    if (initial_epochs < 1) throw ValidationError("loop: initial_epochs must be >= 1");
    if (pseudo_weight < 0.0) throw ValidationError("loop: pseudo_weight must be >= 0");
    decoding.validate();
}

Schedule decay_schedule(int t, const LoopConfig& cfg) {
    if (t < 1) throw ValidationError("decay_schedule: t must be >= 1");
    if (!cfg.decay) return {cfg.initial_eta, cfg.initial_epochs};
    return {cfg.initial_eta / std::pow(2.0, t - 1), std::max(1, cfg.initial_epochs - (t - 1))};
}

SplitWer corpus_wer(const std::vector<TokenSeq>& refs, const std::vector<TokenSeq>& hyps) {
    if (refs.size() != hyps.size()) throw ValidationError("corpus_wer: ref/hyp count mismatch");
    long long distance = 0;
    long long ref_len = 0;
    SplitWer out;
    for (size_t i = 0; i < refs.size(); ++i) {
        if (refs[i].empty()) {
            // Degenerate convention: |hyp| over a reference length of 1.
            out.degenerate = true;
            distance += static_cast<long long>(hyps[i].size());
            ref_len += 1;
            continue;
        }
        distance += metrics::edit_alignment(refs[i], hyps[i]).distance();
        ref_len += static_cast<long long>(refs[i].size());
    }
    out.value = ref_len == 0 ? 0.0 : static_cast<double>(distance) / static_cast<double>(ref_len);
    return out;
}

namespace {

bool uses_corrector(Method m) {
    return m == Method::rehear || m == Method::rehear_rule || m == Method::rehear_model;
}

TokenSeq normalized_tokens(const std::string& transcript,
                           const textnorm::NormalizationConfig& norm) {
    return textnorm::tokenize(textnorm::normalize(transcript, norm));
}

// Evaluates the recognizer on a split: transcribe every segment with a
// per-item seed, then score against the given references. Evaluation seeds
// do not depend on the iteration, so the per-iteration WER series reflects
// model movement rather than resampled transcription noise.
template <typename SegmentList, typename RefFn>
SplitWer evaluate_split(const SegmentList& segments, const RefFn& ref_of,
                        const backends::Recognizer& recognizer,
                        const textnorm::NormalizationConfig& norm, uint64_t seed,
                        std::string_view stage, int workers) {
    std::vector<TokenSeq> refs(segments.size());
    std::vector<TokenSeq> hyps(segments.size());
    parallel_for(segments.size(), workers, [&](size_t i) {
        refs[i] = normalized_tokens(ref_of(segments[i]), norm);
        const uint64_t key = derive_seed(seed, stage, 0, i);
        hyps[i] = recognizer.transcribe(segments[i].audio, key).tokens;
    });
    return corpus_wer(refs, hyps);
}

void count_reason(FilterStats& stats, filters::FilterReason reason) {
    ++stats[std::string(filters::to_string(reason))];
}

}  // namespace

IterationState run_iteration(int t, const LoopConfig& cfg, const LoopEnv& env,
                             const Backends& backends) {
    cfg.validate();
    if (env.corpus == nullptr) throw ValidationError("run_iteration: corpus not set");
    if (backends.recognizer == nullptr) throw ValidationError("run_iteration: recognizer not set");
    if (uses_corrector(cfg.method) && backends.corrector == nullptr)
        throw ValidationError("run_iteration: method needs a corrector backend");

    const auto& corpus = *env.corpus;
    const auto& labeled = corpus.splits.labeled;
    const auto& unlabeled = corpus.splits.unlabeled;
    auto& recognizer = *backends.recognizer;

    IterationState state;
    state.t = t;

    // ASR inference over the labeled set: (audio, truth, hypothesis).
    state.labeled_triplets.resize(labeled.size());
    parallel_for(labeled.size(), env.workers, [&](size_t i) {
        const uint64_t key =
            derive_seed(cfg.seed, "transcribe-labeled", static_cast<uint64_t>(t), i);
        CorrectionTriplet triplet;
        triplet.audio = labeled[i].audio;
        triplet.hypothesis = recognizer.transcribe(labeled[i].audio, key);
        triplet.truth = normalized_tokens(labeled[i].transcript, env.normalization);
        state.labeled_triplets[i] = std::move(triplet);
    });

    // ASR inference over the unlabeled set.
    state.unlabeled_hypotheses.resize(unlabeled.size());
    parallel_for(unlabeled.size(), env.workers, [&](size_t i) {
        const uint64_t key =
            derive_seed(cfg.seed, "transcribe-unlabeled", static_cast<uint64_t>(t), i);
        state.unlabeled_hypotheses[i] = recognizer.transcribe(unlabeled[i].audio, key);
    });

    // Corrector training and inference (rehear methods only); baselines use
    // the raw hypotheses as their candidate pseudo-labels.
    state.unlabeled_corrections.resize(unlabeled.size());
    if (uses_corrector(cfg.method)) {
        backends.corrector->train(state.labeled_triplets);
        parallel_for(unlabeled.size(), env.workers, [&](size_t i) {
            const uint64_t key = derive_seed(cfg.seed, "correct", static_cast<uint64_t>(t), i);
            std::optional<corpus::AudioRef> audio;
            if (cfg.corrector_mode == backends::CorrectorMode::audio_aware)
                audio = unlabeled[i].audio;
            state.unlabeled_corrections[i] =
                backends.corrector->correct(audio, state.unlabeled_hypotheses[i], key);
        });
    } else {
        for (size_t i = 0; i < unlabeled.size(); ++i)
            state.unlabeled_corrections[i] = state.unlabeled_hypotheses[i].tokens;
    }

    // Filtering. Every unlabeled item gets exactly one decision.
    std::vector<bool> accepted(unlabeled.size(), true);
    switch (cfg.method) {
        case Method::isl: {
            // Stages (b)-(d) are no-ops; nothing is pseudo-labeled.
            std::fill(accepted.begin(), accepted.end(), false);
            break;
        }
        case Method::ipl: {
            for (size_t i = 0; i < unlabeled.size(); ++i)
                count_reason(state.filter, filters::FilterReason::ok);
            break;
        }
        case Method::ipl_rule: {
            for (size_t i = 0; i < unlabeled.size(); ++i) {
                const auto decision = filters::ipl_filter(state.unlabeled_hypotheses[i],
                                                          unlabeled[i].duration());
                accepted[i] = decision.accept;
                count_reason(state.filter, decision.reason);
            }
            break;
        }
        case Method::rehear: {
            for (size_t i = 0; i < unlabeled.size(); ++i)
                count_reason(state.filter, filters::FilterReason::ok);
            break;
        }
        case Method::rehear_rule: {
            for (size_t i = 0; i < unlabeled.size(); ++i) {
                const auto decision = filters::rule_filter_correction(
                    state.unlabeled_hypotheses[i].tokens, state.unlabeled_corrections[i]);
                accepted[i] = decision.accept;
                count_reason(state.filter, decision.reason);
            }
            break;
        }
        case Method::rehear_model: {
            // The learned filter trains on labeled-set corrections, where
            // WER improvement is observable.
            std::vector<TokenSeq> labeled_corrections(labeled.size());
            parallel_for(labeled.size(), env.workers, [&](size_t i) {
                const uint64_t key =
                    derive_seed(cfg.seed, "correct-labeled", static_cast<uint64_t>(t), i);
                std::optional<corpus::AudioRef> audio;
                if (cfg.corrector_mode == backends::CorrectorMode::audio_aware)
                    audio = labeled[i].audio;
                labeled_corrections[i] = backends.corrector->correct(
                    audio, state.labeled_triplets[i].hypothesis, key);
            });
            std::vector<filters::ModelFilterExample> examples(labeled.size());
            for (size_t i = 0; i < labeled.size(); ++i) {
                examples[i] = {state.labeled_triplets[i].hypothesis.tokens,
                               labeled_corrections[i], state.labeled_triplets[i].truth,
                               state.labeled_triplets[i].hypothesis.confidence};
            }
            try {
                const filters::ModelFilter filter = filters::model_filter_train(
                    examples, derive_seed(cfg.seed, "model-filter", static_cast<uint64_t>(t)));
                for (size_t i = 0; i < unlabeled.size(); ++i) {
                    const auto decision = filters::model_filter_apply(
                        filter, state.unlabeled_hypotheses[i].tokens,
                        state.unlabeled_corrections[i],
                        state.unlabeled_hypotheses[i].confidence);
                    accepted[i] = decision.accept;
                    count_reason(state.filter, decision.reason);
                }
            } catch (const ValidationError&) {
                // Single-class labels: every labeled correction helped (or
                // none did), so there is nothing to discriminate. Accept all
                // and record the fallback.
                state.filter["model_filter_degenerate"] = 1;
                for (size_t i = 0; i < unlabeled.size(); ++i)
                    count_reason(state.filter, filters::FilterReason::ok);
            }
            break;
        }
    }

    for (size_t i = 0; i < unlabeled.size(); ++i) {
        if (accepted[i]) {
            state.pseudo_examples.push_back(
                {unlabeled[i].audio, state.unlabeled_corrections[i], cfg.pseudo_weight});
        } else if (cfg.method != Method::isl &&
                   cfg.rejected_policy == LoopConfig::RejectedPolicy::keep_hypothesis) {
            state.pseudo_examples.push_back(
                {unlabeled[i].audio, state.unlabeled_hypotheses[i].tokens, cfg.pseudo_weight});
        }
    }

    // ASR training on labeled truth plus the filtered pseudo-labels.
    const Schedule schedule = decay_schedule(t, cfg);
    std::vector<TrainingPair> training;
    training.reserve(labeled.size() + state.pseudo_examples.size());
    for (size_t i = 0; i < labeled.size(); ++i)
        training.push_back({labeled[i].audio, state.labeled_triplets[i].truth, 1.0});
    training.insert(training.end(), state.pseudo_examples.begin(), state.pseudo_examples.end());
    if (cfg.reset_student) recognizer.reset();
    recognizer.train(training, schedule.eta, schedule.epochs);

    // Evaluate the updated model. Unlabeled references come through the
    // evaluation-only accessor; nothing above this line reads them.
    state.record.t = t;
    state.record.eta = schedule.eta;
    state.record.epochs = schedule.epochs;
    state.record.filter = state.filter;
    state.record.wer_validation = evaluate_split(
        corpus.splits.validation, [](const corpus::Segment& s) { return s.transcript; },
        recognizer, env.normalization, cfg.seed, "eval-validation", env.workers);
    state.record.wer_test = evaluate_split(
        corpus.splits.test, [](const corpus::Segment& s) { return s.transcript; }, recognizer,
        env.normalization, cfg.seed, "eval-test", env.workers);
    state.record.wer_unlabeled = evaluate_split(
        corpus.splits.unlabeled,
        [](const corpus::UnlabeledSegment& s) { return s.hidden_reference.for_evaluation_only(); },
        recognizer, env.normalization, cfg.seed, "eval-unlabeled", env.workers);
    return state;
}

StopDecision should_stop(const RunManifest& manifest, const LoopConfig& cfg) {
    std::vector<const IterationRecord*> trained;
    for (const auto& rec : manifest.iterations)
        if (rec.t >= 1) trained.push_back(&rec);
    if (trained.empty())
        throw ValidationError("should_stop: needs at least one completed iteration");

    if (trained.back()->t >= cfg.max_iterations) return {true, "max_iterations"};
    if (cfg.saturation_epsilon.has_value() && trained.size() >= 2) {
        double best_before = 1e300;
        for (size_t i = 0; i + 1 < trained.size(); ++i)
            best_before = std::min(best_before, trained[i]->wer_validation.value);
        const double best_now = std::min(best_before, trained.back()->wer_validation.value);
        if (best_before - best_now <= *cfg.saturation_epsilon) return {true, "saturated"};
    }
    return {false, ""};
}

int select_checkpoint(const RunManifest& manifest) {
    int best_t = 0;
    double best_wer = 1e300;
    for (const auto& rec : manifest.iterations) {
        if (rec.t < 1) continue;
        if (rec.wer_validation.value < best_wer) {
            best_wer = rec.wer_validation.value;
            best_t = rec.t;
        }
    }
    if (best_t == 0) throw ValidationError("select_checkpoint: no trained iterations");
    return best_t;
}

RunManifest run_experiment(const LoopConfig& cfg, const LoopEnv& env, const Backends& backends,
                           const std::string& config_hash,
                           const std::optional<std::filesystem::path>& run_dir) {
    cfg.validate();
    if (env.corpus == nullptr) throw ValidationError("run_experiment: corpus not set");

    RunManifest manifest;
    manifest.config_hash = config_hash;
    manifest.corpus = corpus::corpus_fingerprint(*env.corpus);
    manifest.method = std::string(to_string(cfg.method));
    manifest.seed = cfg.seed;

    auto flush = [&] {
        if (run_dir.has_value()) {
            std::filesystem::create_directories(*run_dir);
            save_manifest(manifest, *run_dir / "manifest.json");
        }
    };

    try {
        // Baseline evaluation of the untouched recognizer.
        IterationRecord base;
        base.t = 0;
        base.wer_validation = evaluate_split(
            env.corpus->splits.validation, [](const corpus::Segment& s) { return s.transcript; },
            *backends.recognizer, env.normalization, cfg.seed, "eval-validation", env.workers);
        base.wer_test = evaluate_split(
            env.corpus->splits.test, [](const corpus::Segment& s) { return s.transcript; },
            *backends.recognizer, env.normalization, cfg.seed, "eval-test", env.workers);
        base.wer_unlabeled =
            evaluate_split(env.corpus->splits.unlabeled,
                           [](const corpus::UnlabeledSegment& s) {
                               return s.hidden_reference.for_evaluation_only();
                           },
                           *backends.recognizer, env.normalization, cfg.seed, "eval-unlabeled",
                           env.workers);
        manifest.iterations.push_back(std::move(base));

        for (int t = 1; t <= cfg.max_iterations; ++t) {
            IterationState state = run_iteration(t, cfg, env, backends);
            manifest.iterations.push_back(state.record);
            const StopDecision stop = should_stop(manifest, cfg);
            if (stop.stop) {
                manifest.stop_reason = stop.reason;
                break;
            }
        }
        manifest.selected_checkpoint = select_checkpoint(manifest);
    } catch (...) {
        manifest.stop_reason = "error";
        flush();
        throw;
    }
    flush();
    return manifest;
}

}  // namespace rehear::loop
