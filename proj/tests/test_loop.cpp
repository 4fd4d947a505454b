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

#include <doctest.h>

#include <filesystem>

using namespace rehear;
using namespace rehear::loop;

namespace {

corpus::SynthCorpus small_corpus(uint64_t seed = 5) {
    corpus::SynthConfig cfg;
    cfg.vocab_size = 60;
    cfg.homophone_class_count = 10;
    cfg.labeled_utterances = 30;
    cfg.unlabeled_utterances = 90;
    cfg.validation_utterances = 30;
    cfg.test_utterances = 40;
    cfg.seed = seed;
    return corpus::synth_corpus(cfg);
}

struct SimBundle {
    std::shared_ptr<const corpus::Vocabulary> vocab;
    std::unique_ptr<backends::SimRecognizer> recognizer;
    std::unique_ptr<backends::SimCorrector> corrector;
    Backends handles;
};

SimBundle make_bundle(const corpus::SynthCorpus& c, const LoopConfig& cfg) {
    SimBundle b;
    b.vocab = std::make_shared<const corpus::Vocabulary>(c.vocab);
    backends::BaseStudentParams params;
    b.recognizer = std::make_unique<backends::SimRecognizer>(
        backends::make_base_student(b.vocab, params, c.config.seed));
    b.corrector = std::make_unique<backends::SimCorrector>(
        b.vocab, cfg.corrector_mode, backends::CorrectorParams{}, cfg.decoding);
    b.handles.recognizer = b.recognizer.get();
    b.handles.corrector = b.corrector.get();
    return b;
}

RunManifest manifest_with_val_wers(const std::vector<double>& wers) {
    RunManifest m;
    IterationRecord base;
    base.t = 0;
    m.iterations.push_back(base);
    for (size_t i = 0; i < wers.size(); ++i) {
        IterationRecord rec;
        rec.t = static_cast<int>(i) + 1;
        rec.wer_validation.value = wers[i];
        m.iterations.push_back(rec);
    }
    return m;
}

}  // namespace

TEST_CASE("decay_schedule follows the halving/decrement rule") {
    LoopConfig cfg;
    cfg.initial_eta = 1.0;
    cfg.initial_epochs = 5;
    cfg.decay = true;
    CHECK(decay_schedule(1, cfg).eta == 1.0);
    CHECK(decay_schedule(1, cfg).epochs == 5);
    CHECK(decay_schedule(3, cfg).eta == doctest::Approx(0.25));
    CHECK(decay_schedule(3, cfg).epochs == 3);

    cfg.initial_epochs = 2;
    CHECK(decay_schedule(5, cfg).epochs == 1);  // floored

    cfg.decay = false;
    cfg.initial_epochs = 5;
    CHECK(decay_schedule(4, cfg).eta == 1.0);
    CHECK(decay_schedule(4, cfg).epochs == 5);

    // With decay on, eta strictly decreases and epochs never increase.
    cfg.decay = true;
    for (int t = 2; t <= 8; ++t) {
        CHECK(decay_schedule(t, cfg).eta < decay_schedule(t - 1, cfg).eta);
        CHECK(decay_schedule(t, cfg).epochs <= decay_schedule(t - 1, cfg).epochs);
    }
}

TEST_CASE("should_stop honors max iterations and saturation") {
    LoopConfig cfg;
    cfg.max_iterations = 3;
    cfg.saturation_epsilon = 0.05;

    auto m = manifest_with_val_wers({8.9, 6.3, 6.4});
    CHECK(should_stop(m, cfg).stop);
    CHECK(should_stop(m, cfg).reason == "max_iterations");

    m = manifest_with_val_wers({8.00, 7.99});
    CHECK(should_stop(m, cfg).stop);
    CHECK(should_stop(m, cfg).reason == "saturated");

    m = manifest_with_val_wers({8.00, 7.50});
    CHECK_FALSE(should_stop(m, cfg).stop);

    // Saturation disabled: only T stops the loop.
    cfg.saturation_epsilon.reset();
    m = manifest_with_val_wers({8.00, 8.00});
    CHECK_FALSE(should_stop(m, cfg).stop);

    CHECK_THROWS_AS(should_stop(manifest_with_val_wers({}), cfg), ValidationError);
}

TEST_CASE("select_checkpoint picks the lowest validation WER, earliest on ties") {
    CHECK(select_checkpoint(manifest_with_val_wers({8.9, 6.3, 6.4})) == 2);
    CHECK(select_checkpoint(manifest_with_val_wers({6.4, 6.4})) == 1);
    CHECK(select_checkpoint(manifest_with_val_wers({7.7})) == 1);
}

TEST_CASE("corpus_wer aggregates counts and flags degenerate references") {
    std::vector<textnorm::TokenSeq> refs{textnorm::tokenize("a b c"), textnorm::tokenize("d e")};
    std::vector<textnorm::TokenSeq> hyps{textnorm::tokenize("a x c"), textnorm::tokenize("d e")};
    const SplitWer w = corpus_wer(refs, hyps);
    CHECK(w.value == doctest::Approx(1.0 / 5.0));
    CHECK_FALSE(w.degenerate);

    refs.push_back(textnorm::TokenSeq{});
    hyps.push_back(textnorm::tokenize("ghost tokens"));
    const SplitWer d = corpus_wer(refs, hyps);
    CHECK(d.degenerate);
    CHECK(d.value == doctest::Approx(3.0 / 6.0));
}

TEST_CASE("method aliases parse") {
    CHECK(method_from_string("rehear+rule") == Method::rehear_rule);
    CHECK(method_from_string("ipl+rule") == Method::ipl_rule);
    CHECK(method_from_string("rehear_model") == Method::rehear_model);
    CHECK_THROWS_AS(method_from_string("nope"), ValidationError);
}

TEST_CASE("run_iteration: ISL trains on labeled data only") {
    const auto c = small_corpus();
    LoopConfig cfg;
    cfg.method = Method::isl;
    cfg.seed = 11;
    auto bundle = make_bundle(c, cfg);
    LoopEnv env;
    env.corpus = &c;

    const IterationState state = run_iteration(1, cfg, env, bundle.handles);
    CHECK(state.labeled_triplets.size() == c.splits.labeled.size());
    CHECK(state.unlabeled_hypotheses.size() == c.splits.unlabeled.size());
    CHECK(state.unlabeled_corrections.size() == c.splits.unlabeled.size());
    CHECK(state.pseudo_examples.empty());
    CHECK(state.filter.empty());
    // No corrector was ever trained.
    CHECK_FALSE(bundle.corrector->model().trained);
}

TEST_CASE("run_iteration: IPL uses raw hypotheses as pseudo-labels") {
    const auto c = small_corpus();
    LoopConfig cfg;
    cfg.method = Method::ipl;
    cfg.seed = 11;
    auto bundle = make_bundle(c, cfg);
    LoopEnv env;
    env.corpus = &c;

    const IterationState state = run_iteration(1, cfg, env, bundle.handles);
    CHECK(state.pseudo_examples.size() == c.splits.unlabeled.size());
    for (size_t i = 0; i < state.pseudo_examples.size(); ++i)
        CHECK(state.pseudo_examples[i].target == state.unlabeled_hypotheses[i].tokens);
    CHECK(state.filter.at("ok") == static_cast<int>(c.splits.unlabeled.size()));
    CHECK_FALSE(bundle.corrector->model().trained);
}

namespace {

// Corrector double that always emits one token repeated; drives the
// repetition-loop rejection path end to end.
class RepeatingCorrector : public backends::Corrector {
public:
    textnorm::TokenSeq correct(const std::optional<corpus::AudioRef>&,
                               const backends::Hypothesis& hyp, uint64_t) const override {
        textnorm::TokenSeq out;
        out.tokens.assign(hyp.tokens.size(), "loop");
        return out;
    }
    void train(const std::vector<backends::CorrectionTriplet>&) override {}
};

}  // namespace

TEST_CASE("run_iteration: rehear_rule drops degenerate corrections with a reason") {
    const auto c = small_corpus();
    LoopConfig cfg;
    cfg.method = Method::rehear_rule;
    cfg.seed = 11;
    auto bundle = make_bundle(c, cfg);
    RepeatingCorrector repeating;
    bundle.handles.corrector = &repeating;
    LoopEnv env;
    env.corpus = &c;

    const IterationState state = run_iteration(1, cfg, env, bundle.handles);
    CHECK(state.pseudo_examples.empty());
    // Every rejection is attributed to the first violated rule; a repeated
    // single token diverges from the hypothesis in characters first, so cer
    // or length fires for most items (the exact unique-ratio case is pinned
    // in the filter unit tests).
    int rejected = 0;
    for (const auto& [reason, count] : state.filter)
        if (reason != "ok") rejected += count;
    CHECK(rejected == static_cast<int>(c.splits.unlabeled.size()));
}

TEST_CASE("run_iteration: rehear produces corrections and trains on them") {
    const auto c = small_corpus();
    LoopConfig cfg;
    cfg.method = Method::rehear;
    cfg.seed = 11;
    auto bundle = make_bundle(c, cfg);
    LoopEnv env;
    env.corpus = &c;

    const IterationState state = run_iteration(1, cfg, env, bundle.handles);
    CHECK(bundle.corrector->model().trained);
    CHECK(state.pseudo_examples.size() == c.splits.unlabeled.size());
    CHECK(state.record.wer_validation.value >= 0.0);
    CHECK(state.record.wer_unlabeled.value >= 0.0);
}

TEST_CASE("run_experiment is deterministic across reruns and worker counts") {
    const auto c = small_corpus();
    LoopConfig cfg;
    cfg.method = Method::rehear;
    cfg.max_iterations = 2;
    cfg.seed = 21;

    std::string first;
    for (const int workers : {1, 4}) {
        auto bundle = make_bundle(c, cfg);
        LoopEnv env;
        env.corpus = &c;
        env.workers = workers;
        const RunManifest m = run_experiment(cfg, env, bundle.handles, "testhash");
        const std::string bytes = manifest_to_string(m);
        if (first.empty()) first = bytes;
        CHECK(bytes == first);
    }
}

TEST_CASE("run_experiment records iterations, checkpoint, and stop reason") {
    const auto c = small_corpus();
    LoopConfig cfg;
    cfg.method = Method::ipl_rule;
    cfg.max_iterations = 1;
    cfg.seed = 3;
    auto bundle = make_bundle(c, cfg);
    LoopEnv env;
    env.corpus = &c;

    const auto dir = std::filesystem::temp_directory_path() / "rehear_loop_manifest";
    std::filesystem::remove_all(dir);
    const RunManifest m = run_experiment(cfg, env, bundle.handles, "abc123", dir);
    CHECK(m.iterations.size() == 2);  // t = 0 baseline + one iteration
    CHECK(m.iterations[0].t == 0);
    CHECK(m.iterations[1].t == 1);
    CHECK(m.selected_checkpoint == 1);
    CHECK(m.stop_reason == "max_iterations");
    CHECK(m.method == "ipl_rule");
    CHECK(m.corpus == corpus::corpus_fingerprint(c));

    const RunManifest loaded = load_manifest(dir / "manifest.json");
    CHECK(manifest_to_string(loaded) == manifest_to_string(m));
    std::filesystem::remove_all(dir);
}

TEST_CASE("iteration datasets satisfy the size identities") {
    const auto c = small_corpus();
    for (const Method method : {Method::ipl, Method::ipl_rule, Method::rehear,
                                Method::rehear_rule, Method::rehear_model}) {
        LoopConfig cfg;
        cfg.method = method;
        cfg.seed = 13;
        auto bundle = make_bundle(c, cfg);
        LoopEnv env;
        env.corpus = &c;
        const IterationState state = run_iteration(1, cfg, env, bundle.handles);
        CHECK(state.labeled_triplets.size() == c.splits.labeled.size());
        CHECK(state.unlabeled_hypotheses.size() == c.splits.unlabeled.size());
        CHECK(state.unlabeled_corrections.size() == c.splits.unlabeled.size());
        CHECK(state.pseudo_examples.size() <= c.splits.unlabeled.size());
        int decisions = 0;
        for (const auto& [reason, count] : state.filter)
            if (reason != "model_filter_degenerate") decisions += count;
        CHECK(decisions == static_cast<int>(c.splits.unlabeled.size()));
    }
}

TEST_CASE("rejected_policy keep_hypothesis falls back to the raw hypothesis") {
    const auto c = small_corpus();
    LoopConfig cfg;
    cfg.method = Method::rehear_rule;
    cfg.seed = 11;
    cfg.rejected_policy = LoopConfig::RejectedPolicy::keep_hypothesis;
    auto bundle = make_bundle(c, cfg);
    RepeatingCorrector repeating;
    bundle.handles.corrector = &repeating;
    LoopEnv env;
    env.corpus = &c;

    const IterationState state = run_iteration(1, cfg, env, bundle.handles);
    CHECK(state.pseudo_examples.size() == c.splits.unlabeled.size());
    for (size_t i = 0; i < state.pseudo_examples.size(); ++i)
        CHECK(state.pseudo_examples[i].target == state.unlabeled_hypotheses[i].tokens);
}
