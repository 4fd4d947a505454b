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

#include "rehear/backends.hpp"
#include "rehear/corpus.hpp"
#include "rehear/filters.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rehear::loop {

enum class Method { isl, ipl, ipl_rule, rehear, rehear_rule, rehear_model };

// Accepts the canonical names plus the "+" aliases (ipl+rule, rehear+rule,
// rehear+model).
Method method_from_string(std::string_view name);
std::string_view to_string(Method m);

struct LoopConfig {
    Method method = Method::rehear;
    int max_iterations = 3;
    bool decay = false;
    double initial_eta = 2.5;
    int initial_epochs = 5;
    backends::CorrectorMode corrector_mode = backends::CorrectorMode::audio_aware;
    backends::DecodingSpec decoding{backends::DecodingSpec::Strategy::beam, 5, 0.7};
    // Absent: run to max_iterations without a saturation check.
    std::optional<double> saturation_epsilon;
    bool reset_student = false;
    // What happens to unlabeled items whose correction the filter rejects.
    enum class RejectedPolicy { drop, keep_hypothesis };
    RejectedPolicy rejected_policy = RejectedPolicy::drop;
    double pseudo_weight = 1.0;
    uint64_t seed = 1;

    void validate() const;
};

struct Schedule {
    double eta = 0.0;
    int epochs = 0;
};

// Decay on: eta halves and epochs decrement (floored at 1) per iteration.
Schedule decay_schedule(int t, const LoopConfig& cfg);

// Reason string -> count. Keys are FilterReason names plus
// "model_filter_degenerate" when the learned filter could not be trained
// and the iteration fell back to accepting every correction.
using FilterStats = std::map<std::string, int>;

struct SplitWer {
    double value = 0.0;
    bool degenerate = false;  // some reference in the split was empty
};

struct IterationRecord {
    int t = 0;
    double eta = 0.0;
    int epochs = 0;
    SplitWer wer_validation;
    SplitWer wer_test;
    SplitWer wer_unlabeled;
    FilterStats filter;
};

struct RunManifest {
    std::string config_hash;
    std::string corpus;
    std::string method;
    uint64_t seed = 0;
    std::vector<IterationRecord> iterations;  // t = 0 baseline, then 1..T
    int selected_checkpoint = 0;              // over trained iterations (t >= 1)
    std::string stop_reason;
};

// Materialized datasets of one iteration, kept around for inspection.
struct IterationState {
    int t = 0;
    std::vector<backends::CorrectionTriplet> labeled_triplets;  // one per labeled segment
    std::vector<backends::Hypothesis> unlabeled_hypotheses;     // one per unlabeled segment
    std::vector<textnorm::TokenSeq> unlabeled_corrections;      // one per unlabeled segment
    std::vector<backends::TrainingPair> pseudo_examples;        // the filtered subset
    FilterStats filter;
    IterationRecord record;
};

struct Backends {
    backends::Recognizer* recognizer = nullptr;
    backends::Corrector* corrector = nullptr;  // required for rehear* methods
};

struct LoopEnv {
    const corpus::SynthCorpus* corpus = nullptr;
    textnorm::NormalizationConfig normalization = textnorm::NormalizationConfig::defaults();
    int workers = 1;
};

// One full cycle: recognizer inference on labeled + unlabeled, corrector
// training and inference (rehear methods), filtering per method, recognizer
// training, then evaluation on validation/test/unlabeled with the updated
// model.
IterationState run_iteration(int t, const LoopConfig& cfg, const LoopEnv& env,
                             const Backends& backends);

struct StopDecision {
    bool stop = false;
    std::string reason;
};

StopDecision should_stop(const RunManifest& manifest, const LoopConfig& cfg);

// Lowest validation WER among trained iterations; ties go to the earliest.
int select_checkpoint(const RunManifest& manifest);

// Runs iterations until should_stop, recording a t=0 baseline evaluation
// first. The backends retain their final model states. When run_dir is
// given the manifest is written there (also on error, with what was
// completed so far).
RunManifest run_experiment(const LoopConfig& cfg, const LoopEnv& env, const Backends& backends,
                           const std::string& config_hash,
                           const std::optional<std::filesystem::path>& run_dir = std::nullopt);

std::string manifest_to_string(const RunManifest& manifest);
RunManifest manifest_from_string(const std::string& text);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

// Corpus-level WER: total edit distance over total reference length,
// accumulated in item order.
SplitWer corpus_wer(const std::vector<textnorm::TokenSeq>& refs,
                    const std::vector<textnorm::TokenSeq>& hyps);

}  // namespace rehear::loop
