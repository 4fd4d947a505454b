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
#include "rehear/loop.hpp"
#include "rehear/wire.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rehear::cli {

struct SimulationBackendConfig {
    backends::BaseStudentParams student;
    backends::CorrectorParams corrector;
};

// The experiment file. Parsing is strict: unknown keys are rejected with
// the offending key named. See docs/formats.md for the schema.
struct ExperimentConfig {
    std::optional<corpus::SynthConfig> synth;       // corpus.synth
    std::optional<std::string> corpus_path;         // corpus.path
    textnorm::NormalizationConfig normalization = textnorm::NormalizationConfig::defaults();
    std::optional<SimulationBackendConfig> simulation;
    std::optional<wire::EndpointSpec> external;
    loop::LoopConfig loop;
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out_dir = "runs";
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Hash over every configuration field that shapes a run's behavior (the
// seed list and output directory are excluded; the per-run seed is its own
// manifest field).
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace rehear::cli
