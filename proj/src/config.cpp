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

#include "rehear/config.hpp"

#include "rehear/errors.hpp"
#include "rehear/hashing.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rehear::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_keys(const ordered_json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw ValidationError("config: unknown key '" + where + key + "'");
    }
}

corpus::SynthConfig parse_synth(const ordered_json& j) {
    check_keys(j, "corpus.synth.",
               {"vocab_size", "homophone_class_count", "homophone_class_size",
                "homophone_rank_floor", "digit_token_fraction", "min_utterance_tokens", "max_utterance_tokens",
                "acoustic_noise", "labeled_utterances", "unlabeled_utterances",
                "validation_utterances", "test_utterances", "utterances_per_source",
                "zipf_exponent", "markov_blend", "successor_fanout", "successor_boost",
                "markov_head_ranks", "token_duration_s", "seed"});
    corpus::SynthConfig cfg;
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    cfg.homophone_class_count = j.value("homophone_class_count", cfg.homophone_class_count);
    cfg.homophone_class_size = j.value("homophone_class_size", cfg.homophone_class_size);
    cfg.homophone_rank_floor = j.value("homophone_rank_floor", cfg.homophone_rank_floor);
    cfg.digit_token_fraction = j.value("digit_token_fraction", cfg.digit_token_fraction);
    cfg.min_utterance_tokens = j.value("min_utterance_tokens", cfg.min_utterance_tokens);
    cfg.max_utterance_tokens = j.value("max_utterance_tokens", cfg.max_utterance_tokens);
    cfg.acoustic_noise = j.value("acoustic_noise", cfg.acoustic_noise);
    cfg.labeled_utterances = j.value("labeled_utterances", cfg.labeled_utterances);
    cfg.unlabeled_utterances = j.value("unlabeled_utterances", cfg.unlabeled_utterances);
    cfg.validation_utterances = j.value("validation_utterances", cfg.validation_utterances);
    cfg.test_utterances = j.value("test_utterances", cfg.test_utterances);
    cfg.utterances_per_source = j.value("utterances_per_source", cfg.utterances_per_source);
    cfg.zipf_exponent = j.value("zipf_exponent", cfg.zipf_exponent);
    cfg.markov_blend = j.value("markov_blend", cfg.markov_blend);
    cfg.successor_fanout = j.value("successor_fanout", cfg.successor_fanout);
    cfg.successor_boost = j.value("successor_boost", cfg.successor_boost);
    cfg.markov_head_ranks = j.value("markov_head_ranks", cfg.markov_head_ranks);
    cfg.token_duration_s = j.value("token_duration_s", cfg.token_duration_s);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

textnorm::NormalizationConfig parse_normalization(const ordered_json& j) {
    check_keys(j, "normalization.", {"filler_words", "punctuation_set", "tag_open", "tag_close"});
    textnorm::NormalizationConfig cfg = textnorm::NormalizationConfig::defaults();
    if (j.contains("filler_words"))
        cfg.filler_words = j.at("filler_words").get<std::vector<std::string>>();
    if (j.contains("punctuation_set"))
        cfg.punctuation_set = j.at("punctuation_set").get<std::string>();
    if (j.contains("tag_open")) {
        const auto s = j.at("tag_open").get<std::string>();
        if (s.size() != 1) throw ValidationError("config: normalization.tag_open must be 1 char");
        cfg.tag_open = s[0];
    }
    if (j.contains("tag_close")) {
        const auto s = j.at("tag_close").get<std::string>();
        if (s.size() != 1) throw ValidationError("config: normalization.tag_close must be 1 char");
        cfg.tag_close = s[0];
    }
    cfg.validate();
    return cfg;
}

SimulationBackendConfig parse_simulation(const ordered_json& j) {
    check_keys(j, "backend.simulation.", {"student", "corrector"});
    SimulationBackendConfig cfg;
    if (j.contains("student")) {
        const auto& s = j.at("student");
        check_keys(s, "backend.simulation.student.",
                   {"count_scale", "bias_fraction", "bias_ratio", "bias_rank_floor",
                    "bias_rank_ceiling", "alpha", "p_del", "p_ins"});
        cfg.student.count_scale = s.value("count_scale", cfg.student.count_scale);
        cfg.student.bias_fraction = s.value("bias_fraction", cfg.student.bias_fraction);
        cfg.student.bias_ratio = s.value("bias_ratio", cfg.student.bias_ratio);
        cfg.student.bias_rank_floor = s.value("bias_rank_floor", cfg.student.bias_rank_floor);
        cfg.student.bias_rank_ceiling =
            s.value("bias_rank_ceiling", cfg.student.bias_rank_ceiling);
        cfg.student.alpha = s.value("alpha", cfg.student.alpha);
        cfg.student.p_del = s.value("p_del", cfg.student.p_del);
        cfg.student.p_ins = s.value("p_ins", cfg.student.p_ins);
    }
    if (j.contains("corrector")) {
        const auto& c = j.at("corrector");
        check_keys(c, "backend.simulation.corrector.", {"alpha", "lm_weight"});
        cfg.corrector.alpha = c.value("alpha", cfg.corrector.alpha);
        cfg.corrector.lm_weight = c.value("lm_weight", cfg.corrector.lm_weight);
    }
    return cfg;
}

wire::EndpointSpec parse_external(const ordered_json& j) {
    check_keys(j, "backend.external.", {"command", "timeout_ms"});
    wire::EndpointSpec spec;
    spec.command = j.at("command").get<std::vector<std::string>>();
    spec.timeout_ms = j.value("timeout_ms", spec.timeout_ms);
    if (spec.command.empty())
        throw ValidationError("config: backend.external.command must not be empty");
    return spec;
}

loop::LoopConfig parse_loop(const ordered_json& j) {
    check_keys(j, "loop.",
               {"method", "max_iterations", "decay", "initial_eta", "initial_epochs",
                "corrector_mode", "decoding", "saturation_epsilon", "reset_student",
                "rejected_policy", "pseudo_weight"});
    loop::LoopConfig cfg;
    if (j.contains("method"))
        cfg.method = loop::method_from_string(j.at("method").get<std::string>());
    cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
    cfg.decay = j.value("decay", cfg.decay);
    cfg.initial_eta = j.value("initial_eta", cfg.initial_eta);
    cfg.initial_epochs = j.value("initial_epochs", cfg.initial_epochs);
    if (j.contains("corrector_mode"))
        cfg.corrector_mode =
            backends::corrector_mode_from_string(j.at("corrector_mode").get<std::string>());
    if (j.contains("decoding")) {
        const auto& d = j.at("decoding");
        check_keys(d, "loop.decoding.", {"strategy", "beam_width", "temperature"});
        cfg.decoding.strategy =
            backends::decoding_strategy_from_string(d.at("strategy").get<std::string>());
        cfg.decoding.beam_width = d.value("beam_width", cfg.decoding.beam_width);
        cfg.decoding.temperature = d.value("temperature", cfg.decoding.temperature);
    }
    if (j.contains("saturation_epsilon") && !j.at("saturation_epsilon").is_null())
        cfg.saturation_epsilon = j.at("saturation_epsilon").get<double>();
    cfg.reset_student = j.value("reset_student", cfg.reset_student);
    if (j.contains("rejected_policy")) {
        const auto policy = j.at("rejected_policy").get<std::string>();
        if (policy == "drop") cfg.rejected_policy = loop::LoopConfig::RejectedPolicy::drop;
        else if (policy == "keep_hypothesis")
            cfg.rejected_policy = loop::LoopConfig::RejectedPolicy::keep_hypothesis;
        else throw ValidationError("config: loop.rejected_policy must be drop|keep_hypothesis");
    }
    cfg.pseudo_weight = j.value("pseudo_weight", cfg.pseudo_weight);
    cfg.validate();
    return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config: invalid JSON: " + std::string(e.what()));
    }
    check_keys(j, "", {"corpus", "normalization", "backend", "loop", "seeds", "out_dir"});

    ExperimentConfig cfg;
    if (!j.contains("corpus")) throw ValidationError("config: missing 'corpus' section");
    {
        const auto& c = j.at("corpus");
        check_keys(c, "corpus.", {"synth", "path"});
        if (c.contains("synth") == c.contains("path"))
            throw ValidationError("config: corpus needs exactly one of 'synth' or 'path'");
        if (c.contains("synth")) cfg.synth = parse_synth(c.at("synth"));
        if (c.contains("path")) cfg.corpus_path = c.at("path").get<std::string>();
    }
    if (j.contains("normalization")) cfg.normalization = parse_normalization(j.at("normalization"));
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        check_keys(b, "backend.", {"simulation", "external"});
        if (b.contains("simulation") && b.contains("external"))
            throw ValidationError("config: backend must be 'simulation' or 'external', not both");
        if (b.contains("simulation")) cfg.simulation = parse_simulation(b.at("simulation"));
        if (b.contains("external")) cfg.external = parse_external(b.at("external"));
    }
    if (!cfg.simulation.has_value() && !cfg.external.has_value())
        cfg.simulation = SimulationBackendConfig{};
    if (j.contains("loop")) cfg.loop = parse_loop(j.at("loop"));
    if (j.contains("seeds")) {
        cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
        if (cfg.seeds.empty()) throw ValidationError("config: seeds must not be empty");
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_experiment_config(buf.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
    // Canonical serialization of every behavior-shaping field.
    std::ostringstream s;
    if (cfg.synth.has_value()) {
        const auto& c = *cfg.synth;
        s << "synth:" << c.vocab_size << ',' << c.homophone_class_count << ','
          << c.homophone_class_size << ',' << c.homophone_rank_floor << ','
          << c.digit_token_fraction << ','
          << c.min_utterance_tokens << ',' << c.max_utterance_tokens << ',' << c.acoustic_noise
          << ',' << c.labeled_utterances << ',' << c.unlabeled_utterances << ','
          << c.validation_utterances << ',' << c.test_utterances << ',' << c.utterances_per_source
          << ',' << c.zipf_exponent << ',' << c.markov_blend << ',' << c.successor_fanout << ','
          << c.successor_boost << ',' << c.token_duration_s << ',' << c.seed << ';';
    }
    if (cfg.corpus_path.has_value()) s << "corpus_path:" << *cfg.corpus_path << ';';
    s << "norm:";
    for (const auto& w : cfg.normalization.filler_words) s << w << ',';
    s << '|' << cfg.normalization.punctuation_set << '|' << cfg.normalization.tag_open
      << cfg.normalization.tag_close << ';';
    if (cfg.simulation.has_value()) {
        const auto& b = *cfg.simulation;
        s << "sim:" << b.student.count_scale << ',' << b.student.bias_fraction << ','
          << b.student.bias_ratio << ',' << b.student.bias_rank_floor << ','
          << b.student.bias_rank_ceiling << ',' << b.student.alpha
          << ',' << b.student.p_del << ','
          << b.student.p_ins << ',' << b.corrector.alpha << ',' << b.corrector.lm_weight << ';';
    }
    if (cfg.external.has_value()) {
        s << "ext:";
        for (const auto& arg : cfg.external->command) s << arg << ',';
        s << '|' << cfg.external->timeout_ms << ';';
    }
    const auto& l = cfg.loop;
    s << "loop:" << to_string(l.method) << ',' << l.max_iterations << ',' << l.decay << ','
      << l.initial_eta << ',' << l.initial_epochs << ',' << to_string(l.corrector_mode) << ','
      << to_string(l.decoding.strategy) << ',' << l.decoding.beam_width << ','
      << l.decoding.temperature << ','
      << (l.saturation_epsilon ? std::to_string(*l.saturation_epsilon) : std::string("none"))
      << ',' << l.reset_student << ','
      << (l.rejected_policy == loop::LoopConfig::RejectedPolicy::drop ? "drop" : "keep") << ','
      << l.pseudo_weight << ';';
    return to_hex(fnv1a64(s.str()));
}

}  // namespace rehear::cli
