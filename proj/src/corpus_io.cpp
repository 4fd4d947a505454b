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
#include "rehear/hashing.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rehear::corpus {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json synth_config_to_json(const SynthConfig& cfg) {
    return ordered_json{
        {"vocab_size", cfg.vocab_size},
        {"homophone_class_count", cfg.homophone_class_count},
        {"homophone_class_size", cfg.homophone_class_size},
        {"homophone_rank_floor", cfg.homophone_rank_floor},
        {"digit_token_fraction", cfg.digit_token_fraction},
        {"min_utterance_tokens", cfg.min_utterance_tokens},
        {"max_utterance_tokens", cfg.max_utterance_tokens},
        {"acoustic_noise", cfg.acoustic_noise},
        {"labeled_utterances", cfg.labeled_utterances},
        {"unlabeled_utterances", cfg.unlabeled_utterances},
        {"validation_utterances", cfg.validation_utterances},
        {"test_utterances", cfg.test_utterances},
        {"utterances_per_source", cfg.utterances_per_source},
        {"zipf_exponent", cfg.zipf_exponent},
        {"markov_blend", cfg.markov_blend},
        {"successor_fanout", cfg.successor_fanout},
        {"successor_boost", cfg.successor_boost},
        {"markov_head_ranks", cfg.markov_head_ranks},
        {"token_duration_s", cfg.token_duration_s},
        {"seed", cfg.seed},
    };
}

SynthConfig synth_config_from_json(const ordered_json& j) {
    SynthConfig cfg;
    cfg.vocab_size = j.at("vocab_size").get<int>();
    cfg.homophone_class_count = j.at("homophone_class_count").get<int>();
    cfg.homophone_class_size = j.at("homophone_class_size").get<int>();
    cfg.homophone_rank_floor = j.at("homophone_rank_floor").get<int>();
    cfg.digit_token_fraction = j.at("digit_token_fraction").get<double>();
    cfg.min_utterance_tokens = j.at("min_utterance_tokens").get<int>();
    cfg.max_utterance_tokens = j.at("max_utterance_tokens").get<int>();
    cfg.acoustic_noise = j.at("acoustic_noise").get<double>();
    cfg.labeled_utterances = j.at("labeled_utterances").get<int>();
    cfg.unlabeled_utterances = j.at("unlabeled_utterances").get<int>();
    cfg.validation_utterances = j.at("validation_utterances").get<int>();
    cfg.test_utterances = j.at("test_utterances").get<int>();
    cfg.utterances_per_source = j.at("utterances_per_source").get<int>();
    cfg.zipf_exponent = j.at("zipf_exponent").get<double>();
    cfg.markov_blend = j.at("markov_blend").get<double>();
    cfg.successor_fanout = j.at("successor_fanout").get<int>();
    cfg.successor_boost = j.at("successor_boost").get<double>();
    cfg.markov_head_ranks = j.at("markov_head_ranks").get<int>();
    cfg.token_duration_s = j.at("token_duration_s").get<double>();
    cfg.seed = j.at("seed").get<uint64_t>();
    return cfg;
}

ordered_json audio_to_json(const AudioRef& audio) {
    if (audio.is_external()) return ordered_json{{"path", audio.path}};
    return ordered_json{{"symbols", audio.symbols}};
}

AudioRef audio_from_json(const ordered_json& j) {
    AudioRef a;
    if (j.contains("path")) {
        a.path = j.at("path").get<std::string>();
    } else {
        a.symbols = j.at("symbols").get<std::vector<uint32_t>>();
    }
    return a;
}

ordered_json segment_record(std::string_view split, const std::string& source_id, double start_s,
                            double end_s, const AudioRef& audio, const std::string& transcript) {
    return ordered_json{
        {"source_id", source_id}, {"start_s", start_s},   {"end_s", end_s},
        {"audio", audio_to_json(audio)},
        {"transcript", transcript}, {"split", std::string(split)},
    };
}

std::string serialize_corpus_json(const SynthCorpus& corpus) {
    ordered_json j{
        {"format", "rehear-corpus-v1"},
        {"config", synth_config_to_json(corpus.config)},
        {"vocabulary",
         ordered_json{{"words", corpus.vocab.words},
                      {"observation_of", corpus.vocab.observation_of},
                      {"observation_count", corpus.vocab.observation_count}}},
        {"unigram_weights", corpus.unigram_weights},
        {"split_counts", ordered_json{{"labeled", corpus.splits.labeled.size()},
                                      {"unlabeled", corpus.splits.unlabeled.size()},
                                      {"validation", corpus.splits.validation.size()},
                                      {"test", corpus.splits.test.size()}}},
    };
    return j.dump(2) + "\n";
}

std::string serialize_segments_jsonl(const SynthCorpus& corpus) {
    std::ostringstream out;
    for (const auto& s : corpus.splits.labeled)
        out << segment_record("labeled", s.source_id, s.start_s, s.end_s, s.audio, s.transcript)
                   .dump()
            << "\n";
    for (const auto& s : corpus.splits.unlabeled)
        out << segment_record("unlabeled", s.source_id, s.start_s, s.end_s, s.audio,
                              s.hidden_reference.for_evaluation_only())
                   .dump()
            << "\n";
    for (const auto& s : corpus.splits.validation)
        out << segment_record("validation", s.source_id, s.start_s, s.end_s, s.audio, s.transcript)
                   .dump()
            << "\n";
    for (const auto& s : corpus.splits.test)
        out << segment_record("test", s.source_id, s.start_s, s.end_s, s.audio, s.transcript)
                   .dump()
            << "\n";
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << contents;
    if (!f) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

}  // namespace

void save_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir, bool overwrite) {
    namespace fs = std::filesystem;
    const fs::path manifest = dir / "corpus.json";
    if (fs::exists(manifest) && !overwrite)
        throw IoError("corpus already exists (use overwrite): " + manifest.string());
    fs::create_directories(dir);
    write_file(manifest, serialize_corpus_json(corpus));
    write_file(dir / "segments.jsonl", serialize_segments_jsonl(corpus));
}

SynthCorpus load_corpus(const std::filesystem::path& dir) {
    SynthCorpus corpus;
    ordered_json meta;
    try {
        meta = ordered_json::parse(read_file(dir / "corpus.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corpus.json parse error: " + std::string(e.what()));
    }
    if (meta.value("format", "") != std::string("rehear-corpus-v1"))
        throw IoError("unsupported corpus format in " + (dir / "corpus.json").string());
    corpus.config = synth_config_from_json(meta.at("config"));
    corpus.vocab.words = meta.at("vocabulary").at("words").get<std::vector<std::string>>();
    corpus.vocab.observation_of =
        meta.at("vocabulary").at("observation_of").get<std::vector<uint32_t>>();
    corpus.vocab.observation_count = meta.at("vocabulary").at("observation_count").get<uint32_t>();
    corpus.vocab.rebuild_index();
    corpus.unigram_weights = meta.at("unigram_weights").get<std::vector<double>>();

    std::istringstream lines(read_file(dir / "segments.jsonl"));
    std::string line;
    size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json rec;
        try {
            rec = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("segments.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string split = rec.at("split").get<std::string>();
        const std::string source_id = rec.at("source_id").get<std::string>();
        const double start_s = rec.at("start_s").get<double>();
        const double end_s = rec.at("end_s").get<double>();
        const AudioRef audio = audio_from_json(rec.at("audio"));
        const std::string transcript = rec.at("transcript").get<std::string>();
        if (split == "unlabeled") {
            UnlabeledSegment u;
            u.source_id = source_id;
            u.start_s = start_s;
            u.end_s = end_s;
            u.audio = audio;
            u.hidden_reference = HiddenTranscript::seal(transcript);
            corpus.splits.unlabeled.push_back(std::move(u));
        } else {
            Segment s;
            s.source_id = source_id;
            s.start_s = start_s;
            s.end_s = end_s;
            s.audio = audio;
            s.transcript = transcript;
            if (split == "labeled") corpus.splits.labeled.push_back(std::move(s));
            else if (split == "validation") corpus.splits.validation.push_back(std::move(s));
            else if (split == "test") corpus.splits.test.push_back(std::move(s));
            else throw IoError("segments.jsonl line " + std::to_string(line_no) +
                               ": unknown split '" + split + "'");
        }
    }
    corpus.splits.validate_disjoint_sources();
    return corpus;
}

std::string corpus_fingerprint(const SynthCorpus& corpus) {
    uint64_t h = fnv1a64(serialize_corpus_json(corpus));
    h = fnv1a64(serialize_segments_jsonl(corpus), h);
    return to_hex(h);
}

}  // namespace rehear::corpus
