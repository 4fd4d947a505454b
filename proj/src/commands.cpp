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

#include "rehear/commands.hpp"

#include "rehear/config.hpp"
#include "rehear/errors.hpp"
#include "rehear/parallel.hpp"
#include "rehear/report.hpp"

#include <filesystem>
#include <memory>
#include <ostream>
#include <sstream>

namespace rehear::cli {

namespace {

namespace fs = std::filesystem;

int classify(const std::exception& e) {
    if (dynamic_cast<const ProtocolError*>(&e)) return kExitBackend;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const ValidationError*>(&e)) return kExitConfig;
    return 1;
}

// Per-seed backend bundle. The base student is salted by the corpus seed,
// so every method and every run seed starts from the same pretrained model.
struct SeedBackends {
    std::unique_ptr<backends::SimRecognizer> sim_recognizer;
    std::unique_ptr<backends::SimCorrector> sim_corrector;
    std::shared_ptr<wire::PeerConnection> peer;
    std::unique_ptr<wire::ExternalRecognizer> ext_recognizer;
    std::unique_ptr<wire::ExternalCorrector> ext_corrector;
    loop::Backends handles;
};

bool method_uses_corrector(loop::Method m) {
    return m == loop::Method::rehear || m == loop::Method::rehear_rule ||
           m == loop::Method::rehear_model;
}

SeedBackends make_backends(const ExperimentConfig& cfg, const corpus::SynthCorpus& corpus) {
    SeedBackends b;
    if (cfg.external.has_value()) {
        wire::EndpointSpec spec = *cfg.external;
        spec.corrector_mode = cfg.loop.corrector_mode;
        b.peer = std::make_shared<wire::PeerConnection>(spec);
        b.ext_recognizer = std::make_unique<wire::ExternalRecognizer>(b.peer);
        b.handles.recognizer = b.ext_recognizer.get();
        if (method_uses_corrector(cfg.loop.method)) {
            b.ext_corrector =
                std::make_unique<wire::ExternalCorrector>(b.peer, cfg.loop.corrector_mode);
            b.handles.corrector = b.ext_corrector.get();
        }
        return b;
    }
    const SimulationBackendConfig sim = cfg.simulation.value_or(SimulationBackendConfig{});
    auto vocab = std::make_shared<const corpus::Vocabulary>(corpus.vocab);
    b.sim_recognizer = std::make_unique<backends::SimRecognizer>(
        backends::make_base_student(vocab, sim.student, corpus.config.seed));
    b.handles.recognizer = b.sim_recognizer.get();
    if (method_uses_corrector(cfg.loop.method)) {
        b.sim_corrector = std::make_unique<backends::SimCorrector>(
            vocab, cfg.loop.corrector_mode, sim.corrector, cfg.loop.decoding);
        b.handles.corrector = b.sim_corrector.get();
    }
    return b;
}

}  // namespace

int cmd_gen_corpus(const GenCorpusArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig cfg = load_experiment_config(args.config_path);
        if (!cfg.synth.has_value())
            throw ValidationError("gen-corpus requires a corpus.synth section");
        const corpus::SynthCorpus corpus = corpus::synth_corpus(*cfg.synth);
        corpus::save_corpus(corpus, args.out_dir, args.overwrite);
        out << "corpus " << corpus::corpus_fingerprint(corpus) << " written to " << args.out_dir
            << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "gen-corpus: " << e.what() << "\n";
        return classify(e);
    }
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    corpus::SynthCorpus corpus;
    try {
        cfg = load_experiment_config(args.config_path);
        if (args.method.has_value()) cfg.loop.method = loop::method_from_string(*args.method);
        if (args.out_dir.has_value()) cfg.out_dir = *args.out_dir;
        if (args.seeds.has_value()) {
            if (args.seeds->empty()) throw ValidationError("run: --seeds must not be empty");
            cfg.seeds = *args.seeds;
        }
        if (cfg.external.has_value() && !cfg.corpus_path.has_value() && !cfg.synth.has_value())
            throw ValidationError("run: no corpus configured");
        corpus = cfg.synth.has_value() ? corpus::synth_corpus(*cfg.synth)
                                       : corpus::load_corpus(*cfg.corpus_path);
    } catch (const std::exception& e) {
        err << "run: " << e.what() << "\n";
        return classify(e);
    }

    const std::string hash = config_hash(cfg);
    struct SeedOutcome {
        std::string message;
        int code = kExitOk;
    };
    std::vector<SeedOutcome> outcomes(cfg.seeds.size());

    parallel_for(cfg.seeds.size(), args.workers, [&](size_t i) {
        const uint64_t seed = cfg.seeds[i];
        const fs::path run_dir = fs::path(cfg.out_dir) / (hash + "-seed" + std::to_string(seed));
        try {
            if (fs::exists(run_dir / "manifest.json") && !args.overwrite)
                throw IoError("refusing to overwrite existing run " + run_dir.string() +
                              " (pass --overwrite)");
            loop::LoopConfig loop_cfg = cfg.loop;
            loop_cfg.seed = seed;
            SeedBackends backends = make_backends(cfg, corpus);
            loop::LoopEnv env;
            env.corpus = &corpus;
            env.normalization = cfg.normalization;
            env.workers = args.workers;
            const loop::RunManifest manifest =
                loop::run_experiment(loop_cfg, env, backends.handles, hash, run_dir);
            std::ostringstream line;
            line << "seed " << seed << ": checkpoint t=" << manifest.selected_checkpoint
                 << " val=" << manifest.iterations[static_cast<size_t>(
                                                       manifest.selected_checkpoint)]
                                    .wer_validation.value *
                                100.0
                 << "% -> " << run_dir.string();
            outcomes[i] = {line.str(), kExitOk};
        } catch (const std::exception& e) {
            outcomes[i] = {std::string("seed ") + std::to_string(seed) + " failed: " + e.what(),
                           classify(e)};
        }
    });

    int worst = kExitOk;
    for (const auto& outcome : outcomes) {
        (outcome.code == kExitOk ? out : err) << outcome.message << "\n";
        if (outcome.code != kExitOk) {
            if (worst == kExitOk || outcome.code == kExitBackend) worst = outcome.code;
        }
    }
    return worst;
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (args.format != "markdown" && args.format != "csv")
            throw ValidationError("report: format must be markdown or csv");
        const auto manifests = collect_manifests(args.run_paths);
        const Report report = build_report(manifests);
        out << (args.format == "csv" ? render_csv(report) : render_markdown(report));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "report: " << e.what() << "\n";
        return classify(e);
    }
}

}  // namespace rehear::cli
