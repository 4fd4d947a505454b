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

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

int main(int argc, char** argv) {
    // A dying external backend must surface as a ProtocolError, not SIGPIPE.
    std::signal(SIGPIPE, SIG_IGN);

    CLI::App app{"Iterative pseudo-label refinement experiments"};
    app.require_subcommand(1);

    rehear::cli::GenCorpusArgs gen_args;
    auto* gen = app.add_subcommand("gen-corpus", "Generate and persist a synthetic corpus");
    gen->add_option("--config", gen_args.config_path, "Experiment config file")->required();
    gen->add_option("--out", gen_args.out_dir, "Output corpus directory")->required();
    gen->add_flag("--overwrite", gen_args.overwrite, "Replace an existing corpus");

    rehear::cli::RunArgs run_args;
    std::vector<uint64_t> run_seeds;
    std::string run_method, run_out;
    auto* run = app.add_subcommand("run", "Run the experiment for every seed");
    run->add_option("--config", run_args.config_path, "Experiment config file")->required();
    run->add_option("--out", run_out, "Output directory (overrides config)");
    run->add_option("--seeds", run_seeds, "Seeds (overrides config)")->delimiter(',');
    run->add_option("--method", run_method, "Method (overrides config)");
    run->add_option("--workers", run_args.workers, "Concurrent seeds / stage workers")
        ->check(CLI::PositiveNumber);
    run->add_flag("--overwrite", run_args.overwrite, "Replace existing run directories");

    rehear::cli::ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Summarize run manifests as a table");
    report->add_option("--format", report_args.format, "markdown or csv")
        ->check(CLI::IsMember({"markdown", "csv"}));
    report->add_option("paths", report_args.run_paths, "Run directories or manifests")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : rehear::cli::kExitConfig;
    }

    if (gen->parsed()) return rehear::cli::cmd_gen_corpus(gen_args, std::cout, std::cerr);
    if (run->parsed()) {
        if (!run_out.empty()) run_args.out_dir = run_out;
        if (!run_seeds.empty()) run_args.seeds = run_seeds;
        if (!run_method.empty()) run_args.method = run_method;
        return rehear::cli::cmd_run(run_args, std::cout, std::cerr);
    }
    return rehear::cli::cmd_report(report_args, std::cout, std::cerr);
}
