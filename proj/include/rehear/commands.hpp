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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rehear::cli {

// Exit codes (stable scripting contract): 0 success, 2 config error,
// 3 backend/protocol error, 4 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;
inline constexpr int kExitIo = 4;

struct GenCorpusArgs {
    std::string config_path;
    std::string out_dir;
    bool overwrite = false;
};

struct RunArgs {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::vector<uint64_t>> seeds;
    std::optional<std::string> method;
    int workers = 1;
    bool overwrite = false;
};

struct ReportArgs {
    std::vector<std::string> run_paths;
    std::string format = "markdown";  // markdown | csv
};

int cmd_gen_corpus(const GenCorpusArgs& args, std::ostream& out, std::ostream& err);
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

}  // namespace rehear::cli
