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

#include "rehear/loop.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rehear::cli {

// Aggregated selected-checkpoint WERs (percent) for one method.
struct MethodStats {
    std::string method;
    int runs = 0;
    double test_mean = 0.0;
    double test_sd = 0.0;  // sample standard deviation (n - 1); 0 when n = 1
    double unlabeled_mean = 0.0;
    double unlabeled_sd = 0.0;
};

struct Report {
    std::string corpus;
    std::vector<MethodStats> rows;  // canonical method order
};

// Accepts run directories (containing manifest.json), manifest files, or
// parent directories that are scanned one level deep.
std::vector<loop::RunManifest> collect_manifests(const std::vector<std::string>& paths);

// Groups by method; throws if the manifests span different corpora.
Report build_report(const std::vector<loop::RunManifest>& manifests);

// Markdown table; best mean per column bold, second best underlined.
std::string render_markdown(const Report& report);
std::string render_csv(const Report& report);

}  // namespace rehear::cli
