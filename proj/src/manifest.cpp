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

#include "rehear/errors.hpp"
#include "rehear/loop.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rehear::loop {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json wer_to_json(const SplitWer& wer) {
    ordered_json j{{"value", wer.value}};
    if (wer.degenerate) j["degenerate"] = true;
    return j;
}

SplitWer wer_from_json(const ordered_json& j) {
    SplitWer w;
    w.value = j.at("value").get<double>();
    w.degenerate = j.value("degenerate", false);
    return w;
}

}  // namespace

std::string manifest_to_string(const RunManifest& manifest) {
    ordered_json iterations = ordered_json::array();
    for (const auto& rec : manifest.iterations) {
        ordered_json filter = ordered_json::object();
        for (const auto& [reason, count] : rec.filter) filter[reason] = count;
        iterations.push_back(ordered_json{
            {"t", rec.t},
            {"eta", rec.eta},
            {"epochs", rec.epochs},
            {"wer", ordered_json{{"validation", wer_to_json(rec.wer_validation)},
                                 {"test", wer_to_json(rec.wer_test)},
                                 {"unlabeled", wer_to_json(rec.wer_unlabeled)}}},
            {"filter", std::move(filter)},
        });
    }
    ordered_json j{
        {"format", "rehear-run-v1"},
        {"config_hash", manifest.config_hash},
        {"corpus", manifest.corpus},
        {"method", manifest.method},
        {"seed", manifest.seed},
        {"iterations", std::move(iterations)},
        {"selected_checkpoint", manifest.selected_checkpoint},
        {"stop_reason", manifest.stop_reason},
    };
    return j.dump(2) + "\n";
}

RunManifest manifest_from_string(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("manifest parse error: " + std::string(e.what()));
    }
    if (j.value("format", "") != std::string("rehear-run-v1"))
        throw IoError("unsupported manifest format");
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.corpus = j.at("corpus").get<std::string>();
    m.method = j.at("method").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    for (const auto& rec_json : j.at("iterations")) {
        IterationRecord rec;
        rec.t = rec_json.at("t").get<int>();
        rec.eta = rec_json.at("eta").get<double>();
        rec.epochs = rec_json.at("epochs").get<int>();
        rec.wer_validation = wer_from_json(rec_json.at("wer").at("validation"));
        rec.wer_test = wer_from_json(rec_json.at("wer").at("test"));
        rec.wer_unlabeled = wer_from_json(rec_json.at("wer").at("unlabeled"));
        for (const auto& [key, value] : rec_json.at("filter").items())
            rec.filter[key] = value.get<int>();
        m.iterations.push_back(std::move(rec));
    }
    m.selected_checkpoint = j.at("selected_checkpoint").get<int>();
    m.stop_reason = j.at("stop_reason").get<std::string>();
    return m;
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << manifest_to_string(manifest);
    if (!f) throw IoError("write failed: " + path.string());
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return manifest_from_string(buf.str());
}

}  // namespace rehear::loop
