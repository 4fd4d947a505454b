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

#include "rehear/report.hpp"

#include "rehear/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rehear::cli {

namespace {

namespace fs = std::filesystem;

int method_rank(const std::string& name) {
    static const std::vector<std::string> order = {"isl",    "ipl",         "ipl_rule",
                                                   "rehear", "rehear_rule", "rehear_model"};
    const auto it = std::find(order.begin(), order.end(), name);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_and_sample_sd(const std::vector<double>& values) {
    MeanSd out;
    const double n = static_cast<double>(values.size());
    for (double v : values) out.mean += v;
    out.mean /= n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

const loop::IterationRecord& checkpoint_record(const loop::RunManifest& m) {
    for (const auto& rec : m.iterations)
        if (rec.t == m.selected_checkpoint) return rec;
    throw ValidationError("manifest has no record for its selected checkpoint");
}

std::string format_fixed(double value, int decimals) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(decimals);
    s << value;
    return s.str();
}

// Indices of the best (lowest) and second-best means in a column.
std::pair<int, int> best_two(const std::vector<double>& means) {
    int best = -1, second = -1;
    for (size_t i = 0; i < means.size(); ++i) {
        if (best < 0 || means[i] < means[static_cast<size_t>(best)]) {
            second = best;
            best = static_cast<int>(i);
        } else if (second < 0 || means[i] < means[static_cast<size_t>(second)]) {
            second = static_cast<int>(i);
        }
    }
    return {best, second};
}

}  // namespace

std::vector<loop::RunManifest> collect_manifests(const std::vector<std::string>& paths) {
    std::vector<loop::RunManifest> manifests;
    for (const auto& raw : paths) {
        const fs::path p(raw);
        if (fs::is_regular_file(p)) {
            manifests.push_back(loop::load_manifest(p));
        } else if (fs::is_regular_file(p / "manifest.json")) {
            manifests.push_back(loop::load_manifest(p / "manifest.json"));
        } else if (fs::is_directory(p)) {
            std::vector<fs::path> children;
            for (const auto& entry : fs::directory_iterator(p))
                if (fs::is_regular_file(entry.path() / "manifest.json"))
                    children.push_back(entry.path() / "manifest.json");
            std::sort(children.begin(), children.end());
            for (const auto& child : children) manifests.push_back(loop::load_manifest(child));
        } else {
            throw IoError("no manifest found under: " + raw);
        }
    }
    if (manifests.empty()) throw IoError("no manifests found");
    return manifests;
}

Report build_report(const std::vector<loop::RunManifest>& manifests) {
    Report report;
    report.corpus = manifests.front().corpus;
    for (const auto& m : manifests) {
        if (m.corpus != report.corpus)
            throw ValidationError("report: manifests span different corpora (" + report.corpus +
                                  " vs " + m.corpus + ")");
    }

    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_method;
    for (const auto& m : manifests) {
        const auto& rec = checkpoint_record(m);
        by_method[m.method].first.push_back(rec.wer_test.value * 100.0);
        by_method[m.method].second.push_back(rec.wer_unlabeled.value * 100.0);
    }

    for (const auto& [method, values] : by_method) {
        MethodStats row;
        row.method = method;
        row.runs = static_cast<int>(values.first.size());
        const MeanSd test = mean_and_sample_sd(values.first);
        const MeanSd unlabeled = mean_and_sample_sd(values.second);
        row.test_mean = test.mean;
        row.test_sd = test.sd;
        row.unlabeled_mean = unlabeled.mean;
        row.unlabeled_sd = unlabeled.sd;
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const MethodStats& a, const MethodStats& b) {
        const int ra = method_rank(a.method), rb = method_rank(b.method);
        if (ra != rb) return ra < rb;
        return a.method < b.method;
    });
    return report;
}

std::string render_markdown(const Report& report) {
    std::vector<double> test_means, unlabeled_means;
    for (const auto& row : report.rows) {
        test_means.push_back(row.test_mean);
        unlabeled_means.push_back(row.unlabeled_mean);
    }
    const auto [test_best, test_second] = best_two(test_means);
    const auto [unl_best, unl_second] = best_two(unlabeled_means);

    auto cell = [](double mean, double sd, int runs, bool best, bool second) {
        std::string text = format_fixed(mean, 2) + " ±" + format_fixed(sd, 4);
        if (runs == 1) text += " (n=1)";
        if (best) return "**" + text + "**";
        if (second) return "_" + text + "_";
        return text;
    };

    std::ostringstream out;
    out << "| Method | Test | Unlabeled | Runs |\n";
    out << "|---|---|---|---|\n";
    for (size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        const int idx = static_cast<int>(i);
        out << "| " << row.method << " | "
            << cell(row.test_mean, row.test_sd, row.runs, idx == test_best && report.rows.size() > 1,
                    idx == test_second)
            << " | "
            << cell(row.unlabeled_mean, row.unlabeled_sd, row.runs,
                    idx == unl_best && report.rows.size() > 1, idx == unl_second)
            << " | " << row.runs << " |\n";
    }
    return out.str();
}

std::string render_csv(const Report& report) {
    std::ostringstream out;
    out << "method,split,mean,sd,n\n";
    for (const auto& row : report.rows) {
        out << row.method << ",test," << format_fixed(row.test_mean, 2) << ','
            << format_fixed(row.test_sd, 4) << ',' << row.runs << "\n";
        out << row.method << ",unlabeled," << format_fixed(row.unlabeled_mean, 2) << ','
            << format_fixed(row.unlabeled_sd, 4) << ',' << row.runs << "\n";
    }
    return out.str();
}

}  // namespace rehear::cli
