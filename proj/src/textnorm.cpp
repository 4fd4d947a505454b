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

#include "rehear/textnorm.hpp"

#include "rehear/errors.hpp"

#include <algorithm>
#include <cctype>

namespace rehear::textnorm {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Removes every matched tag_open..tag_close span, inclusive. Unmatched
// delimiters are left in place; the punctuation pass strips them later.
std::string strip_tags(std::string_view text, char open, char close) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] == open) {
            const size_t end = text.find(close, i + 1);
            if (end != std::string_view::npos) {
                i = end + 1;
                continue;
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

}  // namespace

NormalizationConfig NormalizationConfig::defaults() {
    NormalizationConfig cfg;
    cfg.filler_words = {"um", "uh", "hmm", "mm", "ah", "er"};
    for (int c = 33; c < 127; ++c) {
        const char ch = static_cast<char>(c);
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '\'') {
            cfg.punctuation_set.push_back(ch);
        }
    }
    return cfg;
}

bool NormalizationConfig::is_filler(std::string_view token) const {
    return std::find(filler_words.begin(), filler_words.end(), token) != filler_words.end();
}

bool NormalizationConfig::is_punctuation(char c) const {
    return punctuation_set.find(c) != std::string::npos;
}

void NormalizationConfig::validate() const {
    for (const auto& w : filler_words) {
        if (w.empty()) throw ValidationError("filler_words: empty entry");
        for (char c : w) {
            if (is_space(c))
                throw ValidationError("filler_words: entry contains whitespace: '" + w + "'");
            if (std::isupper(static_cast<unsigned char>(c)))
                throw ValidationError("filler_words: entry must be lowercase: '" + w + "'");
        }
    }
    if (punctuation_set.find(' ') != std::string::npos)
        throw ValidationError("punctuation_set must not contain the space character");
}

std::string normalize(std::string_view text, const NormalizationConfig& cfg) {
    std::string buf = strip_tags(text, cfg.tag_open, cfg.tag_close);

    for (char& c : buf) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    std::string stripped;
    stripped.reserve(buf.size());
    for (char c : buf) {
        if (!cfg.is_punctuation(c)) stripped.push_back(c);
    }

    // Tokenize on whitespace runs, dropping fillers, then rejoin.
    std::string out;
    size_t i = 0;
    while (i < stripped.size()) {
        while (i < stripped.size() && is_space(stripped[i])) ++i;
        const size_t start = i;
        while (i < stripped.size() && !is_space(stripped[i])) ++i;
        if (i == start) break;
        std::string_view token(stripped.data() + start, i - start);
        if (cfg.is_filler(token)) continue;
        if (!out.empty()) out.push_back(' ');
        out.append(token);
    }
    return out;
}

TokenSeq tokenize(std::string_view normalized) {
    TokenSeq seq;
    size_t i = 0;
    while (i < normalized.size()) {
        const size_t space = normalized.find(' ', i);
        const size_t end = space == std::string_view::npos ? normalized.size() : space;
        if (end > i) seq.tokens.emplace_back(normalized.substr(i, end - i));
        i = end + 1;
    }
    return seq;
}

std::string render_chars(const TokenSeq& seq) {
    std::string out;
    for (size_t i = 0; i < seq.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out.append(seq[i]);
    }
    return out;
}

}  // namespace rehear::textnorm
