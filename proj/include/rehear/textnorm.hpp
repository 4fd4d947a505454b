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

#include <string>
#include <string_view>
#include <vector>

namespace rehear::textnorm {

// A normalized transcript as an ordered list of whitespace-free tokens.
// The empty sequence is valid.
struct TokenSeq {
    std::vector<std::string> tokens;

    TokenSeq() = default;
    TokenSeq(std::initializer_list<std::string> init) : tokens(init) {}
    explicit TokenSeq(std::vector<std::string> t) : tokens(std::move(t)) {}

    size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
    const std::string& operator[](size_t i) const { return tokens[i]; }
    bool operator==(const TokenSeq&) const = default;
};

// Controls the fixed normalization pipeline. Filler entries must be
// lowercase and whitespace free; validate() enforces that.
struct NormalizationConfig {
    std::vector<std::string> filler_words;
    std::string punctuation_set;
    char tag_open = '[';
    char tag_close = ']';

    // Fillers {um, uh, hmm, mm, ah, er}; punctuation = every ASCII
    // character that is not alphanumeric, space, or apostrophe
    // (apostrophes stay so contractions survive).
    static NormalizationConfig defaults();

    bool is_filler(std::string_view token) const;
    bool is_punctuation(char c) const;
    void validate() const;
};

// Pass order is fixed: tag removal, lowercase, punctuation strip,
// tokenize + filler drop, rejoin with single spaces. Total and idempotent.
std::string normalize(std::string_view text, const NormalizationConfig& cfg);

// Splits an already-normalized string on single spaces. Joining the result
// with single spaces reproduces the input.
TokenSeq tokenize(std::string_view normalized);

// Canonical character view used for CER: tokens joined with single spaces.
std::string render_chars(const TokenSeq& seq);

}  // namespace rehear::textnorm
