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

#include "rehear/rng.hpp"
#include "rehear/textnorm.hpp"

#include <map>
#include <string>
#include <vector>

namespace testsupport {

// Brute-force memoized edit-distance oracle. Plain top-down recursion over
// (i, j) with a map cache; shares no code with the DP implementation it
// checks.
template <typename Seq>
int edit_distance_oracle_impl(const Seq& a, const Seq& b, size_t i, size_t j,
                              std::map<std::pair<size_t, size_t>, int>& memo) {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    const auto key = std::make_pair(i, j);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int best = edit_distance_oracle_impl(a, b, i + 1, j + 1, memo) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, edit_distance_oracle_impl(a, b, i + 1, j, memo) + 1);
    best = std::min(best, edit_distance_oracle_impl(a, b, i, j + 1, memo) + 1);
    memo[key] = best;
    return best;
}

template <typename Seq>
int edit_distance_oracle(const Seq& a, const Seq& b) {
    std::map<std::pair<size_t, size_t>, int> memo;
    return edit_distance_oracle_impl(a, b, 0, 0, memo);
}

inline rehear::textnorm::TokenSeq random_token_seq(rehear::Rng& rng, size_t max_len,
                                                   size_t vocab) {
    rehear::textnorm::TokenSeq seq;
    const size_t len = static_cast<size_t>(rng.next_below(max_len + 1));
    for (size_t i = 0; i < len; ++i)
        seq.tokens.push_back("w" + std::to_string(rng.next_below(vocab)));
    return seq;
}

inline std::string random_string(rehear::Rng& rng, size_t max_len, size_t alphabet = 4) {
    const size_t len = static_cast<size_t>(rng.next_below(max_len + 1));
    std::string s(len, 'a');
    for (auto& c : s) c = static_cast<char>('a' + rng.next_below(alphabet));
    return s;
}

// Messy text generator for normalization properties: mixed case, brackets,
// punctuation, digits, filler words, odd whitespace.
inline std::string random_messy_text(rehear::Rng& rng, size_t max_len = 60) {
    static const std::string pool =
        "abcXYZ 019,.!?'[]<>-_\t\n  umUH (er) hmm/";
    const size_t len = static_cast<size_t>(rng.next_below(max_len + 1));
    std::string s;
    for (size_t i = 0; i < len; ++i) s.push_back(pool[rng.next_below(pool.size())]);
    return s;
}

}  // namespace testsupport
