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

#include "rehear/metrics.hpp"

#include "rehear/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace rehear::metrics {

namespace {

// Levenshtein DP shared by the token and character views. Backtracks with
// the fixed preference correct > substitution > deletion > insertion so
// tied-cost alignments are reported deterministically.
template <typename Seq>
Alignment align_generic(const Seq& ref, const Seq& hyp) {
    const size_t n = ref.size();
    const size_t m = hyp.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = 0; i <= n; ++i) dp[i][0] = static_cast<int>(i);
    for (size_t j = 0; j <= m; ++j) dp[0][j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        for (size_t j = 1; j <= m; ++j) {
            const int match = dp[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            dp[i][j] = std::min({match, dp[i - 1][j] + 1, dp[i][j - 1] + 1});
        }
    }

    Alignment out;
    size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && dp[i][j] == dp[i - 1][j - 1]) {
            ++out.correct;
            out.pairs.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
            --i, --j;
        } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1) {
            ++out.substitutions;
            out.pairs.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
            --i, --j;
        } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
            ++out.deletions;
            out.pairs.emplace_back(static_cast<int>(i - 1), Alignment::kGap);
            --i;
        } else {
            ++out.insertions;
            out.pairs.emplace_back(Alignment::kGap, static_cast<int>(j - 1));
            --j;
        }
    }
    std::reverse(out.pairs.begin(), out.pairs.end());
    return out;
}

template <typename Seq>
ErrorRate rate_generic(const Seq& ref, const Seq& hyp) {
    if (ref.size() == 0) {
        if (hyp.size() == 0) return {0.0, false};
        return {static_cast<double>(hyp.size()), true};
    }
    const Alignment a = align_generic(ref, hyp);
    return {static_cast<double>(a.distance()) / static_cast<double>(ref.size()), false};
}

bool has_digit(std::string_view token) {
    return std::any_of(token.begin(), token.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// Size of the symmetric multiset difference between the digit-bearing
// tokens of the two sequences.
int digit_mismatch_count(const TokenSeq& hyp, const TokenSeq& corr) {
    std::map<std::string, int> delta;
    for (const auto& t : hyp.tokens)
        if (has_digit(t)) ++delta[t];
    for (const auto& t : corr.tokens)
        if (has_digit(t)) --delta[t];
    int mismatch = 0;
    for (const auto& [token, d] : delta) mismatch += std::abs(d);
    return mismatch;
}

}  // namespace

Alignment edit_alignment(const TokenSeq& ref, const TokenSeq& hyp) {
    return align_generic(ref.tokens, hyp.tokens);
}

Alignment edit_alignment_chars(std::string_view ref, std::string_view hyp) {
    return align_generic(ref, hyp);
}

ErrorRate wer_detailed(const TokenSeq& ref, const TokenSeq& hyp) {
    return rate_generic(ref.tokens, hyp.tokens);
}

double wer(const TokenSeq& ref, const TokenSeq& hyp) {
    return wer_detailed(ref, hyp).value;
}

ErrorRate cer_detailed(std::string_view ref, std::string_view hyp) {
    return rate_generic(ref, hyp);
}

double cer(std::string_view ref, std::string_view hyp) {
    return cer_detailed(ref, hyp).value;
}

double deflate_ratio(std::string_view text) {
    if (text.empty()) return 1.0;

    z_stream zs{};
    // Raw DEFLATE (negative window bits): no zlib header or checksum, so
    // the overhead on short utterances stays small.
    if (deflateInit2(&zs, 6, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("deflateInit2 failed");
    std::vector<unsigned char> out(deflateBound(&zs, static_cast<uLong>(text.size())));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(text.data()));
    zs.avail_in = static_cast<uInt>(text.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const size_t compressed = out.size() - zs.avail_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw IoError("deflate failed");

    const double ratio = static_cast<double>(compressed) / static_cast<double>(text.size());
    return std::min(ratio, 1.0);
}

FeatureRecord features(const TokenSeq& hyp, const TokenSeq& corr,
                       std::optional<double> confidence,
                       std::optional<double> duration_s) {
    FeatureRecord rec;
    rec.wer = wer_detailed(hyp, corr).value;

    const std::string hyp_chars = textnorm::render_chars(hyp);
    const std::string corr_chars = textnorm::render_chars(corr);
    rec.cer = cer_detailed(hyp_chars, corr_chars).value;

    if (!hyp_chars.empty()) {
        rec.length_ratio = static_cast<double>(corr_chars.size()) /
                           static_cast<double>(hyp_chars.size());
    }
    if (!corr.empty()) {
        std::set<std::string_view> distinct(corr.tokens.begin(), corr.tokens.end());
        rec.unique_token_ratio =
            static_cast<double>(distinct.size()) / static_cast<double>(corr.size());
        rec.compression_ratio = deflate_ratio(corr_chars);
    }
    rec.digit_mismatch = digit_mismatch_count(hyp, corr);
    if (duration_s.has_value()) {
        if (*duration_s <= 0.0)
            throw ValidationError("features: duration_s must be positive");
        rec.speaking_rate = static_cast<double>(corr.size()) / *duration_s;
    }
    rec.confidence = confidence;
    return rec;
}

}  // namespace rehear::metrics
