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
#include "support.hpp"

#include <doctest.h>

#include <cctype>

using namespace rehear;
using namespace rehear::textnorm;

TEST_CASE("normalize applies the fixed pass order") {
    const auto cfg = NormalizationConfig::defaults();
    CHECK(normalize("Um, Hello WORLD.", cfg) == "hello world");
    CHECK(normalize("", cfg) == "");
    CHECK(normalize("hello world", cfg) == "hello world");
}

TEST_CASE("normalize removes tags before anything else") {
    const auto cfg = NormalizationConfig::defaults();
    CHECK(normalize("so [LAUGHTER] good", cfg) == "so good");
    CHECK(normalize("[noise]", cfg) == "");
    // Unmatched delimiter: nothing outside a matched pair is deleted; the
    // bracket itself falls to the punctuation pass.
    CHECK(normalize("a [b c", cfg) == "a b c");
    CHECK(normalize("x ]y[ z", cfg) == "x y z");
}

TEST_CASE("normalize keeps apostrophes and digits") {
    const auto cfg = NormalizationConfig::defaults();
    CHECK(normalize("Don't stop", cfg) == "don't stop");
    CHECK(normalize("in 2021 we saw 5%", cfg) == "in 2021 we saw 5");
}

TEST_CASE("normalize drops fillers as whole tokens only") {
    const auto cfg = NormalizationConfig::defaults();
    CHECK(normalize("uh the um drummer hummed", cfg) == "the drummer hummed");
    CHECK(normalize("Um... uh, ER!", cfg) == "");
}

TEST_CASE("normalize squeezes whitespace") {
    const auto cfg = NormalizationConfig::defaults();
    CHECK(normalize("  a \t b\n\nc  ", cfg) == "a b c");
}

TEST_CASE("tokenize splits on single spaces and round-trips") {
    CHECK(tokenize("hello world").tokens == std::vector<std::string>{"hello", "world"});
    CHECK(tokenize("").tokens.empty());
    CHECK(tokenize("a b c").tokens == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("render_chars joins with single spaces") {
    CHECK(render_chars(TokenSeq{"hello", "word"}) == "hello word");
    CHECK(render_chars(TokenSeq{}) == "");
    CHECK(render_chars(TokenSeq{"a"}) == "a");
}

TEST_CASE("property: normalize is idempotent and clean") {
    const auto cfg = NormalizationConfig::defaults();
    Rng rng(2024);
    for (int i = 0; i < 500; ++i) {
        const std::string text = testsupport::random_messy_text(rng);
        const std::string once = normalize(text, cfg);
        CHECK(normalize(once, cfg) == once);
        for (char c : once) {
            CHECK_FALSE(std::isupper(static_cast<unsigned char>(c)));
            CHECK_FALSE(cfg.is_punctuation(c));
        }
        CHECK(once.find("  ") == std::string::npos);
        if (!once.empty()) {
            CHECK(once.front() != ' ');
            CHECK(once.back() != ' ');
        }
        for (const auto& token : tokenize(once).tokens) CHECK_FALSE(cfg.is_filler(token));
    }
}

TEST_CASE("property: tokenize then render_chars is identity on normal text") {
    const auto cfg = NormalizationConfig::defaults();
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        const std::string normal = normalize(testsupport::random_messy_text(rng), cfg);
        CHECK(render_chars(tokenize(normal)) == normal);
    }
}

TEST_CASE("config validation rejects bad fillers") {
    NormalizationConfig cfg = NormalizationConfig::defaults();
    cfg.filler_words.push_back("two words");
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.filler_words.back() = "Upper";
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.filler_words.back() = "fine";
    CHECK_NOTHROW(cfg.validate());
}
