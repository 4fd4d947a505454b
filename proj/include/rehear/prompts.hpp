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

namespace rehear::prompts {

// Instruction templates sent to corrector backends. These strings are
// protocol constants: peers must receive them byte for byte, with exactly
// the <hypothesis> placeholder substituted.
inline constexpr std::string_view kHypothesisPlaceholder = "<hypothesis>";

inline constexpr std::string_view kAudioAware =
    "Correct the ASR hypothesis based on the provided audio. Transcribe the speech exactly as "
    "spoken. Output strictly the corrected text without any explanations or fillers. "
    "Hypothesis: <hypothesis>";

inline constexpr std::string_view kTextOnly =
    "Correct the ASR hypothesis by fixing typos and misspellings. Preserve the original style "
    "and do not paraphrase. Output strictly the corrected text without any explanations or "
    "fillers. Hypothesis: <hypothesis>";

// Replaces exactly one placeholder occurrence; throws if the template has
// none or more than one.
std::string render(std::string_view template_text, std::string_view hypothesis);

}  // namespace rehear::prompts
