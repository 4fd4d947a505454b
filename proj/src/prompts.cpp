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

#include "rehear/prompts.hpp"

#include "rehear/errors.hpp"

namespace rehear::prompts {

std::string render(std::string_view template_text, std::string_view hypothesis) {
    const size_t first = template_text.find(kHypothesisPlaceholder);
    if (first == std::string_view::npos)
        throw ValidationError("prompt template has no <hypothesis> placeholder");
    if (template_text.find(kHypothesisPlaceholder, first + 1) != std::string_view::npos)
        throw ValidationError("prompt template has more than one <hypothesis> placeholder");
    std::string out(template_text);
    out.replace(first, kHypothesisPlaceholder.size(), hypothesis);
    return out;
}

}  // namespace rehear::prompts
