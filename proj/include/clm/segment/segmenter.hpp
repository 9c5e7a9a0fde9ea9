// Copyright 2026 The ConceptLM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace clm {

struct SegmentationConfig {
  double threshold = 0.02;   // boundary probability cut-off, in (0, 1]
  std::size_t max_len = 256;  // maximum sentence length in code points

  // Throws InvalidConfig when a field is out of range.
  void validate() const;
};

// Per-character boundary model: scores[i] is the probability that a sentence
// boundary follows code point i. Implementations must return exactly one
// score in [0, 1] per code point.
class BoundaryScorer {
 public:
  virtual ~BoundaryScorer() = default;
  virtual std::vector<double> scores(std::u32string_view text) const = 0;
};

// Weight-free default: 1.0 after '.', '!', '?', '؟' or '।' when followed by
// whitespace or end of text, and after the CJK full-width terminators
// '。', '！', '？' unconditionally (CJK text has no inter-sentence spaces).
class RuleBoundaryScorer final : public BoundaryScorer {
 public:
  std::vector<double> scores(std::u32string_view text) const override;
};

// Cuts after every position scoring >= threshold, trims whitespace, drops
// empty pieces and hard-wraps anything longer than max_len code points into
// consecutive chunks of at most max_len.
std::vector<std::string> split(std::string_view text, const BoundaryScorer& scorer,
                               const SegmentationConfig& config);

}  // namespace clm
