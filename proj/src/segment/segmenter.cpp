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

#include "clm/segment/segmenter.hpp"

#include "clm/common/error.hpp"
#include "clm/common/utf8.hpp"

namespace clm {

void SegmentationConfig::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::kInvalidConfig, "segment.threshold must be in (0, 1]");
  }
  if (max_len < 1) fail(ErrorCode::kInvalidConfig, "segment.max_len must be >= 1");
}

std::vector<double> RuleBoundaryScorer::scores(std::u32string_view text) const {
  std::vector<double> out(text.size(), 0.0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    const bool at_end_or_space = i + 1 == text.size() || utf8::is_space(text[i + 1]);
    switch (c) {
      case U'.':
      case U'!':
      case U'?':
      case U'؟':
      case U'।':
        if (at_end_or_space) out[i] = 1.0;
        break;
      case U'。':
      case U'！':
      case U'？':
        out[i] = 1.0;
        break;
      default:
        break;
    }
  }
  return out;
}

namespace {

void emit(std::u32string_view piece, std::size_t max_len, std::vector<std::string>& out) {
  piece = utf8::trim(piece);
  for (std::size_t start = 0; start < piece.size(); start += max_len) {
    const auto chunk = utf8::trim(piece.substr(start, max_len));
    if (!chunk.empty()) out.push_back(utf8::encode(chunk));
  }
}

}  // namespace

std::vector<std::string> split(std::string_view text, const BoundaryScorer& scorer,
                               const SegmentationConfig& config) {
  config.validate();
  const std::u32string cps = utf8::decode(text);
  const std::vector<double> scores = scorer.scores(cps);
  if (scores.size() != cps.size()) {
    fail(ErrorCode::kShapeError, "boundary scorer returned " + std::to_string(scores.size()) +
                                     " scores for " + std::to_string(cps.size()) + " characters");
  }
  std::vector<std::string> sentences;
  const std::u32string_view view(cps);
  std::size_t begin = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      fail(ErrorCode::kNumericalError, "boundary score outside [0, 1]");
    }
    if (scores[i] >= config.threshold) {
      emit(view.substr(begin, i + 1 - begin), config.max_len, sentences);
      begin = i + 1;
    }
  }
  emit(view.substr(begin), config.max_len, sentences);
  return sentences;
}

}  // namespace clm
