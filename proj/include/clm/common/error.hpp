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

#include <stdexcept>
#include <string>
#include <string_view>

namespace clm {

enum class ErrorCode {
  kInvalidSentence,
  kUnknownLanguage,
  kDegenerateEmbedding,
  kDimensionMismatch,
  kShapeError,
  kNumericalError,
  kOptimizerError,
  kContextOverflow,
  kBadTimestep,
  kEmptyDocument,
  kMalformedConversation,
  kInsufficientData,
  kNoPredictablePositions,
  kEmptyCorpus,
  kResumeMismatch,
  kEmptyEvalSet,
  kInvalidConfig,
  kIoError,
  kFormatError,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as clm::Error; the code identifies the
// contract that was violated, the message carries the specifics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace clm
