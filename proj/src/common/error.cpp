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

#include "clm/common/error.hpp"

namespace clm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSentence: return "InvalidSentence";
    case ErrorCode::kUnknownLanguage: return "UnknownLanguage";
    case ErrorCode::kDegenerateEmbedding: return "DegenerateEmbedding";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kNumericalError: return "NumericalError";
    case ErrorCode::kOptimizerError: return "OptimizerError";
    case ErrorCode::kContextOverflow: return "ContextOverflow";
    case ErrorCode::kBadTimestep: return "BadTimestep";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kMalformedConversation: return "MalformedConversation";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNoPredictablePositions: return "NoPredictablePositions";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kResumeMismatch: return "ResumeMismatch";
    case ErrorCode::kEmptyEvalSet: return "EmptyEvalSet";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace clm
