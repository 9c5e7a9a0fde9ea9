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

#include <filesystem>
#include <string>
#include <vector>

namespace clm {

// JSON-lines record {id, lang, text}.
struct Document {
  std::string id;
  std::string lang;
  std::string text;
};

struct Turn {
  std::string role;  // "user" or "assistant"
  std::string text;
};

// JSON-lines record {id, lang, turns: [{role, text}], source?}.
struct Conversation {
  std::string id;
  std::string lang;
  std::vector<Turn> turns;
  std::string source;  // optional mixture label
};

// JSON-lines record {eng, text, lang}: an English sentence and its
// translation into `lang`.
struct ParallelPair {
  std::string eng;
  std::string text;
  std::string lang;
};

// Output of the segment step: {id, lang, sentences: [...]}.
struct SegmentedDocument {
  std::string id;
  std::string lang;
  std::vector<std::string> sentences;
};

std::vector<Document> read_documents(const std::filesystem::path& path);
std::vector<Conversation> read_conversations(const std::filesystem::path& path);
std::vector<ParallelPair> read_parallel_pairs(const std::filesystem::path& path);
std::vector<SegmentedDocument> read_segmented(const std::filesystem::path& path);

void write_documents(const std::filesystem::path& path, const std::vector<Document>& docs);
void write_conversations(const std::filesystem::path& path, const std::vector<Conversation>& convs);
void write_segmented(const std::filesystem::path& path, const std::vector<SegmentedDocument>& docs);

}  // namespace clm
