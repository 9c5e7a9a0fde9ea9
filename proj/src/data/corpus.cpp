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

#include "clm/data/corpus.hpp"

#include <fstream>
#include <functional>
#include <json.hpp>

#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"

namespace clm {
namespace {

using nlohmann::json;

template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path, const std::function<T(const json&)>& parse) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormatError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
  binio::write_atomically(path, [&](std::ostream& out) {
    for (const auto& row : rows) out << row.dump() << '\n';
  });
}

std::string field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    fail(ErrorCode::kFormatError, std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

}  // namespace

std::vector<Document> read_documents(const std::filesystem::path& path) {
  return read_jsonl<Document>(path, [](const json& j) {
    return Document{field(j, "id"), field(j, "lang"), field(j, "text")};
  });
}

std::vector<Conversation> read_conversations(const std::filesystem::path& path) {
  return read_jsonl<Conversation>(path, [](const json& j) {
    Conversation c;
    c.id = field(j, "id");
    c.lang = field(j, "lang");
    if (j.contains("source") && j.at("source").is_string()) c.source = j.at("source").get<std::string>();
    if (!j.contains("turns") || !j.at("turns").is_array()) fail(ErrorCode::kFormatError, "missing array 'turns'");
    for (const auto& t : j.at("turns")) c.turns.push_back({field(t, "role"), field(t, "text")});
    return c;
  });
}

std::vector<ParallelPair> read_parallel_pairs(const std::filesystem::path& path) {
  return read_jsonl<ParallelPair>(path, [](const json& j) {
    return ParallelPair{field(j, "eng"), field(j, "text"), field(j, "lang")};
  });
}

std::vector<SegmentedDocument> read_segmented(const std::filesystem::path& path) {
  return read_jsonl<SegmentedDocument>(path, [](const json& j) {
    SegmentedDocument d{field(j, "id"), field(j, "lang"), {}};
    if (!j.contains("sentences") || !j.at("sentences").is_array()) {
      fail(ErrorCode::kFormatError, "missing array 'sentences'");
    }
    for (const auto& s : j.at("sentences")) d.sentences.push_back(s.get<std::string>());
    return d;
  });
}

void write_documents(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::vector<json> rows;
  for (const auto& d : docs) rows.push_back({{"id", d.id}, {"lang", d.lang}, {"text", d.text}});
  write_jsonl(path, rows);
}

void write_conversations(const std::filesystem::path& path, const std::vector<Conversation>& convs) {
  std::vector<json> rows;
  for (const auto& c : convs) {
    json turns = json::array();
    for (const auto& t : c.turns) turns.push_back({{"role", t.role}, {"text", t.text}});
    json row{{"id", c.id}, {"lang", c.lang}, {"turns", turns}};
    if (!c.source.empty()) row["source"] = c.source;
    rows.push_back(std::move(row));
  }
  write_jsonl(path, rows);
}

void write_segmented(const std::filesystem::path& path, const std::vector<SegmentedDocument>& docs) {
  std::vector<json> rows;
  for (const auto& d : docs) rows.push_back({{"id", d.id}, {"lang", d.lang}, {"sentences", d.sentences}});
  write_jsonl(path, rows);
}

}  // namespace clm
