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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Little-endian primitives shared by every on-disk format in the project.
namespace clm::binio {

void write_magic(std::ostream& out, std::string_view magic);
void expect_magic(std::istream& in, std::string_view magic, std::string_view what);

void write_u32(std::ostream& out, std::uint32_t value);
void write_u64(std::ostream& out, std::uint64_t value);
void write_f32(std::ostream& out, float value);
void write_f32s(std::ostream& out, std::span<const float> values);
// u32 byte length followed by the raw bytes.
void write_string(std::ostream& out, std::string_view value);

std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
std::vector<float> read_f32s(std::istream& in, std::size_t count);
std::string read_string(std::istream& in);

// True if the stream has no more bytes to read.
bool at_eof(std::istream& in);

std::ifstream open_input(const std::filesystem::path& path, std::string_view what);
// Writes to "<path>.tmp" and renames over the target, so readers never see
// a half-written file.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

}  // namespace clm::binio
