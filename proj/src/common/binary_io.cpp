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

#include "clm/common/binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "clm/common/error.hpp"

namespace clm::binio {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename U>
void put(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
  if (!out) fail(ErrorCode::kIoError, "write failed");
}

template <typename U>
U get(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    fail(ErrorCode::kFormatError, "unexpected end of binary stream");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void expect_magic(std::istream& in, std::string_view magic, std::string_view what) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic) {
    fail(ErrorCode::kFormatError,
         std::string(what) + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

void write_u32(std::ostream& out, std::uint32_t value) { put(out, value); }
void write_u64(std::ostream& out, std::uint64_t value) { put(out, value); }
void write_f32(std::ostream& out, float value) { put(out, std::bit_cast<std::uint32_t>(value)); }

void write_f32s(std::ostream& out, std::span<const float> values) {
  std::vector<char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (std::size_t b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorCode::kIoError, "write failed");
}

void write_string(std::ostream& out, std::string_view value) {
  write_u32(out, static_cast<std::uint32_t>(value.size()));
  out.write(value.data(), static_cast<std::streamsize>(value.size()));
}

std::uint32_t read_u32(std::istream& in) { return get<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return get<std::uint64_t>(in); }
float read_f32(std::istream& in) { return std::bit_cast<float>(get<std::uint32_t>(in)); }

std::vector<float> read_f32s(std::istream& in, std::size_t count) {
  std::vector<float> values(count);
  for (auto& v : values) v = read_f32(in);
  return values;
}

std::string read_string(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  std::string value(n, '\0');
  in.read(value.data(), n);
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    fail(ErrorCode::kFormatError, "truncated string in binary stream");
  }
  return value;
}

bool at_eof(std::istream& in) {
  return in.peek() == std::char_traits<char>::eof();
}

std::ifstream open_input(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, std::string(what) + ": cannot open " + path.string());
  return in;
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot open " + tmp.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) fail(ErrorCode::kIoError, "write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace clm::binio
