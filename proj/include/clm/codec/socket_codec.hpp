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

#include <atomic>
#include <cstdint>
#include <set>
#include <string>
#include <thread>

#include "clm/codec/codec.hpp"

namespace clm {

// Wire protocol for an external sentence encoder reached over TCP:
//   request:  u32 little-endian payload length, then UTF-8 JSON
//             {"text": ..., "lang": ...}
//   response: `dimension` little-endian f32 values
// A server that cannot encode a request closes the connection without
// replying. Each encode() call uses its own connection, so the client holds
// no mutable state and may be shared across threads.
class SocketCodec final : public ConceptCodec {
 public:
  SocketCodec(std::string host, std::uint16_t port, std::size_t dimension,
              std::set<std::string, std::less<>> languages);

  std::size_t dimension() const override { return dimension_; }
  Embedding encode(std::string_view text, std::string_view lang) const override;
  std::string describe() const override;

 private:
  std::string host_;
  std::uint16_t port_;
  std::size_t dimension_;
  std::set<std::string, std::less<>> languages_;
};

// Serves any ConceptCodec over the frame protocol on 127.0.0.1. Intended
// for bridging and tests; handles connections sequentially.
class CodecFrameServer {
 public:
  // port 0 binds an ephemeral port; see port().
  CodecFrameServer(const ConceptCodec& codec, std::uint16_t port = 0);
  ~CodecFrameServer();

  CodecFrameServer(const CodecFrameServer&) = delete;
  CodecFrameServer& operator=(const CodecFrameServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::size_t requests_served() const { return served_.load(); }

 private:
  void serve();
  void handle(int fd);

  const ConceptCodec& codec_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> served_{0};
  std::thread thread_;
};

}  // namespace clm
