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

#include "clm/codec/socket_codec.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cstring>
#include <json.hpp>
#include <memory>
#include <vector>

#include "clm/common/error.hpp"

namespace clm {
namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

bool send_all(int fd, const void* data, std::size_t size) {
  const auto* p = static_cast<const char*>(data);
  while (size > 0) {
    const ssize_t n = ::send(fd, p, size, MSG_NOSIGNAL);
    if (n <= 0) return false;
    p += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

bool recv_all(int fd, void* data, std::size_t size) {
  auto* p = static_cast<char*>(data);
  while (size > 0) {
    const ssize_t n = ::recv(fd, p, size, 0);
    if (n <= 0) return false;
    p += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

SocketCodec::SocketCodec(std::string host, std::uint16_t port, std::size_t dimension,
                         std::set<std::string, std::less<>> languages)
    : host_(std::move(host)), port_(port), dimension_(dimension), languages_(std::move(languages)) {
  if (dimension_ == 0) fail(ErrorCode::kInvalidConfig, "codec dimension must be positive");
}

Embedding SocketCodec::encode(std::string_view text, std::string_view lang) const {
  validate_encode_input(text, lang, languages_);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(port_);
  if (::getaddrinfo(host_.c_str(), port.c_str(), &hints, &found) != 0 || found == nullptr) {
    fail(ErrorCode::kIoError, "cannot resolve encoder host " + host_);
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> addresses(found, &::freeaddrinfo);
  Fd fd(::socket(found->ai_family, found->ai_socktype, found->ai_protocol));
  if (fd.get() < 0 || ::connect(fd.get(), found->ai_addr, found->ai_addrlen) != 0) {
    fail(ErrorCode::kIoError, "cannot connect to encoder at " + host_ + ":" + port);
  }

  const std::string payload =
      nlohmann::json{{"text", std::string(text)}, {"lang", std::string(lang)}}.dump();
  std::vector<unsigned char> frame;
  frame.reserve(4 + payload.size());
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  frame.insert(frame.end(), payload.begin(), payload.end());
  if (!send_all(fd.get(), frame.data(), frame.size())) {
    fail(ErrorCode::kIoError, "failed to send request to encoder");
  }
  ::shutdown(fd.get(), SHUT_WR);

  std::vector<unsigned char> reply(4 * dimension_);
  if (!recv_all(fd.get(), reply.data(), reply.size())) {
    fail(ErrorCode::kIoError, "encoder closed the connection for lang '" + std::string(lang) + "'");
  }
  // One request per connection and the write side is already shut, so the
  // server closes after its reply; any extra byte means its dimension
  // differs from ours.
  char extra = 0;
  if (::recv(fd.get(), &extra, 1, 0) > 0) {
    fail(ErrorCode::kDimensionMismatch,
         "encoder returned more than " + std::to_string(dimension_) + " values");
  }
  std::vector<float> values(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) {
    values[i] = std::bit_cast<float>(get_u32(reply.data() + 4 * i));
  }
  Embedding e(std::move(values));
  if (!all_finite(e)) fail(ErrorCode::kNumericalError, "encoder returned non-finite values");
  return e;
}

std::string SocketCodec::describe() const {
  return "socket(" + host_ + ":" + std::to_string(port_) + ",d=" + std::to_string(dimension_) + ")";
}

CodecFrameServer::CodecFrameServer(const ConceptCodec& codec, std::uint16_t port) : codec_(codec) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail(ErrorCode::kIoError, "socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    fail(ErrorCode::kIoError, "cannot listen on port " + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { serve(); });
}

CodecFrameServer::~CodecFrameServer() {
  stopping_ = true;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (thread_.joinable()) thread_.join();
  ::close(listen_fd_);
}

void CodecFrameServer::serve() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, 50);
    if (ready <= 0) continue;
    const int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) continue;
    Fd guard(client);
    handle(client);
  }
}

void CodecFrameServer::handle(int fd) {
  for (;;) {
    unsigned char header[4];
    if (!recv_all(fd, header, 4)) return;
    std::string payload(get_u32(header), '\0');
    if (!recv_all(fd, payload.data(), payload.size())) return;
    try {
      const auto request = nlohmann::json::parse(payload);
      const Embedding e = codec_.encode(request.at("text").get<std::string>(),
                                        request.at("lang").get<std::string>());
      std::vector<unsigned char> reply;
      reply.reserve(4 * e.dimension());
      for (float v : e.values()) put_u32(reply, std::bit_cast<std::uint32_t>(v));
      if (!send_all(fd, reply.data(), reply.size())) return;
      ++served_;
    } catch (const std::exception&) {
      return;
    }
  }
}

}  // namespace clm
