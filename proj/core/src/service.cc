// Copyright 2026 The beacon_recon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "beacon_recon/service.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "json.hpp"

namespace beacon_recon {
namespace {

std::string LocusKey(const std::string& chromosome, std::uint64_t position) {
  return chromosome + '\t' + std::to_string(position);
}

std::string BadRequest(const std::string& message) {
  return nlohmann::json{{"error", "bad_request"}, {"message", message}}.dump();
}

std::pair<std::string, std::uint16_t> SplitAddress(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) {
    throw Error("address must be host:port, got '" + address + "'");
  }
  std::string host = address.substr(0, colon);
  if (host.empty() || host == "localhost") host = "127.0.0.1";
  const std::string port_text = address.substr(colon + 1);
  char* end = nullptr;
  const unsigned long port = std::strtoul(port_text.c_str(), &end, 10);
  if (port_text.empty() || *end != '\0' || port > 65535) {
    throw Error("invalid port in '" + address + "'");
  }
  return {host, static_cast<std::uint16_t>(port)};
}

sockaddr_in ResolveIpv4(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &found) != 0 || !found) {
    throw TransportError("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(found->ai_addr)->sin_addr;
  freeaddrinfo(found);
  return addr;
}

bool SendAll(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

LocusIndex::LocusIndex(std::span<const SnpDef> panel) {
  index_.reserve(panel.size());
  for (std::size_t j = 0; j < panel.size(); ++j) {
    index_.emplace(LocusKey(panel[j].chromosome, panel[j].position), j);
  }
}

std::optional<std::size_t> LocusIndex::Find(const std::string& chromosome,
                                            std::uint64_t position) const {
  auto it = index_.find(LocusKey(chromosome, position));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string HandleRequestLine(const BeaconState& beacon, const LocusIndex& loci,
                              const std::string& line) {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    return BadRequest("request is not valid JSON");
  }
  if (!request.is_object()) return BadRequest("request must be a JSON object");
  if (request.contains("op")) {
    if (request["op"] != "meta") return BadRequest("unknown op");
    return nlohmann::json{{"member_count", beacon.size()},
                          {"version", beacon.version()}}
        .dump();
  }
  const auto chromosome = request.find("chromosome");
  const auto position = request.find("position");
  if (chromosome == request.end() || !chromosome->is_string()) {
    return BadRequest("missing string field 'chromosome'");
  }
  if (position == request.end() || !position->is_number_integer() ||
      position->get<std::int64_t>() < 0) {
    return BadRequest("missing non-negative integer field 'position'");
  }
  if (request.contains("allele") && !request["allele"].is_string()) {
    return BadRequest("field 'allele' must be a string");
  }
  const auto locus = loci.Find(chromosome->get<std::string>(),
                               position->get<std::uint64_t>());
  const bool exists = locus && beacon.Query(*locus) == Answer::kYes;
  return nlohmann::json{{"exists", exists}}.dump();
}

BeaconServer::BeaconServer(BeaconState beacon, const std::string& bind_address)
    : beacon_(std::move(beacon)), loci_(*beacon_.panel()) {
  auto [host, port] = SplitAddress(bind_address);
  host_ = host;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = ResolveIpv4(host, port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw TransportError("cannot bind " + bind_address + ": " + reason);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { AcceptLoop(); });
}

BeaconServer::~BeaconServer() { Stop(); }

std::string BeaconServer::endpoint() const {
  return host_ + ":" + std::to_string(port_);
}

void BeaconServer::Stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
  {
    std::lock_guard<std::mutex> lock(connections_mutex_);
    for (int fd : connection_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& worker : workers_) {
    if (worker.joinable()) worker.join();
  }
  workers_.clear();
}

void BeaconServer::AcceptLoop() {
  while (!stopping_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 50);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard<std::mutex> lock(connections_mutex_);
    connection_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { ServeConnection(fd); });
  }
}

void BeaconServer::ServeConnection(int fd) {
  std::string buffer;
  char chunk[4096];
  while (!stopping_.load()) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t newline;
    while ((newline = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, newline);
      buffer.erase(0, newline + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string response;
      {
        std::shared_lock<std::shared_mutex> lock(state_mutex_);
        response = HandleRequestLine(beacon_, loci_, line);
      }
      ++requests_served_;
      if (!SendAll(fd, response + "\n")) break;
    }
  }
  std::lock_guard<std::mutex> lock(connections_mutex_);
  std::erase(connection_fds_, fd);
  ::close(fd);
}

void BeaconServer::ApplyUpdate(std::span<const Genotype> add,
                               std::span<const std::string> remove) {
  std::unique_lock<std::shared_mutex> lock(state_mutex_);
  beacon_ = beacon_.Update(add, remove);
}

BeaconState BeaconServer::Current() const {
  std::shared_lock<std::shared_mutex> lock(state_mutex_);
  return beacon_;
}

std::uint64_t BeaconServer::StateFingerprint() const {
  std::shared_lock<std::shared_mutex> lock(state_mutex_);
  return beacon_.Fingerprint();
}

BeaconClient::BeaconClient(std::string endpoint, Options options)
    : options_(options) {
  auto [host, port] = SplitAddress(endpoint);
  host_ = host;
  port_ = port;
}

BeaconClient::~BeaconClient() { Disconnect(); }

void BeaconClient::Connect() {
  if (fd_ >= 0) return;
  const sockaddr_in addr = ResolveIpv4(host_, port_);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket() failed");
  timeval tv{};
  tv.tv_sec = options_.io_timeout.count() / 1000;
  tv.tv_usec = (options_.io_timeout.count() % 1000) * 1000;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(fd);
    throw TransportError("cannot connect to " + host_ + ":" +
                         std::to_string(port_) + ": " + reason);
  }
  fd_ = fd;
  buffer_.clear();
}

void BeaconClient::Disconnect() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

std::string BeaconClient::RoundTripOnce(const std::string& line) {
  Connect();
  if (!SendAll(fd_, line + "\n")) {
    Disconnect();
    throw TransportError("send failed");
  }
  char chunk[4096];
  std::size_t newline;
  while ((newline = buffer_.find('\n')) == std::string::npos) {
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      Disconnect();
      throw TransportError("connection closed before response");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  std::string response = buffer_.substr(0, newline);
  buffer_.erase(0, newline + 1);
  return response;
}

std::string BeaconClient::RoundTrip(const std::string& line) {
  for (int attempt = 0;; ++attempt) {
    try {
      return RoundTripOnce(line);
    } catch (const TransportError&) {
      if (attempt >= options_.retries) throw;
      std::this_thread::sleep_for(options_.retry_delay);
    }
  }
}

namespace {

nlohmann::json ParseResponse(const std::string& text) {
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("bad_response", "response is not valid JSON");
  }
  if (!response.is_object()) {
    throw ProtocolError("bad_response", "response must be an object");
  }
  if (response.contains("error")) {
    throw ProtocolError(response["error"].get<std::string>(),
                        response.value("message", std::string()));
  }
  return response;
}

}  // namespace

bool BeaconClient::Query(const QueryRequest& request) {
  const nlohmann::json body{{"chromosome", request.chromosome},
                            {"position", request.position},
                            {"allele", request.allele}};
  const auto response = ParseResponse(RoundTrip(body.dump()));
  const auto exists = response.find("exists");
  if (exists == response.end() || !exists->is_boolean()) {
    throw ProtocolError("bad_response", "missing boolean 'exists'");
  }
  return exists->get<bool>();
}

BeaconMetadata BeaconClient::Metadata() {
  const auto response = ParseResponse(RoundTrip(R"({"op":"meta"})"));
  try {
    return {response.at("member_count").get<std::size_t>(),
            response.at("version").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("bad_response", "malformed metadata");
  }
}

Snapshot BeaconClient::ScanSnapshot(
    std::span<const SnpDef> panel,
    const std::function<void(std::size_t)>& after_query) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const BeaconMetadata before = Metadata();
    Snapshot snap;
    snap.answers.reserve(panel.size());
    for (std::size_t j = 0; j < panel.size(); ++j) {
      const bool yes = Query({panel[j].chromosome, panel[j].position, ""});
      snap.answers.push_back(yes ? Answer::kYes : Answer::kNo);
      if (after_query) after_query(j);
    }
    const BeaconMetadata after = Metadata();
    if (before.version == after.version) {
      snap.version = after.version;
      snap.member_count = after.member_count;
      return snap;
    }
  }
  throw TornSnapshotError();
}

}  // namespace beacon_recon
