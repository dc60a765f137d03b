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

// Line-delimited JSON beacon protocol over TCP.
//
//   {"chromosome": "1", "position": 12345, "allele": "A"}  ->  {"exists": true}
//   {"op": "meta"}  ->  {"member_count": 51, "version": 2}
//
// Malformed requests get {"error": "bad_request", "message": "..."}. A
// (chromosome, position) that is not on the panel answers {"exists": false}.

#ifndef BEACON_RECON_SERVICE_H_
#define BEACON_RECON_SERVICE_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "beacon_recon/beacon.h"
#include "beacon_recon/common.h"

namespace beacon_recon {

class TransportError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  ProtocolError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class TornSnapshotError : public Error {
 public:
  TornSnapshotError() : Error("torn snapshot") {}
};

struct QueryRequest {
  std::string chromosome;
  std::uint64_t position = 0;
  std::string allele;
};

struct BeaconMetadata {
  std::size_t member_count = 0;
  std::uint64_t version = 0;
};

// (chromosome, position) -> panel locus.
class LocusIndex {
 public:
  explicit LocusIndex(std::span<const SnpDef> panel);
  std::optional<std::size_t> Find(const std::string& chromosome,
                                  std::uint64_t position) const;

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Answers one protocol line against a beacon; exposed for testing the wire
// format without sockets.
std::string HandleRequestLine(const BeaconState& beacon, const LocusIndex& loci,
                              const std::string& line);

class BeaconServer {
 public:
  // Binds "host:port" (port 0 picks a free port) and starts serving.
  BeaconServer(BeaconState beacon, const std::string& bind_address);
  ~BeaconServer();

  BeaconServer(const BeaconServer&) = delete;
  BeaconServer& operator=(const BeaconServer&) = delete;

  void Stop();

  std::uint16_t port() const { return port_; }
  std::string endpoint() const;

  // Applies an update between requests.
  void ApplyUpdate(std::span<const Genotype> add,
                   std::span<const std::string> remove);
  BeaconState Current() const;
  std::uint64_t StateFingerprint() const;
  std::size_t requests_served() const { return requests_served_.load(); }

 private:
  void AcceptLoop();
  void ServeConnection(int fd);

  mutable std::shared_mutex state_mutex_;
  BeaconState beacon_;
  LocusIndex loci_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> requests_served_{0};
  std::thread acceptor_;
  std::mutex connections_mutex_;
  std::vector<int> connection_fds_;
  std::vector<std::thread> workers_;
};

class BeaconClient {
 public:
  struct Options {
    int retries = 3;
    std::chrono::milliseconds retry_delay{20};
    std::chrono::milliseconds io_timeout{5000};
  };

  explicit BeaconClient(std::string endpoint) : BeaconClient(std::move(endpoint), Options{}) {}
  BeaconClient(std::string endpoint, Options options);
  ~BeaconClient();

  BeaconClient(const BeaconClient&) = delete;
  BeaconClient& operator=(const BeaconClient&) = delete;

  bool Query(const QueryRequest& request);
  BeaconMetadata Metadata();

  // One query per panel locus, bracketed by metadata reads. A version change
  // during the scan triggers one retry, then TornSnapshotError.
  // `after_query` (for instrumentation) sees the locus index just queried.
  Snapshot ScanSnapshot(std::span<const SnpDef> panel,
                        const std::function<void(std::size_t)>& after_query = {});

 private:
  std::string RoundTrip(const std::string& line);
  std::string RoundTripOnce(const std::string& line);
  void Connect();
  void Disconnect();

  std::string host_;
  std::uint16_t port_ = 0;
  Options options_;
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace beacon_recon

#endif  // BEACON_RECON_SERVICE_H_
