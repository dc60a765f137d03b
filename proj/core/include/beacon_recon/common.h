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

#ifndef BEACON_RECON_COMMON_H_
#define BEACON_RECON_COMMON_H_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace beacon_recon {

// Thrown for contract violations on inputs (malformed files, bad arguments,
// inconsistent configuration). The message names the failing condition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic pseudo-random source. The distribution helpers below are
// implemented here rather than taken from <random> so that seeded output is
// identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) { Seed(seed); }

  void Seed(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the xoshiro state.
    for (auto& word : state_) {
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  // xoshiro256**
  result_type operator()() {
    const std::uint64_t result = Rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = Rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t Below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t draw;
    do {
      draw = (*this)();
    } while (draw >= limit);
    return draw % bound;
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Below(i)]);
    }
  }

  // Derives an independent child seed; used to give each trial or restart its
  // own stream.
  std::uint64_t Fork() { return (*this)() ^ 0xd1b54a32d192ed03ULL; }

 private:
  static std::uint64_t Rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4] = {};
};

// FNV-1a, used for content hashes (cache keys, state fingerprints).
class Fnv1a {
 public:
  void Add(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void AddValue(const T& value) {
    Add(&value, sizeof(T));
  }
  void AddString(const std::string& s) {
    AddValue(s.size());
    Add(s.data(), s.size());
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace beacon_recon

#endif  // BEACON_RECON_COMMON_H_
