// Copyright 2026 The ppkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PPKM_KEYSCHED_H_
#define PPKM_KEYSCHED_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace ppkm {

using Digest = std::array<uint8_t, 32>;

Digest Sha256(std::span<const uint8_t> bytes);
std::string DigestHex(const Digest& digest);

// Masking pair for one round: x scales coordinate sums, y scales counts.
struct RoundKeys {
  double x = 1.0;
  double y = 1.0;
  int64_t round = 1;

  friend bool operator==(const RoundKeys&, const RoundKeys&) = default;
};

// Maps 16 digest bytes onto (1, 2^ell1): the top 53 bits of the big-endian
// integer select a point on a uniform grid over the interval.
double DigestHalfToReal(std::span<const uint8_t> half, int ell1);

// Round-1 keys distributed by the owner. Deterministic in `owner_seed`;
// x != y is enforced by rehashing.
RoundKeys InitialKeys(uint64_t owner_seed, int ell1 = 64);

// Per-server key chain. Every compute server holds its own copy; agreement
// comes from feeding identical inputs.
//
// Wire-fixed layout:
//   initial digest  = SHA-256("ppkm/keys/v1" || be64(bits(x1)) || be64(bits(y1)))
//   next digest     = SHA-256(last_digest || payload || be64(next_round))
//   x = DigestHalfToReal(digest[0..16)), y = DigestHalfToReal(digest[16..32))
//   on x == y       : digest = SHA-256(digest || 0x01), repeat
struct KeyChainState {
  RoundKeys keys;
  Digest last_digest{};
  int ell1 = 64;

  static KeyChainState Create(const RoundKeys& initial, int ell1 = 64);
};

// Advances `state` to the next round using the previous round's output
// (the canonical centroid payload) and returns the new keys.
RoundKeys NextKeys(KeyChainState& state, std::span<const uint8_t> round_output);

// Seam for agreeing on round-1 keys. Only owner distribution is provided.
class InitialKeySource {
 public:
  virtual ~InitialKeySource() = default;
  virtual RoundKeys Keys() const = 0;
};

class OwnerDistributedKeys : public InitialKeySource {
 public:
  OwnerDistributedKeys(uint64_t seed, int ell1) : seed_(seed), ell1_(ell1) {}
  RoundKeys Keys() const override { return InitialKeys(seed_, ell1_); }

 private:
  uint64_t seed_;
  int ell1_;
};

}  // namespace ppkm

#endif  // PPKM_KEYSCHED_H_
