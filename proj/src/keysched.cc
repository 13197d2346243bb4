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

#include "ppkm/keysched.h"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace ppkm {
namespace {

void AppendBe64(std::vector<uint8_t>& out, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void AppendString(std::vector<uint8_t>& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
}

// Reads x and y from a digest, rehashing until they differ.
RoundKeys KeysFromDigest(Digest& digest, int ell1, int64_t round) {
  for (;;) {
    const std::span<const uint8_t> bytes(digest);
    const double x = DigestHalfToReal(bytes.subspan(0, 16), ell1);
    const double y = DigestHalfToReal(bytes.subspan(16, 16), ell1);
    if (x != y) return RoundKeys{x, y, round};
    std::vector<uint8_t> again(digest.begin(), digest.end());
    again.push_back(0x01);
    digest = Sha256(again);
  }
}

}  // namespace

Digest Sha256(std::span<const uint8_t> bytes) {
  Digest out;
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

std::string DigestHex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  for (uint8_t b : digest) {
    s += kHex[b >> 4];
    s += kHex[b & 15];
  }
  return s;
}

double DigestHalfToReal(std::span<const uint8_t> half, int ell1) {
  uint64_t top = 0;
  for (size_t i = 0; i < 8 && i < half.size(); ++i) top = (top << 8) | half[i];
  const double unit = (static_cast<double>(top >> 11) + 0.5) * 0x1.0p-53;
  const double hi = std::ldexp(1.0, ell1);
  // Rounding can land on either endpoint of (1, 2^ell1); keep it open.
  return std::clamp(1.0 + unit * (hi - 1.0), std::nextafter(1.0, hi),
                    std::nextafter(hi, 1.0));
}

RoundKeys InitialKeys(uint64_t owner_seed, int ell1) {
  std::vector<uint8_t> input;
  AppendString(input, "ppkm/init/v1");
  AppendBe64(input, owner_seed);
  Digest digest = Sha256(input);
  return KeysFromDigest(digest, ell1, 1);
}

KeyChainState KeyChainState::Create(const RoundKeys& initial, int ell1) {
  KeyChainState state;
  state.keys = initial;
  state.ell1 = ell1;
  std::vector<uint8_t> input;
  AppendString(input, "ppkm/keys/v1");
  AppendBe64(input, std::bit_cast<uint64_t>(initial.x));
  AppendBe64(input, std::bit_cast<uint64_t>(initial.y));
  state.last_digest = Sha256(input);
  return state;
}

RoundKeys NextKeys(KeyChainState& state, std::span<const uint8_t> round_output) {
  const int64_t next_round = state.keys.round + 1;
  std::vector<uint8_t> input(state.last_digest.begin(), state.last_digest.end());
  input.insert(input.end(), round_output.begin(), round_output.end());
  AppendBe64(input, static_cast<uint64_t>(next_round));
  Digest digest = Sha256(input);
  state.keys = KeysFromDigest(digest, state.ell1, next_round);
  state.last_digest = digest;
  return state.keys;
}

}  // namespace ppkm
