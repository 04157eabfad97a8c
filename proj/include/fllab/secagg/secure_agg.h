//
// Copyright 2026 The fllab Authors
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
//

#ifndef FLLAB_SECAGG_SECURE_AGG_H_
#define FLLAB_SECAGG_SECURE_AGG_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace fllab {

using RingVector = std::vector<uint32_t>;  // elements of Z_{2^32}

inline constexpr double kRingModulus = 4294967296.0;  // 2^32

// Fixed-point encoding of real updates into Z_R with R = 2^32.
struct QuantSpec {
  double scale = 65536.0;  // s
  double clip = 0.0;       // c; values are clipped to [-c, c]

  // s = scale and c = R / (4 s N): the sum of N clipped updates stays inside
  // (-R/4, R/4) and never wraps.
  static QuantSpec ForUsers(int num_users, double scale = 65536.0);

  // Throws ConfigError unless num_users * s * c < R / 2.
  void CheckNoWrap(int num_users) const;
};

struct QuantizeResult {
  RingVector q;
  int64_t clipped = 0;  // coordinates that hit the clip range
};

QuantizeResult Quantize(std::span<const double> x, const QuantSpec& spec);
// Centered lift of every element, divided by s * count.
std::vector<double> Dequantize(std::span<const uint32_t> ring, int count, const QuantSpec& spec);

// Worst-case per-coordinate error of the decoded mean: 1 / (2 s).
double SaTolerance(const QuantSpec& spec, int num_users);

using PairKey = std::array<uint8_t, 32>;

// Pre-distributed pairwise ChaCha20 keys, one per unordered user pair.
class PairwiseSeedTable {
 public:
  // Keys for every pair of users in [0, num_users), derived from `seed`.
  static PairwiseSeedTable Generate(int num_users, uint64_t seed);

  void Set(int a, int b, const PairKey& key);
  bool Has(int a, int b) const;
  const PairKey& Get(int a, int b) const;  // throws if absent

 private:
  std::map<std::pair<int, int>, PairKey> keys_;
};

// d pseudorandom ring elements from ChaCha20 keyed by `key`, nonce = round.
RingVector PairMask(const PairKey& key, uint32_t round, size_t d);

struct MaskedUpdate {
  uint32_t user_id = 0;
  uint32_t round = 0;
  RingVector y;
  std::vector<int> peers;  // users whose pairwise masks are folded into y
};

// y = q + sum_{j > i} PRG(k_ij, t) - sum_{j < i} PRG(k_ij, t)  (mod R).
MaskedUpdate Mask(std::span<const uint32_t> q, int user_id, std::span<const int> peers,
                  uint32_t round, const PairwiseSeedTable& table);

struct DecodeResult {
  RingVector ring_sum;        // sum of surviving quantized updates
  std::vector<double> mean;   // dequantized mean over survivors
};

// Sums the survivors' messages and strips the masks they share with dropped
// peers, whose pairwise keys are disclosed to the server.
DecodeResult DecodeAggregate(std::span<const MaskedUpdate> received, std::span<const int> survivors,
                             const PairwiseSeedTable& table, const QuantSpec& spec);

// Little-endian u32 header (user_id, round, d) followed by d u32 values.
std::vector<uint8_t> SerializeMasked(const MaskedUpdate& m);
MaskedUpdate ParseMasked(std::span<const uint8_t> bytes);

}  // namespace fllab

#endif  // FLLAB_SECAGG_SECURE_AGG_H_
