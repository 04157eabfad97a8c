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

#include "fllab/secagg/secure_agg.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <sodium.h>

#include "fllab/util/error.h"
#include "fllab/util/rng.h"

namespace fllab {
namespace {

void EnsureSodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error("libsodium failed to initialize");
}

std::pair<int, int> Ordered(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

void PutLe32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetLe32(const uint8_t* p) {
  return uint32_t{p[0]} | (uint32_t{p[1]} << 8) | (uint32_t{p[2]} << 16) | (uint32_t{p[3]} << 24);
}

double CenteredLift(uint32_t v) {
  return v >= 0x80000000u ? static_cast<double>(v) - kRingModulus : static_cast<double>(v);
}

}  // namespace

QuantSpec QuantSpec::ForUsers(int num_users, double scale) {
  if (num_users < 1) throw ConfigError("quantization needs at least one user");
  if (!(scale >= 1.0)) throw ConfigError(fmt::format("quantization scale {} must be >= 1", scale));
  return QuantSpec{scale, kRingModulus / (4.0 * scale * num_users)};
}

void QuantSpec::CheckNoWrap(int num_users) const {
  if (!(scale >= 1.0) || !(clip > 0.0)) {
    throw ConfigError(fmt::format("invalid quantization: scale {} clip {}", scale, clip));
  }
  if (!(num_users * scale * clip < kRingModulus / 2.0)) {
    throw ConfigError(fmt::format(
        "aggregate may wrap: N * s * c = {} * {} * {} is not below R/2", num_users, scale, clip));
  }
}

QuantizeResult Quantize(std::span<const double> x, const QuantSpec& spec) {
  QuantizeResult r{RingVector(x.size()), 0};
  for (size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw InvalidArgument(fmt::format("non-finite update at {}", i));
    double v = x[i];
    if (std::abs(v) > spec.clip) {
      v = std::copysign(spec.clip, v);
      ++r.clipped;
    }
    r.q[i] = static_cast<uint32_t>(static_cast<int64_t>(std::llround(spec.scale * v)));
  }
  return r;
}

std::vector<double> Dequantize(std::span<const uint32_t> ring, int count, const QuantSpec& spec) {
  if (count < 1) throw InvalidArgument("dequantize needs count >= 1");
  std::vector<double> out(ring.size());
  const double denom = spec.scale * count;
  for (size_t i = 0; i < ring.size(); ++i) out[i] = CenteredLift(ring[i]) / denom;
  return out;
}

double SaTolerance(const QuantSpec& spec, int /*num_users*/) { return 0.5 / spec.scale; }

PairwiseSeedTable PairwiseSeedTable::Generate(int num_users, uint64_t seed) {
  PairwiseSeedTable t;
  for (int a = 0; a < num_users; ++a) {
    for (int b = a + 1; b < num_users; ++b) {
      Rng rng = MakeRng(seed, {0x5ec, static_cast<uint64_t>(a), static_cast<uint64_t>(b)});
      PairKey key;
      for (size_t i = 0; i < key.size(); i += 8) {
        const uint64_t w = rng();
        for (size_t j = 0; j < 8; ++j) key[i + j] = static_cast<uint8_t>(w >> (8 * j));
      }
      t.Set(a, b, key);
    }
  }
  return t;
}

void PairwiseSeedTable::Set(int a, int b, const PairKey& key) {
  if (a == b) throw InvalidArgument("a user does not share a seed with itself");
  keys_[Ordered(a, b)] = key;
}

bool PairwiseSeedTable::Has(int a, int b) const { return keys_.count(Ordered(a, b)) > 0; }

const PairKey& PairwiseSeedTable::Get(int a, int b) const {
  auto it = keys_.find(Ordered(a, b));
  if (it == keys_.end()) throw InvalidArgument(fmt::format("no pairwise seed for users {} and {}", a, b));
  return it->second;
}

RingVector PairMask(const PairKey& key, uint32_t round, size_t d) {
  EnsureSodium();
  std::array<uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  for (int i = 0; i < 4; ++i) nonce[static_cast<size_t>(i)] = static_cast<uint8_t>(round >> (8 * i));
  std::vector<uint8_t> stream(4 * d);
  crypto_stream_chacha20_ietf(stream.data(), stream.size(), nonce.data(), key.data());
  RingVector out(d);
  for (size_t i = 0; i < d; ++i) out[i] = GetLe32(stream.data() + 4 * i);
  return out;
}

MaskedUpdate Mask(std::span<const uint32_t> q, int user_id, std::span<const int> peers,
                  uint32_t round, const PairwiseSeedTable& table) {
  MaskedUpdate m{static_cast<uint32_t>(user_id), round, RingVector(q.begin(), q.end()),
                 std::vector<int>(peers.begin(), peers.end())};
  for (int j : peers) {
    if (j == user_id) continue;
    const RingVector prg = PairMask(table.Get(user_id, j), round, q.size());
    // Unsigned arithmetic is exactly arithmetic mod 2^32.
    if (j > user_id) {
      for (size_t k = 0; k < q.size(); ++k) m.y[k] += prg[k];
    } else {
      for (size_t k = 0; k < q.size(); ++k) m.y[k] -= prg[k];
    }
  }
  return m;
}

DecodeResult DecodeAggregate(std::span<const MaskedUpdate> received, std::span<const int> survivors,
                             const PairwiseSeedTable& table, const QuantSpec& spec) {
  if (survivors.empty()) throw InvalidArgument("no surviving users to decode");
  const std::set<int> alive(survivors.begin(), survivors.end());
  if (alive.size() != survivors.size()) throw InvalidArgument("duplicate user in surviving set");
  std::set<int> seen;
  size_t d = 0;
  uint32_t round = 0;
  for (const auto& m : received) {
    const int id = static_cast<int>(m.user_id);
    if (!alive.count(id)) {
      throw InvalidArgument(fmt::format("message from user {} who is not in the surviving set", id));
    }
    if (!seen.insert(id).second) throw InvalidArgument(fmt::format("two messages from user {}", id));
    if (seen.size() == 1) {
      d = m.y.size();
      round = m.round;
    } else if (m.y.size() != d || m.round != round) {
      throw InvalidArgument("masked updates disagree on length or round");
    }
  }
  if (seen.size() != alive.size()) {
    throw InvalidArgument(fmt::format("{} survivors declared but {} messages received", alive.size(),
                                      seen.size()));
  }
  DecodeResult r{RingVector(d, 0u), {}};
  for (const auto& m : received) {
    for (size_t k = 0; k < d; ++k) r.ring_sum[k] += m.y[k];
    const int i = static_cast<int>(m.user_id);
    for (int j : m.peers) {
      if (j == i || alive.count(j)) continue;
      // Dropped peer j: its masks never arrive, so remove i's half.
      const RingVector prg = PairMask(table.Get(i, j), round, d);
      if (j > i) {
        for (size_t k = 0; k < d; ++k) r.ring_sum[k] -= prg[k];
      } else {
        for (size_t k = 0; k < d; ++k) r.ring_sum[k] += prg[k];
      }
    }
  }
  const int count = static_cast<int>(alive.size());
  const double limit = count * spec.scale * spec.clip + 0.5 * count;
  for (size_t k = 0; k < d; ++k) {
    if (std::abs(CenteredLift(r.ring_sum[k])) > limit) {
      throw NumericalError(fmt::format("aggregate coordinate {} exceeds the no-wrap range", k));
    }
  }
  r.mean = Dequantize(r.ring_sum, count, spec);
  return r;
}

std::vector<uint8_t> SerializeMasked(const MaskedUpdate& m) {
  std::vector<uint8_t> out;
  out.reserve(12 + 4 * m.y.size());
  PutLe32(out, m.user_id);
  PutLe32(out, m.round);
  PutLe32(out, static_cast<uint32_t>(m.y.size()));
  for (uint32_t v : m.y) PutLe32(out, v);
  return out;
}

MaskedUpdate ParseMasked(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12) throw InvalidArgument("masked update shorter than its header");
  MaskedUpdate m;
  m.user_id = GetLe32(bytes.data());
  m.round = GetLe32(bytes.data() + 4);
  const uint32_t d = GetLe32(bytes.data() + 8);
  if (bytes.size() != 12 + 4 * static_cast<size_t>(d)) {
    throw InvalidArgument(fmt::format("masked update declares d={} but carries {} bytes", d,
                                      bytes.size() - 12));
  }
  m.y.resize(d);
  for (uint32_t k = 0; k < d; ++k) m.y[k] = GetLe32(bytes.data() + 12 + 4 * k);
  return m;
}

}  // namespace fllab
