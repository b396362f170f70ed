// Copyright 2026 The fpmon Authors.
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

// Shared public coin: level sets S_l^z realized on demand from a keyed hash,
// and the bucket-to-level rule used by the coordinator.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpmon/core.hpp"
#include "fpmon/random.hpp"

namespace fpmon {

using Level = int;

/// Smallest L with 2^L >= x (0 for x <= 1).
constexpr int ceil_log2(std::uint64_t x) noexcept {
  return x <= 1 ? 0 : 64 - std::countl_zero(x - 1);
}

/// Each coordinate j belongs to S_l^z independently with probability 2^-l.
/// Membership is a pure function of (master_seed, z, l, j); distinct (z, l)
/// pairs use unrelated hash keys, so level sets are not nested.
class PublicCoin {
 public:
  PublicCoin(std::uint64_t master_seed, std::uint32_t repetitions, std::uint64_t dimension)
      : master_seed_(master_seed),
        repetitions_(repetitions),
        dimension_(dimension),
        max_level_(ceil_log2(dimension)) {
    if (repetitions == 0) throw std::invalid_argument("PublicCoin: repetitions must be >= 1");
    if (dimension == 0) throw std::invalid_argument("PublicCoin: dimension must be >= 1");
    if (max_level_ > 63) throw std::invalid_argument("PublicCoin: dimension too large");
    keys_.reserve(static_cast<std::size_t>(repetitions) * levels());
    for (std::uint32_t z = 1; z <= repetitions; ++z) {
      for (Level l = 0; l <= max_level_; ++l) {
        keys_.push_back(hash_words(master_seed, 0x5e7, z, static_cast<std::uint64_t>(l)));
      }
    }
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint32_t repetitions() const noexcept { return repetitions_; }
  std::uint64_t dimension() const noexcept { return dimension_; }
  Level max_level() const noexcept { return max_level_; }
  int levels() const noexcept { return max_level_ + 1; }

  /// Range-checked membership query; z is 1-based.
  bool in_sample(std::uint32_t z, Level l, Coordinate j) const {
    if (z < 1 || z > repetitions_) {
      throw std::out_of_range("in_sample: repetition " + std::to_string(z) + " outside [1, " +
                              std::to_string(repetitions_) + "]");
    }
    if (l < 0 || l > max_level_) {
      throw std::out_of_range("in_sample: level " + std::to_string(l) + " outside [0, " +
                              std::to_string(max_level_) + "]");
    }
    if (j >= dimension_) {
      throw std::out_of_range("in_sample: coordinate " + std::to_string(j) + " outside [0, " +
                              std::to_string(dimension_) + ")");
    }
    return contains(z, l, j);
  }

  // Unchecked hot-path variant.
  bool contains(std::uint32_t z, Level l, Coordinate j) const noexcept {
    if (l == 0) return true;
    const std::uint64_t key = keys_[static_cast<std::size_t>(z - 1) * levels() + l];
    const std::uint64_t h = mix64(key + j * 0x9e3779b97f4a7c15ULL);
    return (h >> (64 - l)) == 0;
  }

 private:
  std::uint64_t master_seed_;
  std::uint32_t repetitions_;
  std::uint64_t dimension_;
  Level max_level_;
  std::vector<std::uint64_t> keys_;
};

/// eta^p (1+gamma)^{p h}: the p-th power of the lower edge of bucket h.
inline double class_weight(double eta_p, double gamma, double p, int h) {
  return eta_p * std::pow(1.0 + gamma, p * h);
}

/// Level l with 2^l <= tau / (weight * B) < 2^{l+1}, or 0 when the ratio is
/// below 1; clamped to max_level.
inline Level level_for_weight(double tau, double weight, double B, Level max_level) {
  const double ratio = tau / (weight * B);
  if (!(ratio >= 2.0)) return 0;  // also catches NaN
  if (std::isinf(ratio)) return max_level;
  int exponent = 0;
  std::frexp(ratio, &exponent);  // ratio = f * 2^exponent, f in [0.5, 1)
  Level l = exponent - 1;
  if (l > max_level) l = max_level;
  return l;
}

inline Level level_of(int h, double eta, double gamma, double p, double tau, double B,
                      Level max_level) {
  return level_for_weight(tau, class_weight(std::pow(eta, p), gamma, p, h), B, max_level);
}

}  // namespace fpmon
