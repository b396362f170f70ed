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

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fpmon/sampling.hpp"

namespace fpmon {
namespace {

constexpr std::uint64_t kM = 100000;

TEST(CeilLog2Test, Values) {
  EXPECT_EQ(ceil_log2(0), 0);
  EXPECT_EQ(ceil_log2(1), 0);
  EXPECT_EQ(ceil_log2(2), 1);
  EXPECT_EQ(ceil_log2(3), 2);
  EXPECT_EQ(ceil_log2(1024), 10);
  EXPECT_EQ(ceil_log2(1025), 11);
}

TEST(PublicCoinTest, LevelZeroContainsEverything) {
  PublicCoin coin(99, 3, 1000);
  for (std::uint32_t z = 1; z <= 3; ++z) {
    for (Coordinate j = 0; j < 1000; ++j) ASSERT_TRUE(coin.in_sample(z, 0, j));
  }
}

TEST(PublicCoinTest, Deterministic) {
  PublicCoin a(5, 4, 5000), b(5, 4, 5000);
  for (Coordinate j = 0; j < 5000; ++j) {
    ASSERT_EQ(a.in_sample(2, 7, j), a.in_sample(2, 7, j));
    ASSERT_EQ(a.in_sample(3, 5, j), b.in_sample(3, 5, j));
  }
}

TEST(PublicCoinTest, MaxLevelIsCeilLog2OfDimension) {
  EXPECT_EQ(PublicCoin(1, 1, 4096).max_level(), 12);
  EXPECT_EQ(PublicCoin(1, 1, 4097).max_level(), 13);
  EXPECT_EQ(PublicCoin(1, 1, 1).max_level(), 0);
}

TEST(PublicCoinTest, RejectsOutOfRangeQueries) {
  PublicCoin coin(1, 2, 100);
  EXPECT_THROW(coin.in_sample(0, 1, 5), std::out_of_range);
  EXPECT_THROW(coin.in_sample(3, 1, 5), std::out_of_range);
  EXPECT_THROW(coin.in_sample(1, -1, 5), std::out_of_range);
  EXPECT_THROW(coin.in_sample(1, 8, 5), std::out_of_range);
  EXPECT_THROW(coin.in_sample(1, 1, 100), std::out_of_range);
  EXPECT_THROW(PublicCoin(1, 0, 100), std::invalid_argument);
}

std::uint64_t members(const PublicCoin& coin, std::uint32_t z, Level l) {
  std::uint64_t n = 0;
  for (Coordinate j = 0; j < coin.dimension(); ++j) n += coin.in_sample(z, l, j) ? 1 : 0;
  return n;
}

TEST(PublicCoinTest, LevelFourCountFrozen) {
  PublicCoin coin(42, 2, kM);
  const auto count = members(coin, 1, 4);
  EXPECT_EQ(count, 6306u);
  const double sigma = std::sqrt(kM * (1.0 / 16) * (15.0 / 16));
  EXPECT_LE(std::abs(static_cast<double>(count) - 6250.0), 4 * sigma);
}

TEST(PublicCoinTest, MarginalsWithinFourSigma) {
  PublicCoin coin(2024, 3, kM);
  for (std::uint32_t z = 1; z <= 3; ++z) {
    for (Level l = 0; l <= 10; ++l) {
      const double q = std::ldexp(1.0, -l);
      const double sigma = std::sqrt(kM * q * (1 - q));
      const double got = static_cast<double>(members(coin, z, l));
      EXPECT_LE(std::abs(got - kM * q), std::max(4 * sigma, 1e-9)) << "z=" << z << " l=" << l;
    }
  }
}

TEST(PublicCoinTest, LevelsAreNotNested) {
  PublicCoin coin(7, 1, kM);
  // Nested sampling would make every level-3 member also a level-2 member.
  std::uint64_t outside = 0;
  for (Coordinate j = 0; j < kM; ++j) {
    if (coin.in_sample(1, 3, j) && !coin.in_sample(1, 2, j)) ++outside;
  }
  EXPECT_GT(outside, 0u);
}

TEST(PublicCoinTest, CrossLevelCorrelationSmall) {
  PublicCoin coin(31337, 2, kM);
  for (const auto& [a, b] : {std::pair<Level, Level>{1, 2}, {1, 3}, {2, 5}, {3, 4}}) {
    double sa = 0, sb = 0, sab = 0;
    for (Coordinate j = 0; j < kM; ++j) {
      const double x = coin.in_sample(1, a, j), y = coin.in_sample(1, b, j);
      sa += x;
      sb += y;
      sab += x * y;
    }
    const double ma = sa / kM, mb = sb / kM;
    const double cov = sab / kM - ma * mb;
    const double corr = cov / std::sqrt(ma * (1 - ma) * mb * (1 - mb));
    EXPECT_LT(std::abs(corr), 0.01) << a << "," << b;
  }
}

TEST(PublicCoinTest, RepetitionsAreDistinct) {
  PublicCoin coin(8, 2, kM);
  std::uint64_t differ = 0;
  for (Coordinate j = 0; j < kM; ++j) differ += coin.in_sample(1, 1, j) != coin.in_sample(2, 1, j);
  EXPECT_NEAR(static_cast<double>(differ) / kM, 0.5, 0.01);
}

TEST(LevelOfTest, Examples) {
  // eta = 1 and h = 0 make the weight 1, so the ratio is tau / B.
  EXPECT_EQ(level_of(0, 1.0, 0.1, 2.0, 10.0, 1.0, 20), 3);
  EXPECT_EQ(level_of(0, 1.0, 0.1, 2.0, 0.5, 1.0, 20), 0);
  EXPECT_EQ(level_of(0, 1.0, 0.1, 2.0, 1.0, 1.0, 20), 0);
  EXPECT_EQ(level_for_weight(8.0, 1.0, 1.0, 20), 3);
  EXPECT_EQ(level_for_weight(7.999, 1.0, 1.0, 20), 2);
  EXPECT_EQ(level_for_weight(2.0, 1.0, 1.0, 20), 1);
  EXPECT_EQ(level_for_weight(1.999, 1.0, 1.0, 20), 0);
}

TEST(LevelOfTest, ClampedToMaxLevel) {
  EXPECT_EQ(level_for_weight(1e12, 1.0, 1.0, 12), 12);
  EXPECT_EQ(level_for_weight(1e300, 1e-300, 1.0, 7), 7);
}

TEST(LevelOfTest, NonIncreasingInBucket) {
  for (const double eta : {0.01, 0.37, 1.0}) {
    Level prev = 64;
    for (int h = 0; h < 2000; ++h) {
      const Level l = level_of(h, eta, 0.02, 2.0, 1e7, 300.0, 20);
      ASSERT_LE(l, prev);
      ASSERT_GE(l, 0);
      prev = l;
    }
  }
}

}  // namespace
}  // namespace fpmon
