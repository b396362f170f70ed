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

// Frequency-vector model of the site streams plus brute-force oracles for the
// statistics the protocols monitor or reduce to.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fpmon {

using Coordinate = std::uint64_t;
using Count = std::uint64_t;

/// Sparse non-negative integer vector over [0, m). Absent coordinates are zero.
class FreqVector {
 public:
  FreqVector() = default;
  explicit FreqVector(std::uint64_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw std::invalid_argument("FreqVector: dimension must be positive");
  }

  std::uint64_t dimension() const noexcept { return dimension_; }

  Count operator[](Coordinate j) const {
    const auto it = entries_.find(j);
    return it == entries_.end() ? 0 : it->second;
  }

  // Adds `amount` to coordinate j and returns the new count.
  Count add(Coordinate j, Count amount = 1) {
    if (j >= dimension_) {
      throw std::out_of_range("coordinate " + std::to_string(j) + " outside [0, " +
                              std::to_string(dimension_) + ")");
    }
    if (amount == 0) return (*this)[j];
    return entries_[j] += amount;
  }

  std::size_t support_size() const noexcept { return entries_.size(); }
  Count total() const noexcept {
    Count sum = 0;
    for (const auto& [j, c] : entries_) sum += c;
    return sum;
  }

  const std::map<Coordinate, Count>& entries() const noexcept { return entries_; }

  friend bool operator==(const FreqVector&, const FreqVector&) = default;

 private:
  std::uint64_t dimension_ = 1;
  std::map<Coordinate, Count> entries_;
};

inline FreqVector apply_update(FreqVector v, Coordinate j) {
  v.add(j);
  return v;
}

namespace detail {

inline bool is_small_integer(double p) { return p == std::floor(p) && p >= 1 && p <= 64; }

// Integer power with overflow detection; returns false on overflow.
inline bool checked_pow(unsigned __int128 base, int exponent, unsigned __int128& out) {
  constexpr unsigned __int128 kMax = ~static_cast<unsigned __int128>(0);
  unsigned __int128 acc = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && acc > kMax / base) return false;
    acc *= base;
  }
  out = acc;
  return true;
}

}  // namespace detail

/// Sum of count^p over a range of non-negative counts. Integer p is evaluated
/// in 128-bit integer arithmetic when it fits, otherwise in long double.
template <typename Range>
double moment_of_counts(const Range& counts, double p) {
  if (!(p > 0)) throw std::invalid_argument("moment order p must be positive");
  if (detail::is_small_integer(p)) {
    const int e = static_cast<int>(p);
    constexpr unsigned __int128 kMax = ~static_cast<unsigned __int128>(0);
    unsigned __int128 sum = 0;
    bool overflow = false;
    for (const auto c : counts) {
      unsigned __int128 term = 0;
      if (!detail::checked_pow(static_cast<unsigned __int128>(c), e, term) ||
          sum > kMax - term) {
        overflow = true;
        break;
      }
      sum += term;
    }
    if (!overflow) return static_cast<double>(sum);
  }
  long double sum = 0;
  for (const auto c : counts) {
    if (c != 0) sum += std::pow(static_cast<long double>(c), static_cast<long double>(p));
  }
  return static_cast<double>(sum);
}

inline double exact_fp(const FreqVector& v, double p) {
  std::vector<Count> counts;
  counts.reserve(v.support_size());
  for (const auto& [j, c] : v.entries()) counts.push_back(c);
  return moment_of_counts(counts, p);
}

inline std::uint64_t exact_f0(const FreqVector& v) {
  return static_cast<std::uint64_t>(
      std::count_if(v.entries().begin(), v.entries().end(),
                    [](const auto& e) { return e.second > 0; }));
}

using Item = std::int64_t;
using Multiset = std::vector<Item>;

namespace detail {
// Slack for comparing integer counts against phi*m computed in floating point.
inline double rank_slack(std::size_t m) { return 1e-9 * static_cast<double>(m); }
}  // namespace detail

/// Smallest item x of A with at most phi*m items below it and at most
/// (1-phi)*m items above it.
inline Item exact_quantile(Multiset items, double phi) {
  if (items.empty()) throw std::invalid_argument("exact_quantile: empty multiset");
  if (!(phi >= 0 && phi <= 1)) throw std::invalid_argument("exact_quantile: phi outside [0,1]");
  std::sort(items.begin(), items.end());
  const auto m = items.size();
  const double below_cap = phi * static_cast<double>(m) + detail::rank_slack(m);
  const double above_cap = (1 - phi) * static_cast<double>(m) + detail::rank_slack(m);
  for (std::size_t i = 0; i < m;) {
    std::size_t run_end = i;
    while (run_end < m && items[run_end] == items[i]) ++run_end;
    const auto smaller = static_cast<double>(i);
    const auto greater = static_cast<double>(m - run_end);
    if (smaller <= below_cap && greater <= above_cap) return items[i];
    i = run_end;
  }
  // A median-type element always qualifies; reaching here means phi was NaN-like.
  throw std::logic_error("exact_quantile: no qualifying item");
}

/// Items with frequency at least phi*m, in ascending order.
inline std::vector<Item> exact_heavy_hitters(const Multiset& items, double phi) {
  if (items.empty()) throw std::invalid_argument("exact_heavy_hitters: empty multiset");
  if (!(phi >= 0 && phi <= 1)) {
    throw std::invalid_argument("exact_heavy_hitters: phi outside [0,1]");
  }
  std::map<Item, std::size_t> freq;
  for (const auto x : items) ++freq[x];
  const double cut = phi * static_cast<double>(items.size()) - detail::rank_slack(items.size());
  std::vector<Item> out;
  for (const auto& [x, f] : freq) {
    if (static_cast<double>(f) >= cut) out.push_back(x);
  }
  return out;
}

struct SignedUpdate {
  Item item;
  int sign;  // +1 insertion, -1 deletion
};
using SignedMultiset = std::vector<SignedUpdate>;

/// Empirical entropy (base 2) of the net frequencies of a signed multiset.
inline double exact_entropy(const SignedMultiset& updates) {
  std::map<Item, std::int64_t> net;
  for (const auto& u : updates) {
    if (u.sign != 1 && u.sign != -1) {
      throw std::invalid_argument("exact_entropy: sign must be +1 or -1");
    }
    net[u.item] += u.sign;
  }
  double total = 0;
  for (const auto& [x, f] : net) total += static_cast<double>(std::llabs(f));
  if (total == 0) throw std::invalid_argument("exact_entropy: all net frequencies are zero");
  double h = 0;
  for (const auto& [x, f] : net) {
    if (f == 0) continue;
    const double share = static_cast<double>(std::llabs(f)) / total;
    h += share * std::log2(1.0 / share);
  }
  return h;
}

}  // namespace fpmon
