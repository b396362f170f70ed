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

// Single-threshold protocol: the site-side send rule and the coordinator's
// counter / class-estimation state machine for a fixed tau.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpmon/core.hpp"
#include "fpmon/params.hpp"
#include "fpmon/random.hpp"
#include "fpmon/sampling.hpp"

namespace fpmon {

/// The only thing that crosses the site -> coordinator boundary.
struct Message {
  Coordinate j = 0;
  std::uint32_t z = 1;  // 1-based repetition
  Level level = 0;
  std::uint32_t bit_cost = 0;

  friend bool operator==(const Message&, const Message&) = default;
};

/// Bits needed to encode (j, z, l), plus the instance address when messages
/// are multiplexed over `address_space` protocol instances.
inline std::uint32_t bit_cost(std::uint64_t m, std::uint32_t r, Level max_level,
                              std::uint64_t address_space = 1) {
  return static_cast<std::uint32_t>(ceil_log2(m) + ceil_log2(r) +
                                    ceil_log2(static_cast<std::uint64_t>(max_level) + 1) +
                                    ceil_log2(address_space));
}

inline std::uint32_t bit_cost(const GlobalParams& g, std::uint64_t address_space = 1) {
  return bit_cost(g.m, g.r, g.max_level, address_space);
}

struct SiteState {
  std::uint32_t site_id = 0;
  FreqVector v;

  SiteState() = default;
  SiteState(std::uint32_t id, std::uint64_t dimension) : site_id(id), v(dimension) {}
};

/// Per-instance send rule shared by all sites. Bernoulli trials are keyed by
/// (site seed, site id, event index, z, l), so a run is a pure function of the
/// seeds.
class SiteSendRule {
 public:
  SiteSendRule(const GlobalParams& params, const PublicCoin& coin, std::uint64_t site_seed,
               std::uint64_t address_space = 1)
      : coin_(coin),
        site_seed_(site_seed),
        repetitions_(params.r),
        levels_(params.levels()),
        bits_(bit_cost(params, address_space)) {
    if (coin.repetitions() != params.r || coin.max_level() != params.max_level) {
      throw std::invalid_argument("SiteSendRule: public coin does not match params");
    }
    guard_.reserve(levels_);
    probability_.reserve(levels_);
    for (Level l = 0; l < levels_; ++l) {
      guard_.push_back(params.send_guard(l));
      probability_.push_back(params.send_probability(l));
    }
    trial_keys_.reserve(static_cast<std::size_t>(repetitions_) * levels_);
    for (std::uint32_t z = 1; z <= repetitions_; ++z) {
      for (Level l = 0; l < levels_; ++l) {
        trial_keys_.push_back(hash_words(site_seed, 0x7a1, z, static_cast<std::uint64_t>(l)));
      }
    }
  }

  const PublicCoin& coin() const noexcept { return coin_; }
  std::uint32_t message_bits() const noexcept { return bits_; }
  double guard(Level l) const { return guard_.at(l); }
  double probability(Level l) const { return probability_.at(l); }

  /// Messages triggered at a site whose local count of j is `local_count`
  /// after the update; appended in (z, l) order.
  template <typename Sink>
  void emit(std::uint32_t site_id, std::uint64_t event_index, Coordinate j, Count local_count,
            Sink&& sink) const {
    const double count = static_cast<double>(local_count);
    // The guard tightens as l decreases; levels below first_level never pass.
    Level first_level = levels_;
    for (Level l = levels_ - 1; l >= 0 && count > guard_[l]; --l) first_level = l;
    if (first_level == levels_) return;
    const std::uint64_t event_key = hash_words(site_seed_, site_id, event_index);
    for (std::uint32_t z = 1; z <= repetitions_; ++z) {
      const std::size_t row = static_cast<std::size_t>(z - 1) * levels_;
      for (Level l = first_level; l < levels_; ++l) {
        if (!coin_.contains(z, l, j)) continue;
        const double q = probability_[l];
        if (q < 1.0 && !(to_unit(mix64(trial_keys_[row + l] ^ event_key)) < q)) continue;
        sink(Message{j, z, l, bits_});
      }
    }
  }

 private:
  PublicCoin coin_;
  std::uint64_t site_seed_;
  std::uint32_t repetitions_;
  int levels_;
  std::uint32_t bits_;
  std::vector<double> guard_;
  std::vector<double> probability_;
  std::vector<std::uint64_t> trial_keys_;
};

/// Applies the update to the site's vector, then runs the send rule.
inline std::vector<Message> site_on_update(SiteState& site, Coordinate j,
                                           std::uint64_t event_index, const SiteSendRule& rule) {
  const Count local = site.v.add(j);
  std::vector<Message> out;
  rule.emit(site.site_id, event_index, j, local, [&](const Message& msg) { out.push_back(msg); });
  return out;
}

/// Open-addressing map from packed (z, l, j) keys to message counts.
class CounterTable {
 public:
  CounterTable() { slots_.assign(64, Slot{}); }

  std::uint32_t get(std::uint64_t key) const {
    std::size_t i = probe_start(key);
    while (true) {
      const Slot& s = slots_[i];
      if (s.key == kEmpty) return 0;
      if (s.key == key) return s.count;
      i = (i + 1) & (slots_.size() - 1);
    }
  }

  // Increments and returns the new count.
  std::uint32_t increment(std::uint64_t key) {
    if ((size_ + 1) * 10 > slots_.size() * 7) grow();
    std::size_t i = probe_start(key);
    while (true) {
      Slot& s = slots_[i];
      if (s.key == kEmpty) {
        s.key = key;
        s.count = 1;
        ++size_;
        return 1;
      }
      if (s.key == key) return ++s.count;
      i = (i + 1) & (slots_.size() - 1);
    }
  }

  std::size_t size() const noexcept { return size_; }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const Slot& s : slots_) {
      if (s.key != kEmpty) fn(s.key, s.count);
    }
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  struct Slot {
    std::uint64_t key = kEmpty;
    std::uint32_t count = 0;
  };

  std::size_t probe_start(std::uint64_t key) const {
    return static_cast<std::size_t>(mix64(key)) & (slots_.size() - 1);
  }

  void grow() {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(old.size() * 2, Slot{});
    size_ = 0;
    for (const Slot& s : old) {
      if (s.key == kEmpty) continue;
      std::size_t i = probe_start(s.key);
      while (slots_[i].key != kEmpty) i = (i + 1) & (slots_.size() - 1);
      slots_[i] = s;
      ++size_;
    }
  }

  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

/// How the coordinator recomputes class estimates after each message.
enum class EstimationMode {
  incremental,   // per-bucket histograms, only the moved coordinate is touched
  literal_pass,  // full pass over all counters on every message
};

/// Coordinator state for one threshold instance. Single writer: messages must
/// be applied serially.
class ThresholdCoordinator {
 public:
  ThresholdCoordinator(const GlobalParams& params, std::uint64_t eta_seed,
                       EstimationMode mode = EstimationMode::incremental)
      : params_(params), mode_(mode) {
    params_.validate();
    eta_ = to_unit_open_zero(mix64(eta_seed));
    eta_p_ = std::pow(eta_, params_.p);
    log_growth_ = std::log1p(params_.gamma);
    const double span = std::log(static_cast<double>(params_.n) / eta_p_) / log_growth_;
    max_bucket_ = static_cast<int>(std::ceil(span / params_.gamma));
    for (Level l = 0; l < params_.levels(); ++l) increment_.push_back(params_.increment_for(l));
    scratch_.resize(params_.r);
    bucket_memo_.resize(params_.levels());
  }

  const GlobalParams& params() const noexcept { return params_; }
  EstimationMode mode() const noexcept { return mode_; }
  double eta() const noexcept { return eta_; }
  int max_bucket() const noexcept { return max_bucket_; }
  bool out() const noexcept { return out_; }
  bool terminated() const noexcept { return terminated_; }
  std::uint64_t messages_received() const noexcept { return received_; }
  std::uint64_t dropped() const noexcept { return dropped_; }
  // Times the running estimate went down after a message.
  std::uint64_t estimate_decreases() const noexcept { return decreases_; }
  double increment(Level l) const { return increment_.at(l); }

  /// Running F_p estimate: sum over buckets of c~_h eta^p (1+gamma)^{ph}.
  double estimate() const noexcept { return estimate_; }

  std::uint64_t message_count(std::uint32_t z, Level l, Coordinate j) const {
    return counts_.get(pack(z, l, j));
  }
  double counter(std::uint32_t z, Level l, Coordinate j) const {
    return static_cast<double>(message_count(z, l, j)) * increment_.at(l);
  }

  /// Applies one message. Returns true when this message flips out to 1.
  bool on_message(const Message& msg) {
    if (terminated_) {
      ++dropped_;
      return false;
    }
    check(msg);
    ++received_;
    const std::uint32_t count = counts_.increment(pack(msg.z, msg.level, msg.j));
    double next = estimate_;
    if (mode_ == EstimationMode::literal_pass) {
      next = literal_estimate();
    } else if (apply_move(msg, count)) {
      next = sum_nonzero();
    }
    if (next < estimate_) ++decreases_;
    estimate_ = next;
    if (estimate_ > params_.fire_fraction * params_.tau) {
      out_ = true;
      terminated_ = true;
      return true;
    }
    return false;
  }

  /// Lower bucket edge eta (1+gamma)^h.
  double bucket_edge(int h) const {
    if (h < 0) throw std::out_of_range("bucket_edge: negative bucket");
    while (static_cast<int>(edges_.size()) <= h) {
      edges_.push_back(eta_ * std::pow(1.0 + params_.gamma, static_cast<int>(edges_.size())));
    }
    return edges_[h];
  }

  /// eta^p (1+gamma)^{ph}
  double bucket_weight(int h) const {
    while (static_cast<int>(weights_.size()) <= h) {
      weights_.push_back(class_weight(eta_p_, params_.gamma, params_.p,
                                      static_cast<int>(weights_.size())));
    }
    return weights_[h];
  }

  Level bucket_level(int h) const {
    while (static_cast<int>(levels_.size()) <= h) {
      levels_.push_back(static_cast<std::int8_t>(
          level_for_weight(params_.tau, bucket_weight(static_cast<int>(levels_.size())), params_.B,
                           params_.max_level)));
    }
    return levels_[h];
  }

  /// Bucket h with f in [edge(h), edge(h+1)), or nullopt when f < eta or the
  /// bucket lies beyond max_bucket.
  std::optional<int> bucket_of(double f) const {
    if (!(f >= eta_)) return std::nullopt;
    int h = static_cast<int>(std::floor(std::log(f / eta_) / log_growth_));
    if (h < 0) h = 0;
    if (h > max_bucket_ + 1) return std::nullopt;
    while (h > 0 && bucket_edge(h) > f) --h;
    while (bucket_edge(h + 1) <= f) ++h;
    if (h > max_bucket_) return std::nullopt;
    return h;
  }

  /// c~_h from the maintained structure (histograms or a fresh pass).
  double class_estimate(int h) const {
    if (mode_ == EstimationMode::literal_pass) return literal_class_estimate(h);
    const auto it = nonzero_.find(h);
    return it == nonzero_.end() ? 0.0 : it->second;
  }

  /// c~_h recomputed from the raw counters.
  double literal_class_estimate(int h) const {
    if (h < 0 || h > max_bucket_) return 0.0;
    const auto tallies = tally_buckets();
    const auto it = tallies.find(h);
    return it == tallies.end() ? 0.0 : median_scaled(it->second, bucket_level(h));
  }

  /// Full pass over every bucket, straight from the counters.
  double literal_estimate() const {
    double sum = 0.0;
    for (const auto& [h, per_z] : tally_buckets()) {
      const double c = median_scaled(per_z, bucket_level(h));
      if (c != 0.0) sum += c * bucket_weight(h);
    }
    return sum;
  }

 private:
  std::uint64_t pack(std::uint32_t z, Level l, Coordinate j) const {
    return (static_cast<std::uint64_t>(z - 1) * params_.levels() + static_cast<std::uint64_t>(l)) *
               params_.m +
           j;
  }

  void check(const Message& msg) const {
    if (msg.z < 1 || msg.z > params_.r || msg.level < 0 || msg.level > params_.max_level ||
        msg.j >= params_.m) {
      throw std::out_of_range("coordinator: malformed message (j=" + std::to_string(msg.j) +
                              ", z=" + std::to_string(msg.z) +
                              ", l=" + std::to_string(msg.level) + ")");
    }
  }

  // Lower median of 2^l * |F_{z,h}| over z.
  double median_scaled(const std::vector<std::uint32_t>& per_z, Level l) const {
    scratch_.assign(per_z.begin(), per_z.end());
    const auto mid = scratch_.begin() + (scratch_.size() - 1) / 2;
    std::nth_element(scratch_.begin(), mid, scratch_.end());
    return std::ldexp(static_cast<double>(*mid), l);
  }

  std::map<int, std::vector<std::uint32_t>> tally_buckets() const {
    std::map<int, std::vector<std::uint32_t>> tallies;
    const std::uint64_t levels = params_.levels();
    counts_.for_each([&](std::uint64_t key, std::uint32_t count) {
      const std::uint64_t row = key / params_.m;
      const auto l = static_cast<Level>(row % levels);
      const auto z_index = static_cast<std::size_t>(row / levels);
      const auto h = bucket_of(static_cast<double>(count) * increment_[l]);
      if (!h || bucket_level(*h) != l) return;
      auto& per_z = tallies[*h];
      if (per_z.empty()) per_z.assign(params_.r, 0);
      ++per_z[z_index];
    });
    return tallies;
  }

  // Moves one coordinate between buckets; true when some c~_h changed.
  bool apply_move(const Message& msg, std::uint32_t count) {
    const int before = count > 1 ? bucket_for_count(msg.level, count - 1) : -1;
    const int after = bucket_for_count(msg.level, count);
    if (before == after) return false;
    bool changed = false;
    if (before >= 0 && bucket_level(before) == msg.level) {
      --histogram_[before][msg.z - 1];
      changed |= refresh(before);
    }
    if (after >= 0 && bucket_level(after) == msg.level) {
      if (static_cast<std::size_t>(after) >= histogram_.size()) histogram_.resize(after + 1);
      auto& per_z = histogram_[after];
      if (per_z.empty()) per_z.assign(params_.r, 0);
      ++per_z[msg.z - 1];
      changed |= refresh(after);
    }
    return changed;
  }

  // bucket_of(count * increment(l)), memoized per level; -1 for none.
  int bucket_for_count(Level l, std::uint32_t count) {
    auto& memo = bucket_memo_[l];
    while (memo.size() <= count) {
      const auto h = bucket_of(static_cast<double>(memo.size()) * increment_[l]);
      memo.push_back(h ? *h : -1);
    }
    return memo[count];
  }

  bool refresh(int h) {
    const double c = median_scaled(histogram_[h], bucket_level(h));
    const auto it = nonzero_.find(h);
    const double old = it == nonzero_.end() ? 0.0 : it->second;
    if (c == old) return false;
    if (c == 0.0) {
      nonzero_.erase(it);
    } else {
      nonzero_[h] = c;
    }
    return true;
  }

  double sum_nonzero() const {
    double sum = 0.0;
    for (const auto& [h, c] : nonzero_) sum += c * bucket_weight(h);
    return sum;
  }

  GlobalParams params_;
  EstimationMode mode_;
  double eta_ = 1.0;
  double eta_p_ = 1.0;
  double log_growth_ = 0.0;
  int max_bucket_ = 0;
  std::vector<double> increment_;

  CounterTable counts_;
  std::vector<std::vector<std::uint32_t>> histogram_;  // indexed by bucket
  std::vector<std::vector<int>> bucket_memo_;
  std::map<int, double> nonzero_;

  mutable std::vector<double> edges_;
  mutable std::vector<double> weights_;
  mutable std::vector<std::int8_t> levels_;
  mutable std::vector<std::uint32_t> scratch_;

  double estimate_ = 0.0;
  bool out_ = false;
  bool terminated_ = false;
  std::uint64_t received_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t decreases_ = 0;
};

}  // namespace fpmon
