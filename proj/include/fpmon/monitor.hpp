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

// Continuous monitoring from a geometric ladder of threshold instances, each
// amplified by an odd number of independent copies and a majority vote.

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fpmon/params.hpp"
#include "fpmon/threshold.hpp"

namespace fpmon {

struct MonitorConfig {
  // copies = 2 * ceil(c_a * ln(10 * I_max)) + 1
  double c_a = 1.0;
  // Explicit copy count (must be odd); 0 selects the formula above.
  std::uint32_t copies = 0;
  // Highest threshold on the ladder; 0 selects n^2 * 2^p.
  double ladder_top = 0.0;
  EstimationMode mode = EstimationMode::incremental;
};

struct UpdateCost {
  std::uint64_t messages = 0;
  std::uint64_t bits = 0;
};

class Monitor {
 public:
  struct Copy {
    SiteSendRule rule;
    ThresholdCoordinator coordinator;
  };

  struct Instance {
    double tau = 1.0;
    std::vector<Copy> copies;
    std::uint32_t fired_copies = 0;
    bool fired = false;  // majority of copies have out = 1
  };

  Monitor(const GlobalParams& base, std::uint64_t master_seed, const MonitorConfig& config = {})
      : base_(base), master_seed_(master_seed), config_(config) {
    const double top =
        config.ladder_top > 0 ? config.ladder_top
                              : static_cast<double>(base.n) * static_cast<double>(base.n) *
                                    std::pow(2.0, base.p);
    if (!(top >= 1)) throw std::invalid_argument("Monitor: ladder top must be >= 1");
    top_index_ = static_cast<std::uint32_t>(std::ceil(std::log(top) / std::log1p(base.eps)));
    if (config.copies != 0) {
      if (config.copies % 2 == 0) throw std::invalid_argument("Monitor: copy count must be odd");
      copies_ = config.copies;
    } else {
      const double ln_term = std::log(10.0 * std::max<std::uint32_t>(top_index_, 1));
      copies_ = 2 * static_cast<std::uint32_t>(std::ceil(config.c_a * ln_term)) + 1;
    }
    const std::uint64_t address_space =
        static_cast<std::uint64_t>(top_index_ + 1) * static_cast<std::uint64_t>(copies_);
    bits_per_message_ = bit_cost(base, address_space);

    sites_.reserve(base.k);
    for (std::uint32_t i = 0; i < base.k; ++i) sites_.emplace_back(i, base.m);

    instances_.reserve(top_index_ + 1);
    for (std::uint32_t i = 0; i <= top_index_; ++i) {
      Instance inst;
      inst.tau = std::pow(1.0 + base.eps, static_cast<double>(i));
      const GlobalParams params = base.with_tau(inst.tau);
      inst.copies.reserve(copies_);
      for (std::uint32_t c = 0; c < copies_; ++c) {
        const auto seeds = ProtocolSeeds::derive(master_seed, i, c);
        inst.copies.push_back(Copy{
            SiteSendRule(params, PublicCoin(seeds.coin, params.r, params.m), seeds.site,
                         address_space),
            ThresholdCoordinator(params, seeds.eta, config.mode)});
      }
      instances_.push_back(std::move(inst));
    }
  }

  std::uint32_t top_index() const noexcept { return top_index_; }
  std::uint32_t copies_per_instance() const noexcept { return copies_; }
  std::uint32_t bits_per_message() const noexcept { return bits_per_message_; }
  const std::vector<Instance>& instances() const noexcept { return instances_; }
  const std::vector<SiteState>& sites() const noexcept { return sites_; }
  std::uint64_t messages() const noexcept { return messages_; }
  std::uint64_t bits() const noexcept { return bits_; }

  /// Applies one stream update and routes every triggered message, in
  /// (instance, copy, z, l) order.
  UpdateCost on_update(std::uint32_t site, Coordinate j, std::uint64_t event_index) {
    if (site >= sites_.size()) throw std::out_of_range("Monitor: site index out of range");
    const Count local = sites_[site].v.add(j);
    UpdateCost cost;
    for (auto& inst : instances_) {
      if (inst.fired) continue;
      // Liveness is decided before any of this event's messages are applied.
      const std::uint32_t live_copies = static_cast<std::uint32_t>(inst.copies.size());
      for (std::uint32_t c = 0; c < live_copies; ++c) {
        Copy& copy = inst.copies[c];
        if (copy.coordinator.terminated()) continue;
        copy.rule.emit(site, event_index, j, local, [&](const Message& msg) {
          ++cost.messages;
          cost.bits += msg.bit_cost;
          if (copy.coordinator.on_message(msg)) ++inst.fired_copies;
        });
      }
      if (2 * inst.fired_copies > copies_) {
        inst.fired = true;
        ++fired_instances_;
        if (highest_fired_ < 0 || static_cast<std::int64_t>(&inst - instances_.data()) > highest_fired_) {
          highest_fired_ = &inst - instances_.data();
        }
      }
    }
    messages_ += cost.messages;
    bits_ += cost.bits;
    return cost;
  }

  std::uint32_t fired_instances() const noexcept { return fired_instances_; }

  /// Geometric mean of the tightest bracket above the highest fired
  /// threshold, (1+eps)^{i+1/2}; 0 before anything fired.
  double estimate() const {
    if (highest_fired_ < 0) return 0.0;
    return std::pow(1.0 + base_.eps, static_cast<double>(highest_fired_) + 0.5);
  }

  std::int64_t highest_fired() const noexcept { return highest_fired_; }

 private:
  GlobalParams base_;
  std::uint64_t master_seed_;
  MonitorConfig config_;
  std::uint32_t top_index_ = 0;
  std::uint32_t copies_ = 1;
  std::uint32_t bits_per_message_ = 0;
  std::vector<SiteState> sites_;
  std::vector<Instance> instances_;
  std::uint32_t fired_instances_ = 0;
  std::int64_t highest_fired_ = -1;
  std::uint64_t messages_ = 0;
  std::uint64_t bits_ = 0;
};

}  // namespace fpmon
