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

// Discrete-event driver: feeds a stream into the sites, delivers messages to
// the coordinator(s) in canonical order and records a trace.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpmon/core.hpp"
#include "fpmon/monitor.hpp"
#include "fpmon/params.hpp"
#include "fpmon/streams.hpp"
#include "fpmon/threshold.hpp"

namespace fpmon {

/// One threshold instance with its k sites, driven event by event.
class ThresholdRun {
 public:
  ThresholdRun(const GlobalParams& params, const ProtocolSeeds& seeds,
               EstimationMode mode = EstimationMode::incremental)
      : rule_(params, PublicCoin(seeds.coin, params.r, params.m), seeds.site),
        coordinator_(params, seeds.eta, mode) {
    sites_.reserve(params.k);
    for (std::uint32_t i = 0; i < params.k; ++i) sites_.emplace_back(i, params.m);
  }

  UpdateCost on_update(std::uint32_t site, Coordinate j, std::uint64_t event_index) {
    if (site >= sites_.size()) throw std::out_of_range("ThresholdRun: site index out of range");
    const Count local = sites_[site].v.add(j);
    UpdateCost cost;
    if (coordinator_.terminated()) return cost;
    rule_.emit(site, event_index, j, local, [&](const Message& msg) {
      ++cost.messages;
      cost.bits += msg.bit_cost;
      coordinator_.on_message(msg);
    });
    messages_ += cost.messages;
    bits_ += cost.bits;
    return cost;
  }

  const ThresholdCoordinator& coordinator() const noexcept { return coordinator_; }
  const SiteSendRule& rule() const noexcept { return rule_; }
  const std::vector<SiteState>& sites() const noexcept { return sites_; }
  std::uint64_t messages() const noexcept { return messages_; }
  std::uint64_t bits() const noexcept { return bits_; }

 private:
  SiteSendRule rule_;
  ThresholdCoordinator coordinator_;
  std::vector<SiteState> sites_;
  std::uint64_t messages_ = 0;
  std::uint64_t bits_ = 0;
};

/// Exact F_p of the union, maintained incrementally. Integer p up to 4 is
/// tracked exactly in 128-bit arithmetic.
class RunningMoment {
 public:
  RunningMoment(std::uint64_t m, double p) : p_(p), counts_(m, 0) {
    if (!(p > 0)) throw std::invalid_argument("RunningMoment: p must be positive");
    integer_ = p == std::floor(p) && p <= 4;
  }

  void add(Coordinate j) {
    const Count c = counts_.at(j)++;
    if (integer_) {
      exact_ += ipow(c + 1) - ipow(c);
    } else {
      approx_ += std::pow(static_cast<long double>(c + 1), static_cast<long double>(p_)) -
                 std::pow(static_cast<long double>(c), static_cast<long double>(p_));
    }
  }

  double value() const {
    return integer_ ? static_cast<double>(exact_) : static_cast<double>(approx_);
  }
  const std::vector<Count>& counts() const noexcept { return counts_; }

 private:
  unsigned __int128 ipow(Count c) const {
    unsigned __int128 out = 1;
    for (int i = 0; i < static_cast<int>(p_); ++i) out *= c;
    return out;
  }

  double p_;
  bool integer_ = false;
  std::vector<Count> counts_;
  unsigned __int128 exact_ = 0;
  long double approx_ = 0;
};

struct TraceRow {
  std::uint64_t t = 0;
  double true_fp = 0;
  double estimate = 0;
  std::uint64_t cum_messages = 0;
  std::uint64_t cum_bits = 0;
  std::uint64_t fired_instances = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

enum class RunMode { threshold, monitor };

struct SimulationOptions {
  RunMode mode = RunMode::threshold;
  std::uint64_t master_seed = 1;
  std::uint64_t stride = 1;  // keep every stride-th row (and the last)
  EstimationMode estimation = EstimationMode::incremental;
  MonitorConfig monitor;
};

struct SimulationResult {
  std::vector<TraceRow> rows;
  std::uint64_t messages = 0;
  std::uint64_t bits = 0;
  std::optional<std::uint64_t> fired_at;  // threshold mode: event where out became 1
  double final_fp = 0;
  double final_estimate = 0;
};

/// Runs the stream through one threshold instance (seeds derived with
/// instance 0, copy 0) or through the monitor ladder.
inline SimulationResult run_simulation(const Stream& stream, const GlobalParams& params,
                                       const SimulationOptions& options = {}) {
  validate_stream(stream);
  if (stream.m != params.m || stream.k != params.k) {
    throw std::invalid_argument("run_simulation: stream shape (m=" + std::to_string(stream.m) +
                                ", k=" + std::to_string(stream.k) +
                                ") does not match params (m=" + std::to_string(params.m) +
                                ", k=" + std::to_string(params.k) + ")");
  }
  if (options.stride == 0) throw std::invalid_argument("run_simulation: stride must be >= 1");

  SimulationResult result;
  RunningMoment truth(params.m, params.p);
  std::optional<ThresholdRun> single;
  std::optional<Monitor> monitor;
  if (options.mode == RunMode::threshold) {
    single.emplace(params, ProtocolSeeds::derive(options.master_seed, 0, 0), options.estimation);
  } else {
    MonitorConfig cfg = options.monitor;
    cfg.mode = options.estimation;
    monitor.emplace(params, options.master_seed, cfg);
  }

  const std::size_t total = stream.events.size();
  for (std::size_t i = 0; i < total; ++i) {
    const auto& e = stream.events[i];
    truth.add(e.j);
    TraceRow row;
    row.t = e.t;
    row.true_fp = truth.value();
    if (single) {
      single->on_update(e.site, e.j, e.t);
      const auto& c = single->coordinator();
      if (c.out() && !result.fired_at) result.fired_at = e.t;
      row.estimate = c.estimate();
      row.cum_messages = single->messages();
      row.cum_bits = single->bits();
      row.fired_instances = c.out() ? 1 : 0;
    } else {
      monitor->on_update(e.site, e.j, e.t);
      row.estimate = monitor->estimate();
      row.cum_messages = monitor->messages();
      row.cum_bits = monitor->bits();
      row.fired_instances = monitor->fired_instances();
    }
    if (i % options.stride == 0 || i + 1 == total) result.rows.push_back(row);
    result.messages = row.cum_messages;
    result.bits = row.cum_bits;
    result.final_fp = row.true_fp;
    result.final_estimate = row.estimate;
  }
  return result;
}

/// %.12g formatting used by the trace and every CSV table.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline constexpr const char* kTraceHeader = "t,true_fp,estimate,cum_messages,cum_bits,fired_instances";

inline void write_trace(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << kTraceHeader << '\n';
  for (const auto& r : rows) {
    os << r.t << ',' << format_real(r.true_fp) << ',' << format_real(r.estimate) << ','
       << r.cum_messages << ',' << r.cum_bits << ',' << r.fired_instances << '\n';
  }
}

}  // namespace fpmon
