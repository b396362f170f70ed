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

// Diagnostics for a running threshold instance: counter tracking against the
// true union counts, true class sizes and the message-count envelope.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

#include "fpmon/core.hpp"
#include "fpmon/harness.hpp"
#include "fpmon/params.hpp"
#include "fpmon/sampling.hpp"

namespace fpmon {

struct TrackingReport {
  std::uint64_t samples = 0;        // sampled (z, l, j) with j in S_l^z
  std::uint64_t eligible = 0;       // v_j above the concentration floor
  std::uint64_t eligible_close = 0; // ... and |f - v_j| within the relative band
  std::uint64_t upper_ok = 0;       // f <= 2e v_j + C tau_l^{1/p} log n / B
};

/// Checks every (z, l, j) with j in S_l^z and j touched so far against the
/// tracking bounds. `union_counts[j]` is the true v_j.
inline TrackingReport tracking_report(const ThresholdRun& run,
                                      const std::vector<Count>& union_counts) {
  const auto& c = run.coordinator();
  const auto& g = c.params();
  const auto& coin = run.rule().coin();
  const double log_n = std::max(1, ceil_log2(g.n));
  const double band = std::pow(g.gamma, 5) / (log_n * log_n);
  TrackingReport rep;
  for (std::uint64_t j = 0; j < union_counts.size(); ++j) {
    const double v = static_cast<double>(union_counts[j]);
    if (v == 0) continue;
    for (std::uint32_t z = 1; z <= g.r; ++z) {
      for (Level l = 0; l <= g.max_level; ++l) {
        if (!coin.contains(z, l, j)) continue;
        ++rep.samples;
        const double f = c.counter(z, l, j);
        const double scale = g.level_scale(l);
        const double floor_v = g.C * std::pow(log_n, 5) * scale / (g.B * std::pow(g.gamma, 10));
        if (v >= floor_v) {
          ++rep.eligible;
          if (std::abs(f - v) <= band * v) ++rep.eligible_close;
        }
        if (f <= 2 * std::numbers::e * v + g.C * scale * log_n / g.B) ++rep.upper_ok;
      }
    }
  }
  return rep;
}

/// |C_h| for the classes [eta(1+gamma)^h, eta(1+gamma)^{h+1}) of the true
/// counts, as computed by the coordinator's bucket rule.
inline std::map<int, std::uint64_t> true_class_sizes(const ThresholdCoordinator& c,
                                                     const std::vector<Count>& union_counts) {
  std::map<int, std::uint64_t> sizes;
  for (const auto v : union_counts) {
    if (v == 0) continue;
    if (const auto h = c.bucket_of(static_cast<double>(v))) ++sizes[*h];
  }
  return sizes;
}

/// Classes whose mass |C_h| eta^p (1+gamma)^{ph} is at least `share` of the
/// total mass.
inline std::vector<int> contributing_classes(const ThresholdCoordinator& c,
                                             const std::map<int, std::uint64_t>& sizes,
                                             double share) {
  double total = 0;
  for (const auto& [h, s] : sizes) total += static_cast<double>(s) * c.bucket_weight(h);
  std::vector<int> out;
  for (const auto& [h, s] : sizes) {
    if (static_cast<double>(s) * c.bucket_weight(h) >= share * total) out.push_back(h);
  }
  return out;
}

/// 2^p k^{p-1} B^p log^2 n, the message-count envelope up to a constant.
inline double message_envelope(const GlobalParams& g) {
  const double log_n = std::max(1, ceil_log2(g.n));
  return std::pow(2.0, g.p) * std::pow(static_cast<double>(g.k), g.p - 1) * std::pow(g.B, g.p) *
         log_n * log_n;
}

}  // namespace fpmon
