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

// Communication sweep over k at a fixed stream shape.

#include <cmath>
#include <cstdint>
#include <vector>

#include "fpmon/harness.hpp"
#include "fpmon/params.hpp"
#include "fpmon/random.hpp"
#include "fpmon/streams.hpp"

namespace fpmon {

struct BenchConfig {
  std::vector<std::uint32_t> ks{4, 8, 16};
  double p = 2;
  double eps = 0.25;
  std::uint64_t m = 4096;
  std::uint64_t n = 20000;
  double zipf_s = 1.1;
  std::uint32_t trials = 3;
  std::uint64_t seed = 1;
  // tau = final F_p / (2^p * tau_margin), so every run crosses 2^p tau.
  double tau_margin = 1.25;
  Constants constants;
};

struct BenchRow {
  std::uint32_t k = 0;
  std::uint32_t trials = 0;
  double mean_messages = 0;
  double mean_bits = 0;
  double fired_fraction = 0;
};

/// One threshold run per trial; trial t of every k uses stream seed
/// hash(seed, t) so rows differ only in k.
inline std::vector<BenchRow> bench_comm(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  for (const auto k : cfg.ks) {
    BenchRow row;
    row.k = k;
    row.trials = cfg.trials;
    for (std::uint32_t t = 0; t < cfg.trials; ++t) {
      const auto stream_seed = hash_words(cfg.seed, t);
      const auto s = zipf_stream(cfg.m, k, cfg.n, cfg.zipf_s, stream_seed);
      RunningMoment truth(cfg.m, cfg.p);
      for (const auto& e : s.events) truth.add(e.j);
      const double tau = truth.value() / (std::pow(2.0, cfg.p) * cfg.tau_margin);
      const auto g = GlobalParams::make(k, cfg.m, cfg.n, cfg.p, cfg.eps, tau, cfg.constants);
      SimulationOptions opt;
      opt.master_seed = hash_words(cfg.seed, t, k);
      opt.stride = cfg.n;
      const auto res = run_simulation(s, g, opt);
      row.mean_messages += static_cast<double>(res.messages);
      row.mean_bits += static_cast<double>(res.bits);
      row.fired_fraction += res.fired_at ? 1.0 : 0.0;
    }
    if (cfg.trials > 0) {
      row.mean_messages /= cfg.trials;
      row.mean_bits /= cfg.trials;
      row.fired_fraction /= cfg.trials;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fpmon
